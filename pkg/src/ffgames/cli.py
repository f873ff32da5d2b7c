"""Command-line entry point: ``ffgames {run,compare,analyze,synth,experiment}``.

Exit codes: 0 when every requested artifact was written, 2 for bad input
(config, files, flags), 1 for failures while computing.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .artifacts import FormatError, read_population
from .core import build_eval_matrix, matrix_to_csv, read_matrix_csv
from .experiment import ConfigError, RunConfig, compare_algorithms, run
from .gamescape import (EMBEDDINGS, RANK_TOL, SYNTH_KINDS, SynthSpec, embed, is_redundant,
                        numerical_rank, synth_payoff)
from .games import make_game
from .hodge import hodge_decompose
from .metrics import effective_diversity, relative_performance
from .nash import max_entropy_nash
from .psro import ALGORITHMS
from .validation import check_antisymmetric

log = logging.getLogger("ffgames")


class InputError(Exception):
    pass


def _write(path: Path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_population(path):
    try:
        return read_population(path)
    except (OSError, FormatError, ValueError) as exc:
        raise InputError(f"cannot read population {path}: {exc}") from exc


def _game_for(pop, path):
    try:
        return make_game(pop.game_id, base_dir=Path(path).parent)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot rebuild game {pop.game_id!r}: {exc}") from exc


def cmd_run(args):
    cfg = RunConfig.load(args.config, seed=args.seed)
    out = Path(args.out)
    pop, state, run_log = run(cfg, out)
    print(_dump({"out": str(out), "algorithm": cfg.algorithm, "iterations": state.iteration,
                 "population_size": len(pop), "queries": int(state.queries),
                 "converged_at": run_log.converged_at}), end="")
    return 0


def cmd_experiment(args):
    overrides = {} if args.seed is None else {"seed": args.seed}
    cfg = RunConfig.load(args.config, **overrides)
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    algorithms = raw.get("algorithms", list(ALGORITHMS))
    bad = [a for a in algorithms if a not in ALGORITHMS]
    if bad:
        raise ConfigError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
    seeds = [cfg.seed] if args.seed is not None else raw.get("seeds", [cfg.seed])
    out = Path(args.out)
    rows = ["seed," + ",".join(f"perf_vs_{a}" for a in algorithms if a != "psro_rn")
            + ",perf_vs_self_play_final,hull_nondecreasing"]
    for seed in seeds:
        res = compare_algorithms(RunConfig.from_dict(raw, base_dir=Path(args.config).parent,
                                                     seed=seed),
                                 algorithms, out_dir=out / f"seed_{seed}")
        vals = [format(res.perf[a], ".17g") for a in algorithms if a != "psro_rn"]
        vals.append(format(res.perf.get("self_play_final", float("nan")), ".17g"))
        rows.append(",".join([str(seed), *vals, str(res.hull_nondecreasing()).lower()]))
    _write(out / "performance.csv", "\n".join(rows) + "\n")
    print("\n".join(rows))
    return 0


def cmd_compare(args):
    P = _load_population(args.p)
    Q = _load_population(args.q)
    if P.game_id != Q.game_id:
        raise InputError(f"populations play different games: {P.game_id!r} vs {Q.game_id!r}")
    report = relative_performance(P, Q, _game_for(P, args.p))
    text = report.to_json() + "\n"
    if args.out:
        out = Path(args.out)
        _write(out / "compare.json", text)
        _write(out / "cross.csv", matrix_to_csv(report.cross))
    print(text, end="")
    return 0


def _load_matrix(path):
    path = Path(path)
    try:
        if path.suffix == ".json":
            pop = read_population(path)
            return build_eval_matrix(_game_for(pop, path), pop).entries
        return check_antisymmetric(read_matrix_csv(path))
    except (OSError, FormatError, ValueError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def analyze_matrix(A, embeddings=("schur",), tol=None):
    """Nash, diversity, rank, Hodge norms, embeddings and redundancy of ``A``."""
    nash = max_entropy_nash(A)
    rank_tol = RANK_TOL if tol is None else tol
    report = {
        "n": int(A.shape[0]),
        "nash": [float(x) for x in nash.probs],
        "diversity": effective_diversity(A, nash),
        "rank": numerical_rank(A, rank_tol),
        "hodge": hodge_decompose(A).norms(),
        "redundant": [bool(is_redundant(A, i, 1e-9 if tol is None else tol))
                      for i in range(A.shape[0])] if A.shape[0] > 1 else [False],
        "embeddings": {},
    }
    coords = {}
    for method in embeddings:
        if A.shape[0] < 2:
            report["embeddings"][method] = {"hull_area": 0.0, "recon_error": 0.0}
            continue
        emb = embed(A, method, 2)
        coords[method] = emb.coords
        report["embeddings"][method] = {"hull_area": emb.hull_area(),
                                        "recon_error": float(emb.recon_error)}
    return report, coords


def cmd_analyze(args):
    A = _load_matrix(args.input)
    report, coords = analyze_matrix(A, args.embedding or ["schur"], args.tol)
    text = _dump(report)
    if args.out:
        out = Path(args.out)
        _write(out / "analysis.json", text)
        for method, X in coords.items():
            _write(out / f"embedding_{method}.csv", matrix_to_csv(X))
    print(text, end="")
    return 0


def cmd_synth(args):
    try:
        spec = SynthSpec(args.kind, args.n, args.sigma, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    A = synth_payoff(spec).entries
    out = Path(args.out)
    if out.suffix != ".csv":
        out = out / f"{args.kind}_n{args.n}_seed{args.seed}.csv"
    _write(out, matrix_to_csv(A))
    norms = hodge_decompose(A).norms()
    print(_dump({"out": str(out), "hodge": norms}), end="")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ffgames", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train one algorithm from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="all algorithms at equal budget, perf of psro_rn")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", help="relative performance of two population files")
    p.add_argument("p")
    p.add_argument("q")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("analyze", help="gamescape analysis of a matrix CSV or population file")
    p.add_argument("input")
    p.add_argument("--embedding", action="append", choices=sorted(EMBEDDINGS))
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="synthetic payoff matrix")
    p.add_argument("--kind", choices=SYNTH_KINDS, required=True)
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--sigma", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InputError) as exc:
        print(f"ffgames: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported with a nonzero exit code
        log.debug("failure", exc_info=True)
        print(f"ffgames: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
