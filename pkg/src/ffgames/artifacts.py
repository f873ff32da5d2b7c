"""On-disk formats: population files (JSON) and run logs (JSON lines).

Python's ``json`` writes floats with ``repr``, which round-trips every
finite double exactly, so population files are lossless.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Agent, Population
from .psro import PsroRunLog

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def population_to_dict(pop: Population) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "game_id": pop.game_id,
        "meta": dict(pop.meta),
        "agents": [{"tag": a.tag, "params": [float(x) for x in a.params]} for a in pop],
    }


def population_from_dict(d: dict) -> Population:
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported population format version {version!r}")
    try:
        game_id = d["game_id"]
        agents = tuple(Agent(game_id, np.asarray(a["params"], dtype=float), a.get("tag", ""))
                       for a in d["agents"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed population file: {exc}") from exc
    return Population(game_id, agents, d.get("meta", {}))


def write_population(pop: Population, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(population_to_dict(pop), indent=1, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def read_population(path) -> Population:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc
    return population_from_dict(d)


def write_run_log(run_log: PsroRunLog, path) -> Path:
    path = Path(path)
    path.write_text(run_log.to_jsonl(), encoding="utf-8")
    return path


def read_run_log(path) -> PsroRunLog:
    return PsroRunLog.from_jsonl(Path(path).read_text(encoding="utf-8"))
