"""Functional-form games, Nash solving, PSRO training and gamescape analytics."""

from .core import (Agent, EvalConfig, EvalMatrix, Population, antisymmetrize, build_eval_matrix,
                   cross_matrix, extend_eval_matrix)
from .games import (GameDefinition, blotto_game, disc_game, elo_game, long_cycle_matrix,
                    lotto_game, make_game, rps_embedding, symplectic_game, transitive_game)
from .gamescape import (Embedding, PCAEmbedding, SchurEmbedding, SVDEmbedding, SynthSpec, embed,
                        hull_area_2d, is_redundant, numerical_rank, schur_embedding, synth_payoff)
from .hodge import HodgeParts, hodge_decompose
from .metrics import (diversity_l11, effective_diversity, nash_reweight, relative_performance,
                      rps_reduce)
from .nash import (NashMixture, NashSolverError, max_entropy_nash, solve_symmetric_nash,
                   solve_zero_sum, verify_nash)
from .oracles import MixtureObjective, Oracle, OracleBudget, mixture_objective
from .psro import PSRO, PsroRunLog, initial_population, self_play, train

__version__ = "0.1.0"

__all__ = [
    "Agent", "EvalConfig", "EvalMatrix", "Population", "antisymmetrize", "build_eval_matrix",
    "cross_matrix", "extend_eval_matrix",
    "GameDefinition", "blotto_game", "disc_game", "elo_game", "long_cycle_matrix", "lotto_game",
    "make_game", "rps_embedding", "symplectic_game", "transitive_game",
    "Embedding", "PCAEmbedding", "SchurEmbedding", "SVDEmbedding", "SynthSpec", "embed",
    "hull_area_2d", "is_redundant", "numerical_rank", "schur_embedding", "synth_payoff",
    "HodgeParts", "hodge_decompose",
    "diversity_l11", "effective_diversity", "nash_reweight", "relative_performance", "rps_reduce",
    "NashMixture", "NashSolverError", "max_entropy_nash", "solve_symmetric_nash",
    "solve_zero_sum", "verify_nash",
    "MixtureObjective", "Oracle", "OracleBudget", "mixture_objective",
    "PSRO", "PsroRunLog", "initial_population", "self_play", "train",
]
