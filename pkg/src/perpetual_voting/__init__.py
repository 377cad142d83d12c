"""Perpetual approval voting under bounded conflicts.

Simulation engine for the repeated approval game between a decision maker
and an adversary: exponential weights and baseline rules, lower-bound
adversary constructions, exact conflict analysis and a toy-scale minimax
solver.
"""

from .adversaries import (
    AdversarySpec,
    compassion_killer_profile,
    group_product_profile,
    make_adversary,
    majority_killer_profile,
    random_profiles,
    scripted_profiles,
    warmup_ck_profile,
)
from .conflicts import ConflictReport, conflict_report, is_subset_in_conflict, is_tuple_in_conflict
from .errors import (
    DegenerateInputError,
    InputError,
    PerpetualVotingError,
    ProtocolError,
    ResourceError,
    TranscriptParseError,
)
from .game import ApprovalProfile, GameParams, PlayRecord, recompute_dissatisfaction, run_game
from .harness import (
    BoundReport,
    ExperimentSpec,
    doubling_runner,
    eq1_certificate,
    run_experiment,
    sweep,
    thm2_bound,
)
from .strategies import make_strategy, minimax_solve

__version__ = "0.1.0"
