"""Decision maker strategies, selectable by id."""

from ..errors import InputError
from .base import Strategy
from .baselines import (
    ApprovalVote,
    CompassionMonitor,
    HarmonicWinWeights,
    PerpetualEquality,
    approval_vote_choose,
    harmonic_win_weights_choose,
    is_compassionate_violation,
    perpetual_equality_choose,
)
from .exponential_weights import (
    ExponentialWeights,
    WeightState,
    choose_by_weights,
    epsilon_schedule,
    ew_choose,
    ew_update,
)
from .minimax import MinimaxAdversary, MinimaxOracle, MinimaxSolution, minimax_solve, worst_case_play

STRATEGIES = {
    "exponential_weights": ExponentialWeights,
    "approval_vote": ApprovalVote,
    "perpetual_equality": PerpetualEquality,
    "harmonic_win_weights": HarmonicWinWeights,
    "minimax_oracle": MinimaxOracle,
}

STRATEGY_IDS = tuple(STRATEGIES)


def make_strategy(strategy_id, **kwargs):
    try:
        cls = STRATEGIES[strategy_id]
    except KeyError:
        raise InputError(f"unknown strategy {strategy_id!r}; choose from {', '.join(STRATEGY_IDS)}") from None
    return cls(**kwargs)


__all__ = [
    "STRATEGIES", "STRATEGY_IDS", "make_strategy", "Strategy",
    "ApprovalVote", "PerpetualEquality", "HarmonicWinWeights", "CompassionMonitor",
    "ExponentialWeights", "WeightState", "MinimaxOracle", "MinimaxAdversary", "MinimaxSolution",
    "approval_vote_choose", "perpetual_equality_choose", "harmonic_win_weights_choose",
    "is_compassionate_violation", "epsilon_schedule", "ew_choose", "ew_update", "choose_by_weights",
    "minimax_solve", "worst_case_play",
]
