"""History-light baseline rules and the compassion monitor."""

from __future__ import annotations

from fractions import Fraction

from .base import Strategy, argmax_lowest


def approval_vote_choose(profile, k) -> int:
    """Most approved option this round, ignoring history; ties to the lowest index."""
    return argmax_lowest(profile.approval_counts(k))


def perpetual_equality_choose(profile, dissatisfaction, k) -> int:
    """Approval vote restricted to the currently most dissatisfied agents."""
    top = max(dissatisfaction)
    counts = [0] * k
    for d, s in zip(dissatisfaction, profile.approvals):
        if d == top:
            for o in s:
                counts[o - 1] += 1
    return argmax_lowest(counts)


def harmonic_win_weights_choose(profile, satisfied_counts, k) -> int:
    """Option maximizing the sum of ``1/(1+s)`` over its approvers, in exact rationals."""
    score = [Fraction(0)] * k
    for s_i, approved in zip(satisfied_counts, profile.approvals):
        w = Fraction(1, 1 + s_i)
        for o in approved:
            score[o - 1] += w
    return argmax_lowest(score)


def is_compassionate_violation(profile, dissatisfaction, chosen) -> bool:
    """True when a unique most-dissatisfied agent approves something but not ``chosen``."""
    top = max(dissatisfaction)
    leaders = [i for i, d in enumerate(dissatisfaction) if d == top]
    if len(leaders) != 1:
        return False
    approved = profile.approvals[leaders[0]]
    return bool(approved) and chosen not in approved


class ApprovalVote(Strategy):
    name = "approval_vote"

    def choose(self, profile):
        return approval_vote_choose(profile, self.params.k)


class PerpetualEquality(Strategy):
    name = "perpetual_equality"

    def choose(self, profile):
        return perpetual_equality_choose(profile, self.dissatisfaction, self.params.k)


class HarmonicWinWeights(Strategy):
    name = "harmonic_win_weights"

    def choose(self, profile):
        return harmonic_win_weights_choose(profile, self.satisfied, self.params.k)


class CompassionMonitor:
    """Wraps a strategy and records every round where it acts uncompassionately."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.violations = []

    def start(self, params):
        self.inner.start(params)
        self._dissat = [0] * params.N
        self._round = 0

    def choose(self, profile):
        return self.inner.choose(profile)

    def observe(self, profile, decision):
        self._round += 1
        if is_compassionate_violation(profile, self._dissat, decision):
            self.violations.append(self._round)
        for i, s in enumerate(profile.approvals):
            if decision not in s:
                self._dissat[i] += 1
        self.inner.observe(profile, decision)

    def metadata(self):
        meta = dict(self.inner.metadata())
        meta["compassion_violations"] = list(self.violations)
        return meta
