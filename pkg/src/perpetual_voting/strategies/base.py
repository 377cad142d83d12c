"""Decision maker protocol and the bookkeeping shared by history-aware rules."""

from __future__ import annotations


class Strategy:
    """A deterministic decision maker.

    ``run_game`` calls :meth:`start` once, then for every round
    :meth:`choose` followed by :meth:`observe` with the decision actually made.
    """

    name = "strategy"

    def start(self, params):
        self.params = params
        self.dissatisfaction = [0] * params.N
        self.satisfied = [0] * params.N

    def choose(self, profile) -> int:
        raise NotImplementedError

    def observe(self, profile, decision):
        for i, s in enumerate(profile.approvals):
            if decision in s:
                self.satisfied[i] += 1
            else:
                self.dissatisfaction[i] += 1

    def metadata(self):
        return {"strategy": self.name}


def argmax_lowest(values):
    """Index (1-based) of the first maximum."""
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best + 1


def argmin_lowest(values):
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    return best + 1
