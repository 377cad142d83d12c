"""Subset and tuple conflict analysis of plays.

A set of at most k agents is *in conflict* in a round when no option is
approved by all of them. An ordered k-tuple ``(a_1, .., a_k)`` is in conflict
when ``a_i`` disapproves option ``i`` for every position ``i``; the set
underlying a conflicting tuple is always a conflicting subset, so the tuple
conflict number never exceeds the subset conflict number.

Exact enumeration costs ``sum_{s<=k} C(N, s) * T`` subset checks and
``N**k * T`` tuple checks. :func:`conflict_report` refuses, rather than
truncates, when either count exceeds the budget (default ``10**8``, override
with the ``PERPETUAL_CONFLICT_BUDGET`` environment variable).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ResourceError

DEFAULT_BUDGET = 10**8
BUDGET_ENV = "PERPETUAL_CONFLICT_BUDGET"


def default_budget():
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(float(raw))
    except ValueError:
        raise InputError(f"{BUDGET_ENV}={raw!r} is not a number") from None


@dataclass(frozen=True)
class ConflictReport:
    subset_conflict_number: int
    tuple_conflict_number: int
    witness_subset: tuple[int, ...] | None
    witness_tuple: tuple[int, ...] | None
    max_subset_size: int

    def to_dict(self):
        return {
            "subset_conflict_number": self.subset_conflict_number,
            "tuple_conflict_number": self.tuple_conflict_number,
            "witness_subset": None if self.witness_subset is None else list(self.witness_subset),
            "witness_tuple": None if self.witness_tuple is None else list(self.witness_tuple),
            "max_subset_size": self.max_subset_size,
        }


def _check_agents(agents, N):
    for a in agents:
        if not isinstance(a, (int, np.integer)) or not 1 <= a <= N:
            raise InputError(f"agent id {a!r} outside 1..{N}")


def is_subset_in_conflict(profile, agents) -> bool:
    agents = list(agents)
    if not agents:
        raise InputError("agent subset must be non-empty")
    _check_agents(agents, profile.N)
    common = None
    for a in agents:
        s = profile.approvals[a - 1]
        common = set(s) if common is None else common & s
        if not common:
            return True
    return False


def is_tuple_in_conflict(profile, agents, k) -> bool:
    agents = list(agents)
    if len(agents) != k:
        raise InputError(f"tuple must have exactly k={k} entries, got {len(agents)}")
    _check_agents(agents, profile.N)
    return all(option not in profile.approvals[a - 1] for option, a in enumerate(agents, start=1))


def subset_work(N, k, T, max_size=None):
    s_max = min(k if max_size is None else max_size, N)
    return sum(math.comb(N, s) for s in range(1, s_max + 1)) * T


def tuple_work(N, k, T):
    return N**k * T


def _mask_matrix(play):
    return np.array([p.masks() for p in play.profiles], dtype=np.int64).reshape(len(play.profiles), play.params.N)


def subset_conflict_counts(play, max_size=None):
    """Yield ``(subset, count)`` for every subset of size 1..min(k, N), lexicographically by size."""
    k, N = play.params.k, play.params.N
    s_max = min(k if max_size is None else max_size, N)
    masks = _mask_matrix(play)
    for s in range(1, s_max + 1):
        for head in itertools.combinations(range(N), s - 1):
            start = head[-1] + 1 if head else 0
            if start >= N:
                continue
            acc = np.bitwise_and.reduce(masks[:, list(head)], axis=1) if head else np.full(len(masks), -1, np.int64)
            counts = np.count_nonzero((acc[:, None] & masks[:, start:]) == 0, axis=0)
            for offset, c in enumerate(counts):
                yield tuple(a + 1 for a in head) + (start + offset + 1,), int(c)


def tuple_conflict_counts(play):
    """Array of shape ``(N,)*k``: entry ``[a_1-1, .., a_k-1]`` counts conflict rounds of that tuple."""
    k, N = play.params.k, play.params.N
    masks = _mask_matrix(play)
    # dis[o][r, a] = 1 when agent a disapproves option o+1 in round r
    dis = [((masks >> o) & 1 == 0).astype(np.int64) for o in range(k)]
    if k == 1:
        return dis[0].sum(axis=0)
    out = np.empty((N,) * k, dtype=np.int64)
    letters = "abcdefghijklmnopqrstuvwxy"[: k - 1]
    expr = ",".join(f"r{c}" for c in letters) + "->" + letters
    for a in range(N):
        w = dis[0][:, a]
        rest = [dis[1] * w[:, None]] + dis[2:]
        out[a] = np.einsum(expr, *rest)
    return out


def conflict_report(play, budget=None, max_subset_size=None) -> ConflictReport:
    """Exact subset and tuple conflict numbers of ``play``, with maximizing witnesses.

    ``max_subset_size`` restricts the subset enumeration (default k); the
    tuple conflict number is always over ordered k-tuples.
    """
    k, N, T = play.params.k, play.params.N, len(play.profiles)
    budget = default_budget() if budget is None else budget
    work = subset_work(N, k, T, max_subset_size)
    if work > budget:
        raise ResourceError("subset conflict enumeration too large", work, budget)
    work = tuple_work(N, k, T)
    if work > budget:
        raise ResourceError("tuple conflict enumeration N**k * T too large", work, budget)

    best, witness = 0, None
    for subset, c in subset_conflict_counts(play, max_subset_size):
        if c > best:
            best, witness = c, subset
    if T == 0:
        return ConflictReport(0, 0, None, None, min(k if max_subset_size is None else max_subset_size, N))
    counts = tuple_conflict_counts(play)
    flat = int(np.argmax(counts))
    tbest = int(counts.flat[flat])
    twitness = tuple(int(i) + 1 for i in np.unravel_index(flat, counts.shape)) if tbest > 0 else None
    return ConflictReport(best, tbest, witness, twitness,
                          min(k if max_subset_size is None else max_subset_size, N))
