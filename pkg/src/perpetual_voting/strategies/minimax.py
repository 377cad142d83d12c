"""Exact solution of tiny C-conflict games by exhaustive search.

A position is summarized by the number of rounds played, the dissatisfaction
vector and, for every subset of at most k agents, how many of its C allowed
conflict rounds have been used. The value of a position is the worst final
``max_i D_i`` the adversary can force against the best decision maker.
Positions are memoized, so the cost is governed by the number of distinct
positions times ``(2**k)**N`` profiles per round.
"""

from __future__ import annotations

import copy
import itertools
import json

from ..errors import ResourceError
from ..game import ApprovalProfile, PlayRecord, recompute_dissatisfaction
from .base import Strategy

DEFAULT_LIMITS = {"max_N": 3, "max_k": 2, "max_T": 4}


def _check_limits(params, limits):
    lim = dict(DEFAULT_LIMITS)
    lim.update(limits or {})
    for key, value, name in (("max_N", params.N, "N"), ("max_k", params.k, "k"), ("max_T", params.T, "T")):
        if value > lim[key]:
            raise ResourceError(f"minimax solver limited to {name} <= {lim[key]}", value, lim[key])


class GameTables:
    """Enumerated profiles of a (k, N) game with their conflict and dissatisfaction vectors."""

    def __init__(self, params):
        k, N = params.k, params.N
        self.params = params
        self.budget = params.T if params.C is None else params.C
        self.subsets = [c for s in range(1, min(k, N) + 1) for c in itertools.combinations(range(N), s)]
        full = (1 << k) - 1
        self.profiles = list(itertools.product(range(full + 1), repeat=N))
        self.conflicts = []
        for masks in self.profiles:
            row = []
            for sub in self.subsets:
                acc = full
                for a in sub:
                    acc &= masks[a]
                row.append(1 if acc == 0 else 0)
            self.conflicts.append(tuple(row))
        self.hits = [[tuple(0 if (m >> (o - 1)) & 1 else 1 for m in masks) for o in range(1, k + 1)]
                     for masks in self.profiles]

    def legal(self, used, p):
        return all(u + c <= self.budget for u, c in zip(used, self.conflicts[p]))

    def use(self, used, p):
        return tuple(min(u + c, self.budget) for u, c in zip(used, self.conflicts[p]))

    def hit(self, D, p, option):
        return tuple(d + h for d, h in zip(D, self.hits[p][option - 1]))

    def index_of(self, profile):
        index = 0
        for m in profile.masks():
            index = index * (1 << self.params.k) + m
        return index

    def profile_at(self, p, round_index):
        k = self.params.k
        return ApprovalProfile.of(round_index, [[o for o in range(1, k + 1) if (m >> (o - 1)) & 1]
                                                for m in self.profiles[p]])


class MinimaxSolution:
    """Solved game: value, optimal decision maker and a worst-case adversary."""

    def __init__(self, params, limits=None):
        _check_limits(params, limits)
        self.params = params
        self.tables = GameTables(params)
        self.budget = self.tables.budget
        self.subsets = self.tables.subsets
        self.profiles = self.tables.profiles
        self._value = {}
        self._reply = {}
        self.value = self.position_value(0, (0,) * params.N, (0,) * len(self.subsets))

    # -- search --------------------------------------------------------

    def _legal(self, used, p):
        return self.tables.legal(used, p)

    def _advance(self, used, D, p, option):
        return self.tables.hit(D, p, option), self.tables.use(used, p)

    def reply(self, r, D, used, p):
        """Optimal option (lowest index among ties) and its value for profile ``p`` at a position."""
        key = (r, D, used, p)
        hit = self._reply.get(key)
        if hit is not None:
            return hit
        best = None
        for option in range(1, self.params.k + 1):
            nd, nu = self._advance(used, D, p, option)
            v = self.position_value(r + 1, nd, nu)
            if best is None or v < best[1]:
                best = (option, v)
        self._reply[key] = best
        return best

    def position_value(self, r, D, used):
        key = (r, D, used)
        if key in self._value:
            return self._value[key][0]
        if r == self.params.T:
            self._value[key] = (max(D), None)
            return max(D)
        ceiling = max(D) + self.params.T - r
        best, arg = -1, None
        for p in range(len(self.profiles)):
            if not self._legal(used, p):
                continue
            v = self.reply(r, D, used, p)[1]
            if v > best:
                best, arg = v, p
                if best == ceiling:
                    break
        self._value[key] = (best, arg)
        return best

    def adversary_move(self, r, D, used):
        self.position_value(r, D, used)
        return self._value[(r, D, used)][1]

    # -- history interface ---------------------------------------------

    def position_from_history(self, profiles, decisions):
        N = self.params.N
        D, used = (0,) * N, (0,) * len(self.subsets)
        for prof, d in zip(profiles, decisions):
            D, used = self._advance(used, D, self.profile_index(prof), d)
        return len(decisions), D, used

    def profile_index(self, profile):
        return self.tables.index_of(profile)

    def profile_at(self, p, round_index):
        return self.tables.profile_at(p, round_index)

    def policy(self, profiles, decisions, profile):
        """Optimal option given the observed transcript and the current profile."""
        r, D, used = self.position_from_history(profiles, decisions)
        return self.reply(r, D, used, self.profile_index(profile))[0]

    def decision_table(self):
        """Optimal decisions at every position reachable by legal adversary play against this solution."""
        rows, frontier, seen = [], [(0, (0,) * self.params.N, (0,) * len(self.subsets))], set()
        while frontier:
            r, D, used = frontier.pop()
            if (r, D, used) in seen or r == self.params.T:
                continue
            seen.add((r, D, used))
            for p in range(len(self.profiles)):
                if not self._legal(used, p):
                    continue
                option, v = self.reply(r, D, used, p)
                rows.append({"round": r + 1, "dissatisfaction": list(D), "conflicts_used": list(used),
                             "profile": self.profile_at(p, r + 1).to_lists(), "option": option, "value": v})
                nd, nu = self._advance(used, D, p, option)
                frontier.append((r + 1, nd, nu))
        rows.sort(key=lambda row: (row["round"], row["dissatisfaction"], row["conflicts_used"], row["profile"]))
        return rows

    def to_json(self, indent=None):
        return json.dumps({
            "params": self.params.to_dict(),
            "value": self.value,
            "subsets": [[a + 1 for a in s] for s in self.subsets],
            "table": self.decision_table(),
        }, indent=indent)


_CACHE = {}


def minimax_solve(params, limits=None):
    """Return ``(value, solution)``; ``solution.policy`` is an optimal decision function."""
    key = (params, tuple(sorted((limits or {}).items())))
    sol = _CACHE.get(key)
    if sol is None:
        sol = _CACHE[key] = MinimaxSolution(params, limits)
    return sol.value, sol


class MinimaxOracle(Strategy):
    """Decision maker that plays the exact minimax policy (toy sizes only)."""

    name = "minimax_oracle"

    def __init__(self, limits=None):
        self.limits = limits

    def start(self, params):
        super().start(params)
        _, self.solution = minimax_solve(params, self.limits)
        self._profiles, self._decisions = [], []

    def choose(self, profile):
        return self.solution.policy(self._profiles, self._decisions, profile)

    def observe(self, profile, decision):
        super().observe(profile, decision)
        self._profiles.append(profile)
        self._decisions.append(decision)

    def __deepcopy__(self, memo):
        # the solved game is immutable once built; share it between copies
        new = copy.copy(self)
        for attr in ("dissatisfaction", "satisfied", "_profiles", "_decisions"):
            if hasattr(self, attr):
                setattr(new, attr, list(getattr(self, attr)))
        return new

    def metadata(self):
        return {"strategy": self.name, "minimax_value": self.solution.value}


class MinimaxAdversary:
    """The adversary half of a solved game: always plays a value-maximizing profile."""

    name = "minimax"

    def __init__(self, solution):
        self.solution = solution
        self.budget = solution.budget

    def start(self, params, rng):
        if params != self.solution.params:
            raise ValueError("minimax adversary solved for different parameters")
        self._profiles = []

    def profile(self, r, decisions):
        sol = self.solution
        pos = sol.position_from_history(self._profiles, decisions)
        p = sol.adversary_move(*pos)
        prof = sol.profile_at(p, r)
        self._profiles.append(prof)
        return prof

    def metadata(self):
        return {"adversary": self.name}


def worst_case_play(params, strategy, max_leaves=10**6, limits=None):
    """Exhaustive best response to a deterministic ``strategy`` under the C budget.

    Returns ``(value, PlayRecord)`` for a play attaining the adversary's
    maximum of ``max_i D_i``. ``strategy`` is deep-copied at every branch.
    """
    _check_limits(params, limits)
    tables = GameTables(params)
    per_round = len(tables.profiles)
    if per_round ** params.T > max_leaves:
        raise ResourceError("best-response search too large", per_round ** params.T, max_leaves)
    strategy = copy.deepcopy(strategy)
    strategy.start(params)
    best = {"value": -1, "profiles": None, "decisions": None}

    def dfs(strat, used, profiles, decisions):
        r = len(decisions)
        if r == params.T:
            D = recompute_dissatisfaction(profiles, decisions) if profiles else [0] * params.N
            v = max(D)
            if v > best["value"]:
                best.update(value=v, profiles=list(profiles), decisions=list(decisions))
            return
        for p in range(len(tables.profiles)):
            if not tables.legal(used, p):
                continue
            prof = tables.profile_at(p, r + 1)
            branch = copy.deepcopy(strat)
            choice = branch.choose(prof)
            branch.observe(prof, choice)
            dfs(branch, tables.use(used, p), profiles + [prof], decisions + [choice])

    dfs(strategy, (0,) * len(tables.subsets), [], [])
    D = recompute_dissatisfaction(best["profiles"], best["decisions"])
    return best["value"], PlayRecord(params, best["profiles"], best["decisions"], D,
                                     {"strategy": strategy.name, "adversary": "best_response"})
