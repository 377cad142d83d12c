"""Domain types and the round-by-round game loop.

Agents, options and rounds are all 1-based. An option index carries no
identity across rounds: option 1 in round 3 and option 1 in round 4 may be
entirely different alternatives.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ProtocolError, TranscriptParseError


@dataclass(frozen=True)
class GameParams:
    """Size of a perpetual voting game.

    ``C`` is the conflict budget the adversary promises to respect; ``None``
    means it is unknown (or the adversary is unconstrained).
    """

    k: int
    N: int
    T: int
    C: int | None = None

    def __post_init__(self):
        for name in ("k", "N", "T"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise InputError(f"{name} must be an integer >= 1, got {value!r}")
        if self.C is not None and (not isinstance(self.C, (int, np.integer)) or self.C < 0):
            raise InputError(f"C must be a non-negative integer or None, got {self.C!r}")

    def with_C(self, C):
        return GameParams(self.k, self.N, self.T, C)

    def to_dict(self):
        return {"k": int(self.k), "N": int(self.N), "T": int(self.T),
                "C": None if self.C is None else int(self.C)}


@dataclass(frozen=True)
class ApprovalProfile:
    """The ballots of one round: ``approvals[i-1]`` is the set approved by agent i."""

    round_index: int
    approvals: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "approvals", tuple(frozenset(int(o) for o in s) for s in self.approvals))

    @classmethod
    def of(cls, round_index, approvals: Iterable[Iterable[int]]):
        return cls(round_index, tuple(frozenset(s) for s in approvals))

    @classmethod
    def full(cls, round_index, k, N):
        everything = frozenset(range(1, k + 1))
        return cls(round_index, (everything,) * N)

    @property
    def N(self):
        return len(self.approvals)

    def validate(self, k, N):
        """Raise :class:`InputError` unless this is a well-formed profile for (k, N)."""
        if len(self.approvals) != N:
            raise InputError(f"profile has {len(self.approvals)} ballots, expected {N}")
        for agent, approved in enumerate(self.approvals, start=1):
            bad = [o for o in approved if not 1 <= o <= k]
            if bad:
                raise InputError(f"agent {agent} approves options {sorted(bad)} outside 1..{k}")

    def approves(self, agent, option):
        return option in self.approvals[agent - 1]

    def disapprovers(self, option):
        """Agents (1-based) whose ballot does not contain ``option``."""
        return [i for i, s in enumerate(self.approvals, start=1) if option not in s]

    def approval_counts(self, k):
        counts = [0] * k
        for s in self.approvals:
            for o in s:
                counts[o - 1] += 1
        return counts

    def masks(self):
        """Ballots as integer bitmasks, bit ``o-1`` set when option ``o`` is approved."""
        out = []
        for s in self.approvals:
            m = 0
            for o in s:
                m |= 1 << (o - 1)
            out.append(m)
        return out

    def to_lists(self):
        return [sorted(s) for s in self.approvals]


@dataclass(frozen=True)
class PlayRecord:
    """Full transcript of one play."""

    params: GameParams
    profiles: tuple[ApprovalProfile, ...]
    decisions: tuple[int, ...]
    dissatisfaction: tuple[int, ...]
    metadata: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        object.__setattr__(self, "decisions", tuple(int(d) for d in self.decisions))
        object.__setattr__(self, "dissatisfaction", tuple(int(d) for d in self.dissatisfaction))
        object.__setattr__(self, "metadata", dict(self.metadata))
        if len(self.profiles) != len(self.decisions):
            raise InputError("profiles and decisions differ in length")
        if len(self.dissatisfaction) != self.params.N:
            raise InputError("dissatisfaction vector must have N entries")

    @property
    def max_dissatisfaction(self):
        return max(self.dissatisfaction)

    @property
    def mean_dissatisfaction(self):
        return sum(self.dissatisfaction) / len(self.dissatisfaction)

    def satisfied_flags(self):
        """Per round, a list of booleans telling whether each agent was satisfied."""
        return [[d in s for s in p.approvals] for p, d in zip(self.profiles, self.decisions)]

    # -- serialization -------------------------------------------------

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "approvals": profiles_to_lists(self.profiles),
            "decisions": list(self.decisions),
            "dissatisfaction": list(self.dissatisfaction),
            "metadata": _jsonable(self.metadata),
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data, source="<transcript>"):
        try:
            p = data["params"]
            params = GameParams(p["k"], p["N"], p["T"], p.get("C"))
            profiles = profiles_from_lists(data["approvals"], params.k, params.N, source)
            decisions = [int(d) for d in data["decisions"]]
            stored = data.get("dissatisfaction")
        except (KeyError, TypeError) as exc:
            raise TranscriptParseError(f"missing or malformed field {exc}", path=source) from exc
        for r, d in enumerate(decisions, start=1):
            if not 1 <= d <= params.k:
                raise TranscriptParseError(f"round {r}: decision {d} outside 1..{params.k}", path=source)
        dissat = recompute_dissatisfaction(profiles, decisions)
        if stored is not None and list(stored) != list(dissat):
            raise TranscriptParseError("stored dissatisfaction disagrees with profiles/decisions", path=source)
        return cls(params, profiles, decisions, dissat, data.get("metadata") or {})

    @classmethod
    def from_json(cls, text, source="<transcript>"):
        return cls.from_dict(_loads(text, source), source)

    def save_json(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json(indent=1))
            fh.write("\n")

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read(), str(path))

    def to_csv(self):
        """Flat CSV: ``round, decision, sat_1 .. sat_N`` with 0/1 flags."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "decision"] + [f"sat_{i}" for i in range(1, self.params.N + 1)])
        for r, (flags, d) in enumerate(zip(self.satisfied_flags(), self.decisions), start=1):
            w.writerow([r, d] + [int(f) for f in flags])
        return buf.getvalue()


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _loads(text, source):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise TranscriptParseError(exc.msg, line=exc.lineno, path=source) from exc


def profiles_to_lists(profiles: Sequence[ApprovalProfile]):
    return [p.to_lists() for p in profiles]


def profiles_from_lists(rounds, k, N, source="<profiles>"):
    """Parse the rounds array shared by transcripts and scripted adversaries."""
    if not isinstance(rounds, list):
        raise TranscriptParseError("expected a JSON array of rounds", path=source)
    out = []
    for r, ballots in enumerate(rounds, start=1):
        if not isinstance(ballots, list) or not all(isinstance(b, list) for b in ballots):
            raise TranscriptParseError(f"round {r}: expected an array of {N} arrays", path=source)
        try:
            profile = ApprovalProfile.of(r, ballots)
            profile.validate(k, N)
        except (InputError, TypeError, ValueError) as exc:
            raise TranscriptParseError(f"round {r}: {exc}", path=source) from exc
        out.append(profile)
    return out


def recompute_dissatisfaction(profiles: Sequence[ApprovalProfile], decisions: Sequence[int]):
    """Count, per agent, the rounds whose decision the agent did not approve."""
    if len(profiles) != len(decisions):
        raise InputError(f"{len(profiles)} profiles but {len(decisions)} decisions")
    if not profiles:
        return []
    counts = [0] * profiles[0].N
    for p, d in zip(profiles, decisions):
        if p.N != len(counts):
            raise InputError(f"round {p.round_index} has {p.N} ballots, expected {len(counts)}")
        for i, s in enumerate(p.approvals):
            if d not in s:
                counts[i] += 1
    return counts


def run_game(params: GameParams, strategy, adversary, seed=0) -> PlayRecord:
    """Play ``params.T`` rounds between ``adversary`` and ``strategy``.

    In round r the adversary sees decisions 1..r-1 and emits profile r; the
    decision maker then sees profile r and picks an option.
    """
    rng = np.random.default_rng(seed)
    strategy.start(params)
    adversary.start(params, rng)
    profiles, decisions = [], []
    dissat = [0] * params.N
    for r in range(1, params.T + 1):
        raw = adversary.profile(r, tuple(decisions))
        profile = coerce_profile(raw, r, params)
        choice = strategy.choose(profile)
        if not isinstance(choice, (int, np.integer)) or not 1 <= choice <= params.k:
            raise ProtocolError(f"decision maker chose {choice!r}, not an option in 1..{params.k}", r)
        choice = int(choice)
        strategy.observe(profile, choice)
        for i, s in enumerate(profile.approvals):
            if choice not in s:
                dissat[i] += 1
        profiles.append(profile)
        decisions.append(choice)
    meta = {"seed": seed}
    meta.update(getattr(adversary, "metadata", dict)())
    meta.update(strategy.metadata())
    return PlayRecord(params, profiles, decisions, dissat, meta)


def coerce_profile(raw, r, params):
    try:
        if isinstance(raw, ApprovalProfile):
            profile = raw if raw.round_index == r else ApprovalProfile(r, raw.approvals)
        else:
            profile = ApprovalProfile.of(r, raw)
        profile.validate(params.k, params.N)
    except (InputError, TypeError, ValueError) as exc:
        raise ProtocolError(f"adversary emitted a malformed profile: {exc}", r) from exc
    return profile
