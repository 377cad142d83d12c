"""Adversaries: the lower-bound constructions plus scripted and random ballots.

Every adversary exposes ``start(params, rng)`` and ``profile(r, decisions)``,
where ``decisions`` holds the decision maker's choices in rounds 1..r-1.
Constructions advertise the conflict number they are built to respect in
``budget`` (``None`` when nothing is promised), and complete partially given
game sizes through ``fit_params``.

In the two-option constructions option 1 is "pizza" and option 2 "curry".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import InputError, ProtocolError, TranscriptParseError
from .game import ApprovalProfile, GameParams, profiles_from_lists, profiles_to_lists

PIZZA, CURRY = 1, 2
BOTH = frozenset({PIZZA, CURRY})


# -- profile constructors -----------------------------------------------


def group_product_profile(k, M, r) -> ApprovalProfile:
    """Round ``r`` of the k-groups-of-M construction.

    ``r - 1`` written in base M gives one digit per group (group 1 is the
    most significant digit); in group i the selected agent approves
    everything except option i. Group i holds agents ``(i-1)M+1 .. iM``.
    """
    T = M**k
    if not 1 <= r <= T:
        raise InputError(f"round {r} outside 1..{T} for k={k}, M={M}")
    everything = frozenset(range(1, k + 1))
    approvals = [everything] * (k * M)
    rest = r - 1
    digits = []
    for _ in range(k):
        digits.append(rest % M)
        rest //= M
    digits.reverse()
    for i, c in enumerate(digits, start=1):
        approvals[(i - 1) * M + c] = everything - {i}
    return ApprovalProfile(r, tuple(approvals))


def warmup_ck_profile(k, N, C, T, r) -> ApprovalProfile:
    """For the first C rounds agent j (j <= k) disapproves option j; otherwise all approve all."""
    if N < k:
        raise InputError(f"warm-up construction needs N >= k, got N={N}, k={k}")
    if not 1 <= r <= T:
        raise InputError(f"round {r} outside 1..{T}")
    everything = frozenset(range(1, k + 1))
    approvals = [everything] * N
    if r <= C:
        for j in range(1, k + 1):
            approvals[j - 1] = everything - {j}
    return ApprovalProfile(r, tuple(approvals))


def majority_killer_profile(T, r) -> ApprovalProfile:
    """N = 2T+1: agent 2T+1 wants pizza, agents 2r-1 and 2r want curry, the rest both."""
    if not 1 <= r <= T:
        raise InputError(f"round {r} outside 1..{T}")
    approvals = [BOTH] * (2 * T + 1)
    approvals[2 * T] = frozenset({PIZZA})
    approvals[2 * r - 2] = approvals[2 * r - 1] = frozenset({CURRY})
    return ApprovalProfile(r, tuple(approvals))


def compassion_killer_profile(T, decisions) -> ApprovalProfile:
    """Next profile of the adaptive two-round gadget against compassionate rules (N = T).

    Gadget g uses agents a = 2g+1 and b = 2g+2. Its first round pits a
    (pizza only) against b (curry only). In its second round whichever of
    them was just dissatisfied approves only the option that was chosen, the
    satisfied one becomes indifferent, and every agent after b approves only
    the other option. Indifferent agents, and agents whose gadget has
    not started, approve both. An odd T ends with one all-approve round.
    """
    decisions = list(decisions)
    r = len(decisions) + 1
    if r > T:
        raise ProtocolError(f"compassion killer has only {T} rounds", r)
    for i, d in enumerate(decisions, start=1):
        if d not in (PIZZA, CURRY):
            raise ProtocolError(f"history holds decision {d!r}, expected 1 or 2", i)
    N = T
    approvals = [BOTH] * N
    if r > 2 * (T // 2):
        return ApprovalProfile(r, tuple(approvals))
    g = (r - 1) // 2
    a, b = 2 * g, 2 * g + 1  # 0-based
    if r % 2 == 1:
        approvals[a] = frozenset({PIZZA})
        approvals[b] = frozenset({CURRY})
    else:
        last = decisions[-1]
        loser = b if last == PIZZA else a
        approvals[loser] = frozenset({last})
        for j in range(b + 1, N):
            approvals[j] = frozenset({CURRY if last == PIZZA else PIZZA})
    return ApprovalProfile(r, tuple(approvals))


# -- adversary objects --------------------------------------------------


class Adversary:
    name = "adversary"
    budget: int | None = None
    oblivious = True

    def fit_params(self, k=None, N=None, T=None, C=None) -> GameParams:
        return GameParams(_need(k, "k"), _need(N, "N"), _need(T, "T"), C)

    def start(self, params, rng):
        self.params = params
        self.rng = rng

    def profile(self, r, decisions):
        raise NotImplementedError

    def options(self):
        return {}

    def metadata(self):
        meta = {"adversary": self.name}
        meta.update(self.options())
        return meta


def _need(value, name):
    if value is None:
        raise InputError(f"{name} must be given for this adversary")
    return value


def _agree(name, given, derived):
    if given is not None and given != derived:
        raise InputError(f"{name}={given} inconsistent with adversary (requires {name}={derived})")
    return derived


class GroupProduct(Adversary):
    name = "group_product"
    budget = 1

    def __init__(self, M):
        self.M = int(M)
        if self.M < 1:
            raise InputError(f"group_product needs M >= 1, got {M}")

    def fit_params(self, k=None, N=None, T=None, C=None):
        k = 2 if k is None else k
        N = _agree("N", N, k * self.M)
        T = _agree("T", T, self.M**k)
        return GameParams(k, N, T, self.budget if C is None else C)

    def start(self, params, rng):
        self.fit_params(params.k, params.N, params.T, params.C)
        super().start(params, rng)

    def profile(self, r, decisions):
        return group_product_profile(self.params.k, self.M, r)

    def options(self):
        return {"M": self.M}


class WarmupCK(Adversary):
    name = "warmup_ck"

    def __init__(self, C=None):
        self.C = None if C is None else int(C)

    @property
    def budget(self):
        return self.C

    def fit_params(self, k=None, N=None, T=None, C=None):
        if self.C is None:
            self.C = _need(C, "C")
        k = 2 if k is None else k
        N = k if N is None else N
        if N < k:
            raise InputError(f"warm-up construction needs N >= k, got N={N}, k={k}")
        T = self.C if T is None else T
        return GameParams(k, N, T, self.C if C is None else C)

    def start(self, params, rng):
        if self.C is None:
            self.C = _need(params.C, "C")
        if params.N < params.k:
            raise InputError(f"warm-up construction needs N >= k, got N={params.N}, k={params.k}")
        super().start(params, rng)

    def profile(self, r, decisions):
        p = self.params
        return warmup_ck_profile(p.k, p.N, self.C, p.T, r)

    def options(self):
        return {"C": self.C}


class MajorityKiller(Adversary):
    name = "majority_killer"
    budget = 1

    def fit_params(self, k=None, N=None, T=None, C=None):
        T = _need(T, "T")
        return GameParams(_agree("k", k, 2), _agree("N", N, 2 * T + 1), T, self.budget if C is None else C)

    def start(self, params, rng):
        self.fit_params(params.k, params.N, params.T)
        super().start(params, rng)

    def profile(self, r, decisions):
        return majority_killer_profile(self.params.T, r)


class CompassionKiller(Adversary):
    name = "compassion_killer"
    budget = 1
    oblivious = False

    def fit_params(self, k=None, N=None, T=None, C=None):
        T = _need(T, "T")
        return GameParams(_agree("k", k, 2), _agree("N", N, T), T, self.budget if C is None else C)

    def start(self, params, rng):
        self.fit_params(params.k, params.N, params.T)
        super().start(params, rng)

    def profile(self, r, decisions):
        if len(decisions) != r - 1:
            raise ProtocolError(f"expected {r - 1} past decisions, got {len(decisions)}", r)
        return compassion_killer_profile(self.params.T, decisions)


class AllApprove(Adversary):
    name = "all_approve"
    budget = 0

    def fit_params(self, k=None, N=None, T=None, C=None):
        return GameParams(_need(k, "k"), _need(N, "N"), _need(T, "T"), 0 if C is None else C)

    def profile(self, r, decisions):
        return ApprovalProfile.full(r, self.params.k, self.params.N)


class Scripted(Adversary):
    """Replays stored profiles verbatim."""

    name = "scripted"

    def __init__(self, profiles, k=None, path=None):
        self.profiles = list(profiles)
        if not self.profiles:
            raise InputError("scripted adversary needs at least one round")
        self.N = self.profiles[0].N
        top = max((max(s) for p in self.profiles for s in p.approvals if s), default=1)
        self.k = top if k is None else k
        self.path = path

    def fit_params(self, k=None, N=None, T=None, C=None):
        k = self.k if k is None else k
        if k < self.k:
            raise InputError(f"script uses option {self.k} but k={k}")
        return GameParams(k, _agree("N", N, self.N), _agree("T", T, len(self.profiles)), C)

    def start(self, params, rng):
        if params.T > len(self.profiles):
            raise InputError(f"script holds {len(self.profiles)} rounds, game needs {params.T}")
        super().start(params, rng)

    def profile(self, r, decisions):
        return ApprovalProfile(r, self.profiles[r - 1].approvals)

    def options(self):
        return {} if self.path is None else {"path": str(self.path)}


class RandomBallots(Adversary):
    """Every (agent, option, round) approval is an independent coin of the given density."""

    name = "random"

    def __init__(self, density=0.5, seed=None):
        density = float(density)
        if not 0.0 <= density <= 1.0:
            raise InputError(f"density must lie in [0, 1], got {density}")
        self.density = density
        self.seed = None if seed is None else int(seed)

    def start(self, params, rng):
        import numpy as np

        super().start(params, rng if self.seed is None else np.random.default_rng(self.seed))

    def profile(self, r, decisions):
        k, N = self.params.k, self.params.N
        coins = self.rng.random((N, k)) < self.density
        return ApprovalProfile(r, tuple(frozenset(o + 1 for o in range(k) if coins[i, o]) for i in range(N)))

    def options(self):
        opts = {"density": self.density}
        if self.seed is not None:
            opts["seed"] = self.seed
        return opts


# -- scripted files -----------------------------------------------------


def _round_lines(text):
    """1-based line on which each top-level round array starts."""
    lines, depth, line = [], 0, 1
    for ch in text:
        if ch == "\n":
            line += 1
        elif ch == "[":
            depth += 1
            if depth == 2:
                lines.append(line)
        elif ch == "]":
            depth -= 1
    return lines


def parse_scripted(text, k=None, source="<script>"):
    """Parse the scripted format: a JSON array of rounds, each an array of N option arrays."""
    try:
        rounds = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TranscriptParseError(exc.msg, line=exc.lineno, path=source) from exc
    if not isinstance(rounds, list) or not rounds:
        raise TranscriptParseError("expected a non-empty JSON array of rounds", line=1, path=source)
    starts = _round_lines(text)
    if not all(isinstance(b, list) for b in rounds):
        bad = next(i for i, b in enumerate(rounds) if not isinstance(b, list))
        raise TranscriptParseError(f"round {bad + 1} is not an array", path=source)
    N = len(rounds[0])
    if k is None:
        k = max([o for b in rounds for s in b if isinstance(s, list) for o in s if isinstance(o, int)] or [1])
    for r, ballots in enumerate(rounds, start=1):
        where = starts[r - 1] if r - 1 < len(starts) else None
        try:
            profiles_from_lists([ballots], k, N, source)
        except TranscriptParseError as exc:
            raise TranscriptParseError(f"round {r}: {str(exc).split(': ', 2)[-1]}", line=where, path=source) from exc
    return profiles_from_lists(rounds, k, N, source), k


def scripted_profiles(path, k=None) -> Scripted:
    with open(path) as fh:
        text = fh.read()
    profiles, k = parse_scripted(text, k, str(path))
    return Scripted(profiles, k=k, path=path)


def dump_scripted(profiles):
    """Serialize profiles in the scripted format, one round per line."""
    rows = [json.dumps(r) for r in profiles_to_lists(profiles)]
    return "[\n" + ",\n".join(rows) + "\n]\n"


def random_profiles(density, seed=None) -> RandomBallots:
    return RandomBallots(density, seed)


# -- specs --------------------------------------------------------------

ADVERSARY_IDS = ("group_product", "warmup_ck", "majority_killer", "compassion_killer",
                 "all_approve", "scripted", "random")


@dataclass(frozen=True)
class AdversarySpec:
    id: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.id not in ADVERSARY_IDS:
            raise InputError(f"unknown adversary {self.id!r}; choose from {', '.join(ADVERSARY_IDS)}")

    @classmethod
    def parse(cls, text):
        """Parse ``id`` or ``id:key=value,key=value`` (e.g. ``group_product:M=2``)."""
        name, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            key, sep, value = item.partition("=")
            if not sep:
                raise InputError(f"adversary parameter {item!r} is not key=value")
            params[key.strip()] = _scalar(value.strip())
        return cls(name.strip(), params)

    def __str__(self):
        if not self.params:
            return self.id
        return self.id + ":" + ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))

    def build(self, C=None):
        p = dict(self.params)
        if self.id == "group_product":
            adv = GroupProduct(_need(p.pop("M", None), "M"))
        elif self.id == "warmup_ck":
            adv = WarmupCK(p.pop("C", C))
        elif self.id == "majority_killer":
            adv = MajorityKiller()
        elif self.id == "compassion_killer":
            adv = CompassionKiller()
        elif self.id == "all_approve":
            adv = AllApprove()
        elif self.id == "scripted":
            adv = scripted_profiles(_need(p.pop("path", None), "path"), p.pop("k", None))
        else:
            adv = RandomBallots(p.pop("density", 0.5), p.pop("seed", None))
        if p:
            raise InputError(f"unexpected parameters for {self.id}: {sorted(p)}")
        return adv


def _scalar(value):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def make_adversary(spec, C=None):
    if isinstance(spec, str):
        spec = AdversarySpec.parse(spec)
    return spec.build(C)
