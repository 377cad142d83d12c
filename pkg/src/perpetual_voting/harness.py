"""Experiment orchestration: single runs, the doubling wrapper, sweeps, bound reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adversaries import AdversarySpec, CompassionKiller, GroupProduct, MajorityKiller, WarmupCK
from .conflicts import conflict_report, default_budget, subset_work, tuple_work
from .errors import DegenerateInputError, InputError, PerpetualVotingError
from .game import GameParams, PlayRecord, coerce_profile, run_game
from .strategies import STRATEGY_IDS, make_strategy
from .strategies.exponential_weights import WeightState, epsilon_schedule, ew_choose, ew_update

log = logging.getLogger(__name__)

LOG_TOL = 1e-9
COMPASSIONATE = {"perpetual_equality"}


def thm2_bound(params):
    """Bare sublinear bound ``T**(1-1/(k+1)) * (C k ln N)**(1/(k+1))``; None if C is unknown."""
    if params.C is None:
        return None
    k, N, T, C = params.k, params.N, params.T, params.C
    return T ** (1 - 1 / (k + 1)) * (C * k * math.log(N)) ** (1 / (k + 1))


def lower_bound_floor(adversary, params, strategy_id):
    """Max dissatisfaction the construction forces on ``strategy_id``, or None if none applies."""
    if isinstance(adversary, GroupProduct):
        return adversary.M ** (params.k - 1) / params.k
    if isinstance(adversary, WarmupCK) and params.N >= params.k:
        return min(adversary.C, params.T) / params.k
    if isinstance(adversary, MajorityKiller) and strategy_id == "approval_vote":
        return float(params.T)
    if isinstance(adversary, CompassionKiller) and strategy_id in COMPASSIONATE:
        return float(params.T // 2)
    return None


# -- weight-sum certificate ----------------------------------------------


@dataclass
class Certificate:
    """Outcome of re-deriving the exponential weights run from a transcript.

    ``ok`` requires, in every round, that the decision attains the minimal
    disapprover mass and that ``D_i ln(1+eps) <= ln N + sum ln(1+eps delta_r)``
    for every agent, both within ``LOG_TOL`` in log space.
    """

    ok: bool
    epsilon: float
    log_rhs: float
    max_lhs: float
    deltas: list
    first_violation: int | None = None
    reason: str | None = None
    weight_sum_error: float = 0.0


def eq1_certificate(play, epsilon, tol=LOG_TOL, check_argmin=True):
    N, k = play.params.N, play.params.k
    state = WeightState.initial(epsilon, N)
    lf = state.log_factor
    rhs = math.log(N)
    D = [0] * N
    deltas = []
    first, reason = None, None
    worst_sum_err = 0.0
    for r, (profile, choice) in enumerate(zip(play.profiles, play.decisions), start=1):
        cand = state.deltas(profile, k)
        delta = cand[choice - 1]
        deltas.append(delta)
        if check_argmin and first is None and delta > min(cand) * (1 + tol) + 1e-300:
            first, reason = r, (f"decision {choice} has disapprover mass {delta:.6g} but option "
                                f"{cand.index(min(cand)) + 1} has {min(cand):.6g}")
        rhs += math.log1p(epsilon * delta)
        state = ew_update(state, profile, choice)
        for i, s in enumerate(profile.approvals):
            if choice not in s:
                D[i] += 1
        lhs = max(D) * lf
        if first is None and lhs > rhs + tol:
            first, reason = r, f"max_i D_i ln(1+eps) = {lhs:.12g} exceeds {rhs:.12g}"
        worst_sum_err = max(worst_sum_err, abs(state.log_total() - rhs) / max(1.0, abs(rhs)))
    if first is None and worst_sum_err > tol:
        first, reason = len(play.decisions), f"weight sum drifted from N prod(1+eps delta_r) by {worst_sum_err:.3g}"
    return Certificate(first is None, epsilon, rhs, max(D) * lf if D else 0.0, deltas, first, reason, worst_sum_err)


def verify_transcript(play, epsilon=None):
    """Certificates for an exponential weights transcript, one per doubling epoch if any."""
    if epsilon is None and play.metadata.get("epochs"):
        return [eq1_certificate(sub, e["epsilon"]) for sub, e in zip(split_epochs(play), play.metadata["epochs"])]
    eps = play.metadata.get("epsilon") if epsilon is None else epsilon
    if eps is None:
        raise InputError("transcript records no epsilon; pass one explicitly")
    return [eq1_certificate(play, float(eps))]


# -- experiments ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    params: GameParams
    strategy: str
    adversary: AdversarySpec
    seed: int = 0
    repeats: int = 1
    output: str | None = None
    strategy_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGY_IDS:
            raise InputError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGY_IDS)}")
        if self.repeats < 1:
            raise InputError("repeats must be >= 1")
        adv = self.adversary.build(self.params.C)
        fitted = adv.fit_params(self.params.k, self.params.N, self.params.T, self.params.C)
        if (fitted.k, fitted.N, fitted.T) != (self.params.k, self.params.N, self.params.T):
            raise InputError(f"adversary {self.adversary} needs k={fitted.k}, N={fitted.N}, T={fitted.T}")

    @classmethod
    def create(cls, strategy, adversary, k=None, N=None, T=None, C=None, **kw):
        """Build a spec, letting the adversary complete the game size it dictates."""
        if isinstance(adversary, str):
            adversary = AdversarySpec.parse(adversary)
        params = adversary.build(C).fit_params(k, N, T, C)
        return cls(params, strategy, adversary, **kw)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        try:
            strategy = data.pop("strategy")
            adversary = data.pop("adversary")
        except KeyError as exc:
            raise InputError(f"experiment config lacks {exc}") from None
        if isinstance(adversary, dict):
            adversary = AdversarySpec(adversary["id"], dict(adversary.get("params", {})))
        sizes = {key: data.pop(key, data.pop(key.lower(), None)) for key in ("k", "N", "T", "C")}
        extra = {key: data.pop(key) for key in ("seed", "repeats", "output", "strategy_params") if key in data}
        if data:
            raise InputError(f"unknown experiment fields: {sorted(data)}")
        return cls.create(strategy, adversary, **sizes, **extra)

    def to_dict(self):
        out = dict(self.params.to_dict(), strategy=self.strategy, adversary=str(self.adversary),
                   seed=self.seed, repeats=self.repeats)
        if self.strategy_params:
            out["strategy_params"] = dict(self.strategy_params)
        return out


@dataclass
class BoundReport:
    thm2_bound: float | None
    eq1_certificate_ok: bool | None
    observed_max_dissatisfaction: int
    lower_bound_floor: float | None
    mean_dissatisfaction: float = 0.0
    conflict_number: int | None = None
    epsilon: float | None = None
    epochs: int | None = None

    @property
    def ratio(self):
        if not self.thm2_bound:
            return None
        return self.observed_max_dissatisfaction / self.thm2_bound

    @property
    def floor_ok(self):
        return self.lower_bound_floor is None or self.observed_max_dissatisfaction >= self.lower_bound_floor

    def to_dict(self):
        d = dict(self.__dict__)
        d["ratio"] = self.ratio
        return d

    def summary(self):
        def fmt(v):
            if v is None:
                return "n/a"
            if isinstance(v, bool):
                return str(v).lower()
            if isinstance(v, float):
                return f"{v:.6g}"
            return str(v)

        return "\n".join([
            f"max_dissat={fmt(self.observed_max_dissatisfaction)}",
            f"mean_dissat={fmt(self.mean_dissatisfaction)}",
            f"thm2_bound={fmt(self.thm2_bound)}",
            f"ratio={fmt(self.ratio)}",
            f"lower_bound_floor={fmt(self.lower_bound_floor)}",
            f"conflict_number={fmt(self.conflict_number)}",
            f"epsilon={fmt(self.epsilon)}",
            f"certificate_ok={fmt(self.eq1_certificate_ok)}",
        ] + ([f"epochs={self.epochs}"] if self.epochs is not None else []))


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    reports: list
    plays: list

    @property
    def report(self):
        """The repeat with the largest observed dissatisfaction."""
        return max(self.reports, key=lambda r: r.observed_max_dissatisfaction)

    @property
    def play(self):
        return self.plays[self.reports.index(self.report)]


def _conflict_number(play, budget=None):
    budget = default_budget() if budget is None else budget
    p = play.params
    if max(subset_work(p.N, p.k, len(play.profiles)), tuple_work(p.N, p.k, len(play.profiles))) > budget:
        return None
    return conflict_report(play, budget).subset_conflict_number


def play_once(spec, seed):
    """One game for ``spec``; exponential weights without a known C go through the doubling runner."""
    params = spec.params
    adversary = spec.adversary.build(params.C)
    epochs = None
    if spec.strategy == "exponential_weights" and params.C is None and not spec.strategy_params.get("epsilon"):
        result = doubling_runner(params, adversary, known_T=True, known_C=False, seed=seed)
        play, epochs = result.play, len(result.epochs)
    else:
        strategy = make_strategy(spec.strategy, **spec.strategy_params)
        play = run_game(params, strategy, adversary, seed)
    return play, adversary, epochs


def bound_report(play, adversary, strategy_id, epochs=None, conflict_budget=None):
    params = play.params
    eps = play.metadata.get("epsilon")
    cert = None
    if strategy_id == "exponential_weights" and eps is not None:
        cert = all(c.ok for c in verify_transcript(play))
    floor = lower_bound_floor(adversary, params, strategy_id)
    bound = thm2_bound(params) if params.N >= 2 else None
    return BoundReport(bound, cert, play.max_dissatisfaction, floor, play.mean_dissatisfaction,
                       _conflict_number(play, conflict_budget), eps, epochs)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run ``spec.repeats`` games (seeds ``seed, seed+1, ...``) and optionally write outputs.

    With ``spec.output`` set, writes ``transcript_<i>.json``/``.csv`` per repeat
    and ``report.json`` into that directory; on failure nothing written by
    this call is left behind.
    """
    reports, plays, written = [], [], []
    try:
        for i in range(spec.repeats):
            play, adversary, epochs = play_once(spec, spec.seed + i)
            reports.append(bound_report(play, adversary, spec.strategy, epochs))
            plays.append(play)
        if spec.output:
            os.makedirs(spec.output, exist_ok=True)
            for i, play in enumerate(plays):
                stem = os.path.join(spec.output, f"transcript_{i}" if spec.repeats > 1 else "transcript")
                written.append(stem + ".json")
                play.save_json(stem + ".json")
                written.append(stem + ".csv")
                with open(stem + ".csv", "w") as fh:
                    fh.write(play.to_csv())
            path = os.path.join(spec.output, "report.json")
            written.append(path)
            with open(path, "w") as fh:
                json.dump({"spec": spec.to_dict(), "reports": [r.to_dict() for r in reports]}, fh,
                          indent=1, sort_keys=True)
                fh.write("\n")
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return ExperimentResult(spec, reports, plays)


# -- doubling trick ---------------------------------------------------------


@dataclass
class DoublingResult:
    play: PlayRecord
    epochs: list

    @property
    def final_bound(self):
        return self.epochs[-1]["bound"]


def split_epochs(play):
    """Sub-plays of a doubling transcript, one per recorded epoch."""
    out = []
    for e in play.metadata["epochs"]:
        lo, hi = e["start"] - 1, e["end"]
        profiles = play.profiles[lo:hi]
        decisions = play.decisions[lo:hi]
        dissat = [0] * play.params.N
        for p, d in zip(profiles, decisions):
            for i, s in enumerate(p.approvals):
                if d not in s:
                    dissat[i] += 1
        params = GameParams(play.params.k, play.params.N, hi - lo, e["C_guess"])
        out.append(PlayRecord(params, profiles, decisions, dissat, {"epsilon": e["epsilon"]}))
    return out


def doubling_runner(params, adversary, known_T=True, known_C=False, seed=0, initial_T=1):
    """Exponential weights with guesses for unknown C and/or T, doubled on each reset.

    An epoch ends when its own max dissatisfaction exceeds the bound
    expression at the current guesses (unknown C), or when it has lasted as
    many rounds as the current T guess (unknown T). Weights restart at 1 each
    epoch; dissatisfaction accumulates over the whole play.
    """
    if params.N < 2:
        raise DegenerateInputError("doubling runner needs N >= 2")
    k, N, T = params.k, params.N, params.T
    if known_C and params.C is None:
        raise InputError("known_C requires params.C")
    C_guess = max(params.C, 1) if known_C else 1
    T_guess = T if known_T else initial_T

    rng = np.random.default_rng(seed)
    adversary.start(params, rng)
    profiles, decisions = [], []
    total = [0] * N
    epochs = []

    def begin(start):
        guess = GameParams(k, N, T_guess, C_guess)
        return {"start": start, "end": None, "C_guess": C_guess, "T_guess": T_guess,
                "epsilon": epsilon_schedule(guess), "bound": thm2_bound(guess)}, [0] * N

    epoch, local = begin(1)
    state = WeightState.initial(epoch["epsilon"], N)
    for r in range(1, T + 1):
        profile = coerce_profile(adversary.profile(r, tuple(decisions)), r, params)
        choice = ew_choose(state, profile, k)
        state = ew_update(state, profile, choice)
        for i, s in enumerate(profile.approvals):
            if choice not in s:
                total[i] += 1
                local[i] += 1
        profiles.append(profile)
        decisions.append(choice)
        reset = False
        if not known_C and max(local) > epoch["bound"]:
            C_guess *= 2
            reset = True
        if not known_T and r - epoch["start"] + 1 >= T_guess:
            T_guess *= 2
            reset = True
        if reset and r < T:
            epoch["end"], epoch["max_dissat"] = r, max(local)
            epochs.append(epoch)
            log.debug("doubling reset after round %d: C_guess=%d T_guess=%d", r, C_guess, T_guess)
            epoch, local = begin(r + 1)
            state = WeightState.initial(epoch["epsilon"], N)
    epoch["end"], epoch["max_dissat"] = T, max(local)
    epochs.append(epoch)
    meta = {"strategy": "exponential_weights", "doubling": True, "seed": seed, "epochs": epochs,
            "epsilon": epochs[0]["epsilon"]}
    meta.update(adversary.metadata())
    play = PlayRecord(params, profiles, decisions, total, meta)
    return DoublingResult(play, epochs)


# -- sweeps -----------------------------------------------------------------

SWEEP_COLUMNS = ["k", "N", "T", "C", "strategy", "adversary", "seed", "max_dissat", "mean_dissat",
                 "thm2_bound", "ratio", "conflict_number", "certificate_ok", "error"]


def _sweep_row(spec):
    row = {"k": spec.params.k, "N": spec.params.N, "T": spec.params.T, "C": spec.params.C,
           "strategy": spec.strategy, "adversary": str(spec.adversary), "seed": spec.seed}
    try:
        rep = run_experiment(spec).report
    except PerpetualVotingError as exc:
        row["error"] = str(exc)
        return row
    row.update(max_dissat=rep.observed_max_dissatisfaction, mean_dissat=rep.mean_dissatisfaction,
               thm2_bound=rep.thm2_bound, ratio=rep.ratio, conflict_number=rep.conflict_number,
               certificate_ok=rep.eq1_certificate_ok)
    return row


def sweep_rows(specs, workers=1):
    specs = list(specs)
    if workers and workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, specs))
    return [_sweep_row(s) for s in specs]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def sweep(specs, workers=1):
    """CSV table with one row per spec, in input order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in sweep_rows(specs, workers):
        w.writerow([_cell(row.get(c)) for c in SWEEP_COLUMNS])
    return buf.getvalue()
