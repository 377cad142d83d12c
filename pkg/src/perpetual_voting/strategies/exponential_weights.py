"""The exponential weights voting rule.

Each agent carries a weight ``(1+eps)**d`` where ``d`` is its dissatisfaction
so far. Every round the rule picks the option whose disapprovers carry the
least total weight, which is the option that grows the total weight the
least. Weights are stored as integer exponents and only materialized,
rescaled by the largest one, when masses are needed, so long plays never
overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DegenerateInputError, InputError
from .base import Strategy, argmin_lowest


def epsilon_schedule(params) -> float:
    """``eps = (ln N / T)**(1 - 1/(k+1)) * (1/(C k))**(1/(k+1))``.

    The guarantee is only meaningful when ``C k ln N <= T``; outside that
    regime the value is still returned unclamped.
    """
    if params.C is None or params.C < 1:
        raise InputError(f"epsilon schedule needs a known conflict budget C >= 1, got {params.C!r}")
    if params.N < 2:
        raise DegenerateInputError("epsilon schedule is zero for N = 1 (ln N = 0)")
    k, N, T, C = params.k, params.N, params.T, params.C
    return (math.log(N) / T) ** (1 - 1 / (k + 1)) * (1 / (C * k)) ** (1 / (k + 1))


@dataclass(frozen=True)
class WeightState:
    epsilon: float
    exponents: tuple[int, ...]
    rounds_seen: int = 0

    @classmethod
    def initial(cls, epsilon, N):
        if not epsilon > 0:
            raise InputError(f"epsilon must be positive, got {epsilon!r}")
        return cls(float(epsilon), (0,) * N, 0)

    @property
    def N(self):
        return len(self.exponents)

    @property
    def log_factor(self):
        return math.log1p(self.epsilon)

    def log_weights(self):
        lf = self.log_factor
        return [d * lf for d in self.exponents]

    def weights(self):
        """Absolute weights; may overflow to ``inf`` on very long plays."""
        return [math.exp(x) for x in self.log_weights()]

    def scaled_weights(self):
        """Weights divided by the largest weight, all in (0, 1]."""
        top = max(self.exponents)
        lf = self.log_factor
        return [math.exp((d - top) * lf) for d in self.exponents]

    def log_total(self):
        top = max(self.exponents)
        return top * self.log_factor + math.log(math.fsum(self.scaled_weights()))

    def distribution(self):
        w = self.scaled_weights()
        total = math.fsum(w)
        return [x / total for x in w]

    def disapprover_masses(self, profile, k):
        """Unnormalized (scaled) weight of each option's disapprovers, options 1..k."""
        w = self.scaled_weights()
        return [math.fsum(w[i] for i, s in enumerate(profile.approvals) if option not in s)
                for option in range(1, k + 1)]

    def deltas(self, profile, k):
        """Probability mass of each option's disapprovers under the current distribution."""
        masses = self.disapprover_masses(profile, k)
        total = math.fsum(self.scaled_weights())
        return [m / total for m in masses]


def ew_choose(state: WeightState, profile, k) -> int:
    if profile.N != state.N:
        raise InputError(f"profile has {profile.N} ballots but state tracks {state.N} agents")
    return argmin_lowest(state.disapprover_masses(profile, k))


def ew_update(state: WeightState, profile, chosen) -> WeightState:
    exps = tuple(d if chosen in s else d + 1 for d, s in zip(state.exponents, profile.approvals))
    return WeightState(state.epsilon, exps, state.rounds_seen + 1)


def choose_by_weights(weights, profile, k) -> int:
    """Argmin of disapprover weight for an arbitrary positive weight vector."""
    return argmin_lowest([math.fsum(w for w, s in zip(weights, profile.approvals) if o not in s)
                          for o in range(1, k + 1)])


class ExponentialWeights(Strategy):
    """Exponential weights rule; ``epsilon`` defaults to :func:`epsilon_schedule`.

    A known budget of C = 0 is scheduled as C = 1, and N = 1 uses eps = 1:
    with a single agent every positive eps makes the same decisions.
    """

    name = "exponential_weights"

    def __init__(self, epsilon=None):
        self.fixed_epsilon = epsilon

    def start(self, params):
        super().start(params)
        if self.fixed_epsilon is not None:
            eps = self.fixed_epsilon
        elif params.N == 1:
            eps = 1.0
        else:
            eps = epsilon_schedule(params if params.C else params.with_C(1))
        self.state = WeightState.initial(eps, params.N)
        self.deltas = []

    @property
    def epsilon(self):
        return self.state.epsilon

    def choose(self, profile):
        return ew_choose(self.state, profile, self.params.k)

    def observe(self, profile, decision):
        super().observe(profile, decision)
        self.deltas.append(self.state.deltas(profile, self.params.k)[decision - 1])
        self.state = ew_update(self.state, profile, decision)

    def metadata(self):
        return {"strategy": self.name, "epsilon": self.state.epsilon}
