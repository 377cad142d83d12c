import itertools
import random

import pytest

from perpetual_voting.game import ApprovalProfile, GameParams, PlayRecord, recompute_dissatisfaction


def random_play(rng: random.Random, N, k, T, density=0.6, decide="random"):
    """A play with independent random ballots and random (or fixed first) decisions."""
    profiles = []
    for r in range(1, T + 1):
        profiles.append(ApprovalProfile.of(r, [[o for o in range(1, k + 1) if rng.random() < density]
                                               for _ in range(N)]))
    decisions = [rng.randint(1, k) if decide == "random" else 1 for _ in range(T)]
    return PlayRecord(GameParams(k, N, T), profiles, decisions, recompute_dissatisfaction(profiles, decisions))


def naive_conflicts(play, max_size=None):
    """Double loop over subsets/tuples and rounds, with no shared code."""
    k, N = play.params.k, play.params.N
    s_max = min(k if max_size is None else max_size, N)
    best_subset = 0
    for s in range(1, s_max + 1):
        for sub in itertools.combinations(range(1, N + 1), s):
            count = 0
            for p in play.profiles:
                if not any(all(o in p.approvals[a - 1] for a in sub) for o in range(1, k + 1)):
                    count += 1
            best_subset = max(best_subset, count)
    best_tuple = 0
    for tup in itertools.product(range(1, N + 1), repeat=k):
        count = 0
        for p in play.profiles:
            if all(i not in p.approvals[a - 1] for i, a in enumerate(tup, start=1)):
                count += 1
        best_tuple = max(best_tuple, count)
    return best_subset, best_tuple


@pytest.fixture
def rng():
    return random.Random(20261014)
