import json
import math

import pytest

from perpetual_voting import (
    GameParams,
    InputError,
    ProtocolError,
    TranscriptParseError,
    compassion_killer_profile,
    conflict_report,
    group_product_profile,
    majority_killer_profile,
    make_adversary,
    run_game,
    warmup_ck_profile,
)
from perpetual_voting.adversaries import (
    AdversarySpec,
    CompassionKiller,
    RandomBallots,
    Scripted,
    dump_scripted,
    parse_scripted,
    scripted_profiles,
)
from perpetual_voting.strategies import STRATEGIES, ApprovalVote, CompassionMonitor, PerpetualEquality, make_strategy

HEURISTICS = [s for s in STRATEGIES if s != "minimax_oracle"]


def test_group_product_first_round():
    prof = group_product_profile(2, 2, 1)
    assert [sorted(s) for s in prof.approvals] == [[2], [1, 2], [1], [1, 2]]


def test_group_product_enumerates_every_selection():
    k, M = 3, 2
    seen = set()
    for r in range(1, M**k + 1):
        prof = group_product_profile(k, M, r)
        picked = tuple(i for i, s in enumerate(prof.approvals, start=1) if len(s) < k)
        assert len(picked) == k
        for g, agent in enumerate(picked, start=1):
            assert (g - 1) * M < agent <= g * M
            assert prof.approvals[agent - 1] == frozenset(range(1, k + 1)) - {g}
        seen.add(picked)
    assert len(seen) == M**k
    with pytest.raises(InputError):
        group_product_profile(2, 2, 5)


@pytest.mark.parametrize("k,M", [(2, 2), (2, 3), (3, 2)])
def test_group_product_play_has_conflict_number_one(k, M):
    adv = make_adversary(f"group_product:M={M}")
    params = adv.fit_params(k=k)
    assert conflict_report(run_game(params, ApprovalVote(), adv)).subset_conflict_number == 1


def test_group_product_k2_m3_floor_for_all_strategies():
    adv = make_adversary("group_product:M=3")
    params = adv.fit_params()
    assert (params.N, params.T) == (6, 9)
    for sid in HEURISTICS:
        assert run_game(params, make_strategy(sid), adv).max_dissatisfaction >= 2


def test_group_product_oblivious():
    adv = make_adversary("group_product:M=3")
    params = adv.fit_params()
    a = run_game(params, ApprovalVote(), adv)
    b = run_game(params, make_strategy("exponential_weights"), adv)
    assert a.profiles == b.profiles


def test_group_product_param_mismatch():
    with pytest.raises(InputError):
        make_adversary("group_product:M=2").fit_params(k=2, N=5)


def test_warmup_profiles():
    assert warmup_ck_profile(2, 4, 3, 8, 4).approvals == (frozenset({1, 2}),) * 4
    assert [sorted(s) for s in warmup_ck_profile(3, 4, 3, 8, 2).approvals] == [[2, 3], [1, 3], [1, 2], [1, 2, 3]]
    with pytest.raises(InputError):
        warmup_ck_profile(3, 2, 3, 8, 1)


@pytest.mark.parametrize("k,N,C", [(2, 4, 2), (2, 4, 7), (3, 5, 6), (1, 2, 4)])
def test_warmup_floor_and_budget(k, N, C):
    adv = make_adversary(f"warmup_ck:C={C}")
    params = GameParams(k, N, 3 * C, C)
    for sid in HEURISTICS:
        play = run_game(params, make_strategy(sid), adv)
        assert play.max_dissatisfaction >= math.ceil(C / k)
        assert conflict_report(play).subset_conflict_number <= C


def test_majority_killer_counts():
    T = 7
    for r in range(1, T + 1):
        prof = majority_killer_profile(T, r)
        counts = prof.approval_counts(2)
        assert counts == [2 * T - 1, 2 * T]
    with pytest.raises(InputError):
        majority_killer_profile(T, 0)


@pytest.mark.parametrize("T", [1, 4, 9])
def test_majority_killer_play(T):
    adv = make_adversary("majority_killer")
    play = run_game(adv.fit_params(T=T), ApprovalVote(), adv)
    assert play.dissatisfaction[2 * T] == T
    assert conflict_report(play).subset_conflict_number == 1


@pytest.mark.parametrize("T", [2, 5, 6, 11])
def test_compassion_killer_beats_compassionate_rules(T):
    adv = make_adversary("compassion_killer")
    params = adv.fit_params(T=T)
    for inner in (PerpetualEquality(), _LowestLeaderFirst()):
        monitor = CompassionMonitor(inner)
        play = run_game(params, monitor, adv)
        assert monitor.violations == []
        assert play.max_dissatisfaction >= T // 2
        assert conflict_report(play).subset_conflict_number == 1


class _LowestLeaderFirst(PerpetualEquality):
    """Compassionate rule distinct from perpetual equality: the unique leader decides, else curry."""

    name = "leader_first"

    def choose(self, profile):
        top = max(self.dissatisfaction)
        leaders = [i for i, d in enumerate(self.dissatisfaction) if d == top]
        if len(leaders) == 1 and profile.approvals[leaders[0]]:
            return max(profile.approvals[leaders[0]])
        return 2


def test_compassion_killer_invariant():
    T = 10
    adv = CompassionKiller()
    params = adv.fit_params(T=T)
    strategy = PerpetualEquality()
    strategy.start(params)
    adv.start(params, None)
    decisions, dissat = [], [0] * T
    for r in range(1, T + 1):
        prof = adv.profile(r, tuple(decisions))
        d = strategy.choose(prof)
        strategy.observe(prof, d)
        decisions.append(d)
        dissat = [x + (d not in s) for x, s in zip(dissat, prof.approvals)]
        if r % 2 == 0:
            g = r // 2
            assert all(dissat[j] == g for j in range(2 * g, T))
            assert max(dissat) == g
            future = [compassion_killer_profile(T, decisions + [1] * extra) for extra in range(T - r)]
            for p in future:
                assert all(p.approvals[j] == frozenset({1, 2}) for j in range(2 * g))


def test_compassion_killer_mirror_branch_and_errors():
    first = compassion_killer_profile(4, [])
    assert [sorted(s) for s in first.approvals] == [[1], [2], [1, 2], [1, 2]]
    pizza = compassion_killer_profile(4, [1])
    assert [sorted(s) for s in pizza.approvals] == [[1, 2], [1], [2], [2]]
    curry = compassion_killer_profile(4, [2])
    assert [sorted(s) for s in curry.approvals] == [[2], [1, 2], [1], [1]]
    with pytest.raises(ProtocolError):
        compassion_killer_profile(4, [1, 3])
    with pytest.raises(ProtocolError):
        compassion_killer_profile(2, [1, 1])


def test_compassion_killer_against_non_compassionate_keeps_budget():
    adv = make_adversary("compassion_killer")
    for T in (3, 8):
        for sid in HEURISTICS:
            play = run_game(adv.fit_params(T=T), make_strategy(sid), adv)
            assert conflict_report(play).subset_conflict_number <= 1


def test_all_approve_budget_zero():
    adv = make_adversary("all_approve")
    play = run_game(GameParams(3, 5, 4), ApprovalVote(), adv)
    assert conflict_report(play).subset_conflict_number == 0 == adv.budget


def test_random_density_one_is_all_approve():
    play = run_game(GameParams(3, 4, 6), ApprovalVote(), RandomBallots(1.0), seed=1)
    assert all(s == frozenset({1, 2, 3}) for p in play.profiles for s in p.approvals)
    with pytest.raises(InputError):
        RandomBallots(1.5)


def test_random_own_seed_overrides_game_seed():
    a = run_game(GameParams(2, 4, 6), ApprovalVote(), RandomBallots(0.5, seed=3), seed=1)
    b = run_game(GameParams(2, 4, 6), ApprovalVote(), RandomBallots(0.5, seed=3), seed=2)
    assert a.profiles == b.profiles


def test_scripted_round_trip(tmp_path):
    adv = make_adversary("compassion_killer")
    play = run_game(adv.fit_params(T=6), PerpetualEquality(), adv)
    path = tmp_path / "script.json"
    path.write_text(dump_scripted(play.profiles))
    replay = run_game(play.params, ApprovalVote(), scripted_profiles(path, k=2))
    assert replay.profiles == play.profiles
    # identical to the transcript's profile serialization
    assert json.loads(path.read_text()) == play.to_dict()["approvals"]


def test_scripted_parse_errors_carry_line_numbers():
    with pytest.raises(TranscriptParseError) as info:
        parse_scripted('[\n[[1],[2]],\n[[1],[2]\n')
    assert info.value.line is not None
    with pytest.raises(TranscriptParseError) as info:
        parse_scripted('[\n[[1],[2]],\n[[1],[2]],\n[[1],["x"]]\n]', k=2)
    assert info.value.line == 4
    with pytest.raises(TranscriptParseError) as info:
        parse_scripted('[\n[[1],[2]],\n[[1]]\n]', k=2)
    assert info.value.line == 3 and "round 2" in str(info.value)
    with pytest.raises(TranscriptParseError):
        parse_scripted('[[[1],[3]]]', k=2)


def test_scripted_infers_k():
    profiles, k = parse_scripted("[[[1],[3]],[[2],[]]]")
    assert k == 3 and len(profiles) == 2
    assert Scripted(profiles).fit_params() == GameParams(3, 2, 2)


def test_spec_parsing():
    spec = AdversarySpec.parse("group_product:M=3")
    assert spec.id == "group_product" and spec.params == {"M": 3}
    assert str(spec) == "group_product:M=3"
    assert AdversarySpec.parse("random:density=0.25,seed=4").params == {"density": 0.25, "seed": 4}
    with pytest.raises(InputError):
        AdversarySpec.parse("nope")
    with pytest.raises(InputError):
        make_adversary("majority_killer:M=2")
    with pytest.raises(InputError):
        make_adversary("group_product")
