import json

import pytest

from perpetual_voting import (
    ApprovalProfile,
    GameParams,
    InputError,
    PlayRecord,
    ProtocolError,
    make_adversary,
    recompute_dissatisfaction,
    run_game,
)
from perpetual_voting.adversaries import AllApprove, RandomBallots
from perpetual_voting.strategies import ApprovalVote, ExponentialWeights, PerpetualEquality

from conftest import random_play


@pytest.mark.parametrize("kw", [dict(k=0, N=1, T=1), dict(k=1, N=0, T=1), dict(k=2, N=2, T=0),
                                dict(k=2, N=2, T=2, C=-1), dict(k=True, N=2, T=2)])
def test_params_invariants(kw):
    with pytest.raises(InputError):
        GameParams(**kw)


def test_params_unknown_C_allowed():
    assert GameParams(2, 3, 4).C is None


def test_profile_validation():
    ApprovalProfile.of(1, [[], [1, 2]]).validate(2, 2)
    with pytest.raises(InputError):
        ApprovalProfile.of(1, [[3]]).validate(2, 1)
    with pytest.raises(InputError):
        ApprovalProfile.of(1, [[1]]).validate(2, 2)


def test_recompute_dissatisfaction_examples():
    full = [ApprovalProfile.full(r, 2, 3) for r in (1, 2, 3)]
    assert recompute_dissatisfaction(full, [1, 2, 1]) == [0, 0, 0]
    empty_one = [ApprovalProfile.of(r, [[1, 2], [], [1]]) for r in (1, 2, 3)]
    assert recompute_dissatisfaction(empty_one, [1, 1, 2]) == [0, 3, 1]
    with pytest.raises(InputError):
        recompute_dissatisfaction(full, [1])


def test_run_game_all_approve_zero():
    play = run_game(GameParams(3, 5, 7, 0), ExponentialWeights(), AllApprove())
    assert play.dissatisfaction == (0,) * 5


def test_run_game_majority_killer_exact():
    play = run_game(GameParams(2, 11, 5, 1), ApprovalVote(), make_adversary("majority_killer"))
    assert play.dissatisfaction[-1] == 5


def test_compassionate_play_dissatisfaction():
    play = run_game(GameParams(2, 4, 4, 1), PerpetualEquality(), make_adversary("compassion_killer"))
    assert max(recompute_dissatisfaction(play.profiles, play.decisions)) >= 2


def test_stored_dissatisfaction_matches_recompute(rng):
    for seed in range(20):
        params = GameParams(rng.randint(1, 3), rng.randint(1, 6), rng.randint(1, 12))
        play = run_game(params, ExponentialWeights(epsilon=0.3), RandomBallots(0.5), seed=seed)
        assert list(play.dissatisfaction) == recompute_dissatisfaction(play.profiles, play.decisions)
        assert all(0 <= d <= params.T for d in play.dissatisfaction)


def test_replay_deterministic():
    params = GameParams(3, 6, 30, 2)
    a = run_game(params, ExponentialWeights(), RandomBallots(0.7), seed=5)
    b = run_game(params, ExponentialWeights(), RandomBallots(0.7), seed=5)
    assert a == b and a.to_json() == b.to_json()
    c = run_game(params, ExponentialWeights(), RandomBallots(0.7), seed=6)
    assert c.profiles != a.profiles


class _Broken:
    def __init__(self, bad_round, payload):
        self.bad_round, self.payload = bad_round, payload

    def start(self, params, rng):
        self.params = params

    def profile(self, r, decisions):
        if r == self.bad_round:
            return self.payload
        return ApprovalProfile.full(r, self.params.k, self.params.N)


@pytest.mark.parametrize("payload", [[[1]], [[1], [5]], [[1], None]])
def test_malformed_profile_names_round(payload):
    with pytest.raises(ProtocolError) as info:
        run_game(GameParams(2, 2, 4), ApprovalVote(), _Broken(3, payload))
    assert info.value.round_index == 3
    assert "round 3" in str(info.value)


def test_adversary_sees_decisions_before_emitting():
    seen = []

    class Spy(_Broken):
        def profile(self, r, decisions):
            seen.append(tuple(decisions))
            return ApprovalProfile.of(r, [[2], [2]])

    run_game(GameParams(2, 2, 3), ApprovalVote(), Spy(0, None))
    assert seen == [(), (2,), (2, 2)]


def test_json_round_trip(rng):
    play = random_play(rng, 4, 3, 6)
    again = PlayRecord.from_json(play.to_json())
    assert again == play
    data = json.loads(play.to_json())
    assert data["approvals"][0] == [sorted(s) for s in play.profiles[0].approvals]


def test_csv_layout():
    play = run_game(GameParams(2, 3, 2), ApprovalVote(),
                    make_adversary("scripted:path=" + _script([[[1], [2], []], [[1, 2], [1], [2]]])))
    lines = play.to_csv().splitlines()
    assert lines[0] == "round,decision,sat_1,sat_2,sat_3"
    assert lines[1] == "1,1,1,0,0"
    assert lines[2] == "2,1,1,1,0"


def _script(rounds):
    import tempfile

    fh = tempfile.NamedTemporaryFile("w", suffix=".json", delete=False)
    json.dump(rounds, fh)
    fh.close()
    return fh.name


def test_transcript_rejects_inconsistent_dissatisfaction(rng):
    from perpetual_voting import TranscriptParseError

    data = random_play(rng, 3, 2, 4).to_dict()
    data["dissatisfaction"][0] += 1
    with pytest.raises(TranscriptParseError):
        PlayRecord.from_dict(data)
