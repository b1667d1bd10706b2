import numpy as np
import pytest

from metagame_lab.errors import InvalidArgument, ProtocolViolation
from metagame_lab.gamefiles import example41_prior, fig1_prior
from metagame_lab.games import FeedbackRecord, GameMatrix, Prior, pure_strategy
from metagame_lab.learners import LearnerSpec, learner_act, learner_init, learner_observe
from metagame_lab.learners.commitment import epoch_horizon
from metagame_lab.learners.noregret import stationary_distribution
from metagame_lab.StackelbergSolver import perturbed_commitment


def make(kind, role=1, prior=None, signal=0, seed=0, params=None):
    return learner_init(LearnerSpec(kind, params), role, prior or fig1_prior(), signal, np.random.default_rng(seed))


def play(learner, opponent, game, full=True):
    strategy = learner_act(learner)
    own = game.own_matrix(learner.role)
    learner_observe(learner, FeedbackRecord(strategy, opponent if full else None, strategy @ own @ opponent))
    return strategy


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        LearnerSpec('gradient_descent')
    with pytest.raises(InvalidArgument):
        LearnerSpec('multiplicative_weights', {'eta': 0})
    with pytest.raises(InvalidArgument):
        LearnerSpec('bandit_exp3', {'exploration': 1.5})
    with pytest.raises(InvalidArgument):
        LearnerSpec('stackelberg_leader', {'a': 0.5, 'b': 0.6})
    with pytest.raises(InvalidArgument):
        LearnerSpec('constant_action', {'action': 0, 'speed': 1})
    with pytest.raises(InvalidArgument):
        LearnerSpec('mimic_deviation')
    with pytest.raises(InvalidArgument):
        LearnerSpec.from_dict({'params': {}})


def test_spec_dict_form():
    spec = LearnerSpec.mimic(LearnerSpec('stackelberg_leader', {'b': 0.1}), 1)
    assert LearnerSpec.from_dict(spec.to_dict()) == spec
    assert spec.to_dict()['params']['base']['params']['b'] == 0.1
    assert LearnerSpec.from_dict('best_responder').kind == 'best_responder'
    assert spec.label() == 'mimic:G2'
    assert LearnerSpec.constant(1).label(('A', 'B')) == 'const:B'


def test_spec_properties():
    assert LearnerSpec('best_responder').requires_full_information
    assert not LearnerSpec('no_swap_regret_bandit').requires_full_information
    assert LearnerSpec.mimic(LearnerSpec('multiplicative_weights'), 0).requires_full_information
    assert LearnerSpec('reveal_then_follow_leader').allowed_roles == (1,)
    assert LearnerSpec('infer_then_commit_follower').allowed_roles == (2,)


def test_role_restrictions():
    with pytest.raises(InvalidArgument):
        make('reveal_then_follow_leader', role=2)
    with pytest.raises(InvalidArgument):
        make('infer_then_commit_follower', role=1)
    with pytest.raises(InvalidArgument):
        make('constant_action', role=3)
    with pytest.raises(InvalidArgument):
        make('constant_action', params={'action': 2})
    with pytest.raises(InvalidArgument):
        learner_init(LearnerSpec.mimic(LearnerSpec('best_responder'), 5), 1, fig1_prior(), 0,
                     np.random.default_rng(0))


def test_protocol_is_enforced():
    learner = make('constant_action')
    with pytest.raises(ProtocolViolation):
        learner.observe(FeedbackRecord(pure_strategy(0, 2), pure_strategy(0, 2), 0.0))
    learner.act()
    with pytest.raises(ProtocolViolation):
        learner.act()

    responder = make('best_responder')
    x = responder.act()
    with pytest.raises(ProtocolViolation):
        responder.observe(FeedbackRecord(x, None, 1.0))


def test_constant_action():
    learner = make('constant_action', role=2, params={'action': 1})
    g = fig1_prior().games[0]
    for _ in range(5):
        assert np.array_equal(play(learner, pure_strategy(0, 2), g), [0, 1])


def test_multiplicative_weights_starts_uniform():
    learner = make('multiplicative_weights')
    assert np.allclose(learner.act(), [0.5, 0.5])


def test_multiplicative_weights_learns_the_better_action():
    g = fig1_prior().games[0]
    learner = make('multiplicative_weights', role=2)
    for _ in range(2000):
        strategy = play(learner, pure_strategy(0, 2), g)
    assert strategy[0] > 0.99


def test_best_responder():
    g = fig1_prior().games[0]
    learner = make('best_responder', role=2)
    play(learner, pure_strategy(0, 2), g)
    assert np.array_equal(learner.act(), [1, 0])


def test_learners_are_reproducible():
    g = fig1_prior().games[1]
    runs = []
    for _ in range(2):
        learner = make('bandit_exp3', role=1, seed=11)
        runs.append([play(learner, np.array([0.3, 0.7]), g, full=False).tolist() for _ in range(200)])
    assert runs[0] == runs[1]


def test_bandit_learners_emit_pure_strategies():
    g = fig1_prior().games[0]
    for kind in ('bandit_exp3', 'no_swap_regret_bandit'):
        learner = make(kind, role=2, seed=5)
        for _ in range(50):
            strategy = play(learner, pure_strategy(0, 2), g, full=False)
            assert sorted(strategy.tolist()) == [0.0, 1.0]


def test_stationary_distribution():
    Q = np.array([[0.9, 0.1], [0.5, 0.5]])
    p = stationary_distribution(Q)
    assert np.allclose(p, [5 / 6, 1 / 6])
    assert np.allclose(p @ Q, p)


def test_no_swap_regret_full_concentrates_on_the_best_reply():
    g = fig1_prior().games[0]
    learner = make('no_swap_regret_full', role=2)
    mass = [play(learner, pure_strategy(0, 2), g)[0] for _ in range(10000)]
    assert np.mean(mass) >= 0.99


def test_epoch_horizon():
    assert [epoch_horizon(t, 64) for t in (1, 64, 65, 128, 129, 300)] == [64, 64, 128, 128, 256, 512]


def test_stackelberg_leader_follows_the_epoch_schedule():
    tilted = GameMatrix('tilted', [[1, 0], [3, 0]], [[1, 0], [0, 1]])
    learner = make('stackelberg_leader', prior=Prior.single(tilted))
    for t in range(1, 301):
        strategy = play(learner, pure_strategy(0, 2), tilted)
        expected, _ = perturbed_commitment(tilted, 1, epoch_horizon(t, 64) ** -0.25)
        assert np.allclose(strategy, expected), t


def test_stackelberg_leader_commits_per_signal():
    prior = fig1_prior()
    first = make('stackelberg_leader', role=1, signal=0).act()
    assert np.allclose(first, [1, 0])
    second = make('stackelberg_leader', role=2, prior=example41_prior(), signal=1).act()
    assert np.allclose(second, [0, 1])
    assert np.allclose(first, perturbed_commitment(prior.games[0], 1, 64 ** -0.25)[0])


def test_mimic_plays_its_base_with_the_fixed_signal():
    prior = fig1_prior()
    mimic = learner_init(LearnerSpec.mimic(LearnerSpec('stackelberg_leader'), 0), 2, prior, 1,
                         np.random.default_rng(3))
    base = learner_init(LearnerSpec('stackelberg_leader'), 2, prior, 0, np.random.default_rng(3))
    g = prior.games[1]
    for _ in range(200):
        assert np.array_equal(play(mimic, pure_strategy(0, 2), g), play(base, pure_strategy(0, 2), g))


def test_reveal_then_follow_announces_the_game():
    prior = fig1_prior()
    leader = make('reveal_then_follow_leader', signal=1)
    assert np.array_equal(play(leader, pure_strategy(1, 2), prior.games[1]), [0, 1])
    # best response to D in fig1_g2 is B
    assert np.array_equal(leader.act(), [0, 1])

    leader = make('reveal_then_follow_leader', signal=0)
    assert np.array_equal(play(leader, pure_strategy(0, 2), prior.games[0]), [1, 0])
    assert np.array_equal(leader.act(), [1, 0])


def test_infer_then_commit_reads_the_announcement():
    prior = fig1_prior()
    follower = make('infer_then_commit_follower', role=2)
    assert np.array_equal(play(follower, pure_strategy(1, 2), prior.games[1]), [1, 0])
    assert follower.inferred_game == 1
    assert np.allclose(follower.act(), [0, 1])

    follower = make('infer_then_commit_follower', role=2, signal=1)
    play(follower, pure_strategy(0, 2), prior.games[0])
    assert follower.inferred_game == 0
    assert np.allclose(follower.act(), [1, 0])


def test_external_signal_leader_needs_a_source():
    with pytest.raises(InvalidArgument):
        make('external_signal_leader')
