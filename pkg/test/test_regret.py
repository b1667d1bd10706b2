import numpy as np
import pytest

from metagame_lab.errors import InvalidArgument
from metagame_lab.gamefiles import fig1_g1, fig1_g2
from metagame_lab.games import GameMatrix, Trajectory
from metagame_lab.learners import external_regret, swap_regret
from metagame_lab.learners.regret import regret_curves

A, B = [1.0, 0.0], [0.0, 1.0]
C, D = [1.0, 0.0], [0.0, 1.0]


def test_two_round_example():
    traj = Trajectory([A, A], [C, D], 0, (0, 0))
    g = fig1_g1()
    assert external_regret(traj, g, 2) == pytest.approx(33.0)
    report = swap_regret(traj, g, 2)
    assert report.swap_regret == pytest.approx(33.0)
    assert report.swap_targets == {0: 0, 1: 0}
    assert report.to_dict(('C', 'D'))['swap_targets'] == {'C': 'C', 'D': 'C'}
    # player 1 played A, which was optimal both times
    assert external_regret(traj, g, 1) == 0.0


def test_best_responding_has_no_swap_regret():
    g = fig1_g2()
    traj = Trajectory([A, B, A], [C, D, C], 1, (1, 1))
    # switching beats any fixed action, so external regret goes negative
    assert external_regret(traj, g, 1) == pytest.approx(-0.1)
    assert swap_regret(traj, g, 1).swap_regret == pytest.approx(0.0)


def test_trajectory_must_fit_the_game():
    traj = Trajectory([[1.0, 0.0, 0.0]], [C], 0, (0, 0))
    with pytest.raises(InvalidArgument):
        external_regret(traj, fig1_g1(), 1)


def random_trajectory(rng, T, n1, n2):
    xs = rng.dirichlet(np.ones(n1), size=T)
    ys = rng.dirichlet(np.ones(n2), size=T)
    return Trajectory(xs, ys, 0, (0, 0))


@pytest.mark.parametrize("seed", range(100))
def test_swap_regret_dominates_external_regret(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = rng.integers(2, 5, size=2)
    g = GameMatrix('random', rng.normal(size=(n1, n2)), rng.normal(size=(n1, n2)))
    traj = random_trajectory(rng, int(rng.integers(1, 50)), n1, n2)
    for player in (1, 2):
        report = swap_regret(traj, g, player)
        assert report.swap_regret >= report.external_regret - 1e-9
        assert report.swap_regret >= -1e-12


def test_curves_end_at_the_full_regret():
    rng = np.random.default_rng(0)
    g = fig1_g2()
    traj = random_trajectory(rng, 40, 2, 2)
    external, swap = regret_curves(traj, g, 2, [1, 10, 40])
    assert external[-1] == pytest.approx(external_regret(traj, g, 2))
    assert swap[-1] == pytest.approx(swap_regret(traj, g, 2).swap_regret)
    prefix = Trajectory(traj.xs[:10], traj.ys[:10], 0, (0, 0))
    assert external[1] == pytest.approx(external_regret(prefix, g, 2))
    with pytest.raises(InvalidArgument):
        regret_curves(traj, g, 2, [41])

