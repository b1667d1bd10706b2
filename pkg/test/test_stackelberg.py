import numpy as np
import pytest

from metagame_lab.errors import AssumptionViolated, InvalidArgument
from metagame_lab.gamefiles import example41_prior, fig1_g1, fig1_g2, fig1_prior
from metagame_lab.games import GameMatrix
from metagame_lab.StackelbergSolver import (best_response_set, commitment_pair, maximin_value,
                                            perturbed_commitment, stackelberg_value, stackval_prior,
                                            weakly_dominated)

A, B = 0, 1
C, D = 0, 1


def test_best_response_set():
    assert best_response_set(fig1_g1(), 2, [1, 0]) == [C]
    assert best_response_set(fig1_g1(), 1, [0.5, 0.5]) == [A]
    # u2 against (1/2, 1/2): C earns 1/2, D earns -15
    assert best_response_set(fig1_g2(), 2, [0.5, 0.5]) == [C]
    assert best_response_set(fig1_g2(), 1, [0.5, 0.5]) == [A, B]
    with pytest.raises(InvalidArgument):
        best_response_set(fig1_g1(), 2, [1, 0], tie_tol=-1)


def test_fig1_leader_two():
    g1 = stackelberg_value(fig1_g1(), 2)
    assert g1.value == pytest.approx(1.0)
    assert g1.follower_action == A
    assert np.allclose(g1.leader_strategy, [1, 0])
    assert g1.per_follower_action_values[B] == -np.inf

    g2 = stackelberg_value(fig1_g2(), 2)
    assert g2.value == pytest.approx(2.0)
    assert g2.follower_action == B
    assert np.allclose(g2.leader_strategy, [0, 1])

    assert stackval_prior(fig1_prior(), 2) == pytest.approx(1.5)


def test_fig1_leader_one():
    assert stackelberg_value(fig1_g1(), 1).value == pytest.approx(16.0)
    g2 = stackelberg_value(fig1_g2(), 1)
    assert g2.value == pytest.approx(1.0)
    assert g2.follower_action == C
    assert np.allclose(g2.leader_strategy, [1, 0])
    assert stackval_prior(fig1_prior(), 1) == pytest.approx(8.5)


def test_example41_leader_two():
    values = [stackelberg_value(g, 2) for g in example41_prior().games]
    assert [v.value for v in values] == pytest.approx([5.0, 8.0])
    assert all(v.follower_action == B for v in values)
    assert all(np.allclose(v.leader_strategy, [0, 1]) for v in values)


def test_single_action_games():
    g = GameMatrix('single', [[3.0]], [[4.0]])
    assert stackelberg_value(g, 1).value == 3.0
    assert stackelberg_value(g, 2).value == 4.0
    assert weakly_dominated(g, 1, 0) == (False, None)


def test_solution_to_dict():
    report = stackelberg_value(fig1_g2(), 2).to_dict(fig1_g2())
    assert report['value'] == pytest.approx(2.0)
    assert report['follower_action'] == 'B'
    assert report['commitment']['D'] == pytest.approx(1.0)
    assert report['per_follower_action_values']['A'] == pytest.approx(1.0)


def test_weak_dominance():
    dominated, witness = weakly_dominated(fig1_g1(), 1, B)
    assert dominated
    assert np.allclose(witness, [1, 0])
    assert weakly_dominated(fig1_g1(), 1, A) == (False, None)
    twins = GameMatrix('twins', [[1, 2], [1, 2]], [[0, 0], [0, 0]])
    assert weakly_dominated(twins, 1, 0)[0]
    # a mixture of two actions can dominate where neither alone does
    mixed = GameMatrix('mixed', [[3, 0], [0, 3], [1, 1]], [[0, 0], [0, 0], [0, 0]])
    dominated, witness = weakly_dominated(mixed, 1, 2)
    assert dominated
    assert np.allclose(witness, [0.5, 0.5, 0])


def test_perturbed_commitment_margins():
    strategy, margin = perturbed_commitment(fig1_g1(), 1, 0.1)
    assert np.allclose(strategy, [1, 0])
    assert margin == pytest.approx(3.3)

    strategy, margin = perturbed_commitment(fig1_g2(), 2, 0.05)
    assert np.allclose(strategy, [0, 1])
    assert margin == pytest.approx(0.005)


def test_delta_one_is_the_margin_strategy():
    tilted = GameMatrix('tilted', [[1, 0], [3, 0]], [[1, 0], [0, 1]])
    pair = commitment_pair(tilted, 1)
    assert np.allclose(pair.x_star, [0.5, 0.5])
    assert np.allclose(pair.x_bar, [1, 0])
    strategy, margin = perturbed_commitment(tilted, 1, 1.0)
    assert np.allclose(strategy, pair.x_bar)
    assert margin == pytest.approx(pair.margin)
    strategy, _ = perturbed_commitment(tilted, 1, 0.2)
    assert np.allclose(strategy, [0.6, 0.4])


def test_weakly_dominated_follower_response_has_no_margin():
    flat = GameMatrix('flat', [[1, 0], [0, 1]], [[1, 1], [1, 1]])
    with pytest.raises(AssumptionViolated):
        perturbed_commitment(flat, 1, 0.1)
    with pytest.raises(InvalidArgument):
        perturbed_commitment(fig1_g1(), 1, 0.0)


def _response_interval(F, y):
    """Range of p for which follower column y is a best response to (p, 1 - p), or None."""
    lo, hi = 0.0, 1.0
    for k in range(F.shape[1]):
        if k == y:
            continue
        b = F[1, y] - F[1, k]
        a = F[0, y] - F[0, k] - b
        if a > 0:
            lo = max(lo, -b / a)
        elif a < 0:
            hi = min(hi, -b / a)
        elif b < 0:
            return None
    return (lo, hi) if lo <= hi else None


def _thin(F):
    intervals = [_response_interval(F, y) for y in range(F.shape[1])]
    return any(iv is not None and iv[1] - iv[0] < 1e-3 for iv in intervals)


def _random_games(seed, count):
    rng = np.random.default_rng(seed)
    games = []
    while len(games) < count:
        k = int(rng.integers(1, 5))
        L = rng.integers(-10, 11, size=(2, k)).astype(float)
        F = rng.integers(-10, 11, size=(2, k)).astype(float)
        if not _thin(F):
            games.append((L, F))
    return games


GRID = np.linspace(0.0, 1.0, 10001)


def _grid_value(L, F):
    X = np.stack([GRID, 1.0 - GRID], axis=1)
    follower = X @ F
    leader = X @ L
    best = follower >= follower.max(axis=1, keepdims=True) - 1e-7
    return np.where(best, leader, -np.inf).max()


@pytest.mark.parametrize("L,F", _random_games(2024, 200))
def test_value_matches_grid_search(L, F):
    solution = stackelberg_value(GameMatrix('grid', L, F), 1)
    assert abs(solution.value - _grid_value(L, F)) <= 2e-3


@pytest.mark.parametrize("seed", range(20))
def test_commitment_beats_maximin(seed):
    rng = np.random.default_rng(seed)
    n1, n2 = rng.integers(1, 5, size=2)
    g = GameMatrix('random', rng.normal(size=(n1, n2)), rng.normal(size=(n1, n2)))
    for leader in (1, 2):
        assert stackelberg_value(g, leader).value >= maximin_value(g, leader) - 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_positive_scaling_preserves_the_solution(seed):
    rng = np.random.default_rng(100 + seed)
    n1, n2 = rng.integers(2, 5, size=2)
    u1, u2 = rng.normal(size=(n1, n2)), rng.normal(size=(n1, n2))
    base = stackelberg_value(GameMatrix('g', u1, u2), 1)
    for scale in (0.5, 3.0):
        scaled = stackelberg_value(GameMatrix('g', scale * u1, u2), 1)
        assert scaled.value == pytest.approx(scale * base.value, rel=1e-9, abs=1e-9)
        assert scaled.follower_action == base.follower_action
        assert np.allclose(scaled.leader_strategy, base.leader_strategy, atol=1e-9)


@pytest.mark.parametrize("seed", range(30))
def test_perturbed_commitment_makes_the_response_unique(seed):
    rng = np.random.default_rng(200 + seed)
    n1, n2 = rng.integers(2, 5, size=2)
    g = GameMatrix('g', rng.normal(size=(n1, n2)), rng.normal(size=(n1, n2)))
    for leader in (1, 2):
        try:
            strategy, margin = perturbed_commitment(g, leader, 0.1)
        except AssumptionViolated:
            continue
        follower_action = stackelberg_value(g, leader).follower_action
        assert best_response_set(g, 3 - leader, strategy, tie_tol=margin / 2) == [follower_action]


def test_maximin():
    # matching pennies guarantees nothing better than zero
    pennies = GameMatrix('pennies', [[1, -1], [-1, 1]], [[-1, 1], [1, -1]])
    assert maximin_value(pennies, 1) == pytest.approx(0.0, abs=1e-12)
    assert maximin_value(fig1_g1(), 1) == pytest.approx(16.0)
