"""
Best responses, optimistic Stackelberg values, weak dominance and the
perturbed commitments that make a follower's Stackelberg response strictly
unique. Every problem is reduced to a small LP solved by simplex.lp_solve.
"""
from collections import namedtuple
import math

import numpy as np
from tornado.log import app_log

from .errors import AssumptionViolated, InvalidArgument
from .games import mixed_strategy
from .simplex import OPTIMAL, LinearProgram, lp_solve

DEFAULT_TIE_TOL = 1e-7
DOMINANCE_TOL = 1e-9
MARGIN_TOL = 1e-12
VALUE_TIE_TOL = 1e-9

CommitmentPair = namedtuple('CommitmentPair', ['x_star', 'x_bar', 'margin', 'follower_action'])


def _leader_view(g, leader):
    """Leader and follower utilities, both with rows = leader actions, columns = follower actions."""
    if leader not in (1, 2):
        raise InvalidArgument("leader must be 1 or 2, got %r" % (leader,))
    return g.own_matrix(leader), g.own_matrix(3 - leader).T


def _simplex_vector(z):
    z = np.clip(np.asarray(z, dtype=float), 0.0, None)
    return mixed_strategy(z / z.sum())


class StackelbergSolution:
    def __init__(self, value, leader_strategy, follower_action, per_follower_action_values, leader):
        self.value = float(value)
        self.leader_strategy = leader_strategy
        self.follower_action = int(follower_action)
        self.per_follower_action_values = np.asarray(per_follower_action_values, dtype=float)
        self.leader = leader

    def to_dict(self, game):
        follower = 3 - self.leader
        return {
            'game': game.name,
            'leader': self.leader,
            'value': self.value,
            'commitment': dict(zip(game.labels(self.leader), self.leader_strategy.tolist())),
            'follower_action': game.labels(follower)[self.follower_action],
            'per_follower_action_values': {
                label: (value if np.isfinite(value) else None)
                for label, value in zip(game.labels(follower), self.per_follower_action_values.tolist())
            },
        }

    def __repr__(self):
        return 'StackelbergSolution(value=%.6g, follower_action=%d)' % (self.value, self.follower_action)


def best_response_set(g, responder, opponent, tie_tol=DEFAULT_TIE_TOL):
    """
    All of `responder`'s pure actions within tie_tol of the best expected utility
    against the opponent's mixed strategy, in increasing index order.
    """
    if tie_tol < 0:
        raise InvalidArgument("tie_tol must be nonnegative")
    own = g.own_matrix(responder)
    values = own @ mixed_strategy(opponent, own.shape[1])
    return [int(a) for a in np.flatnonzero(values >= values.max() - tie_tol)]


def stackelberg_value(g, leader):
    """
    Optimistic Stackelberg value of `leader` in g.

    For every follower action y we maximise the leader's utility over leader
    mixed strategies that keep y a (weak) best response; allowing ties in the
    constraints is what breaks follower ties in the leader's favour.
    """
    leader_u, follower_u = _leader_view(g, leader)
    n_leader, n_follower = leader_u.shape
    values = np.full(n_follower, -np.inf)
    strategies = [None] * n_follower
    for y in range(n_follower):
        others = [k for k in range(n_follower) if k != y]
        lp = LinearProgram(leader_u[:, y],
                           A_ub=(follower_u[:, others] - follower_u[:, [y]]).T,
                           b_ub=np.zeros(len(others)),
                           A_eq=np.ones((1, n_leader)), b_eq=[1.0])
        result = lp_solve(lp)
        if result.status == OPTIMAL:
            values[y] = result.value
            strategies[y] = _simplex_vector(result.x)

    best = values.max()
    follower_action = int(np.flatnonzero(values >= best - VALUE_TIE_TOL)[0])
    return StackelbergSolution(values[follower_action], strategies[follower_action],
                               follower_action, values, leader)


def stackval_prior(prior, player):
    return float(sum(weight * stackelberg_value(game, player).value for game, weight in prior.entries))


def maximin_value(g, player):
    """The value `player` can guarantee with a mixed strategy against any opponent action."""
    own = g.own_matrix(player)
    n, n_opp = own.shape
    lp = LinearProgram(np.concatenate([np.zeros(n), [1.0]]),
                       A_ub=np.hstack([-own.T, np.ones((n_opp, 1))]), b_ub=np.zeros(n_opp),
                       A_eq=np.concatenate([np.ones(n), [0.0]])[None, :], b_eq=[1.0],
                       lower=np.concatenate([np.zeros(n), [-np.inf]]))
    return lp_solve(lp).value


def weakly_dominated(g, player, action):
    """
    Whether some mixture of `player`'s other actions does at least as well as
    `action` against every opponent pure action.

    Returns:
        (dominated, witness): witness is a strategy over all of the player's
        actions (zero on `action`) when dominated, else None
    """
    own = g.own_matrix(player)
    n, n_opp = own.shape
    if not 0 <= action < n:
        raise InvalidArgument("action %r out of range for player %d" % (action, player))
    if n == 1:
        return False, None
    others = [k for k in range(n) if k != action]
    k = len(others)
    # maximise the worst-case slack t of the mixture over `action`
    lp = LinearProgram(np.concatenate([np.zeros(k), [1.0]]),
                       A_ub=np.hstack([-own[others].T, np.ones((n_opp, 1))]), b_ub=-own[action],
                       A_eq=np.concatenate([np.ones(k), [0.0]])[None, :], b_eq=[1.0],
                       lower=np.concatenate([np.zeros(k), [-np.inf]]))
    result = lp_solve(lp)
    slack = result.x[-1]
    if slack < -DOMINANCE_TOL:
        return False, None
    witness = np.zeros(n)
    witness[others] = _simplex_vector(result.x[:k])
    return True, mixed_strategy(witness)


def commitment_pair(g, leader):
    """
    The Stackelberg commitment x*, its follower response y*, and the strategy
    x_bar maximising the margin c by which y* beats every other follower action.

    The margin is +inf when the follower has a single action.
    """
    solution = stackelberg_value(g, leader)
    y = solution.follower_action
    _, follower_u = _leader_view(g, leader)
    n_leader, n_follower = follower_u.shape
    if n_follower == 1:
        return CommitmentPair(solution.leader_strategy, solution.leader_strategy, math.inf, y)

    others = [k for k in range(n_follower) if k != y]
    lp = LinearProgram(np.concatenate([np.zeros(n_leader), [1.0]]),
                       A_ub=np.hstack([(follower_u[:, others] - follower_u[:, [y]]).T,
                                       np.ones((len(others), 1))]),
                       b_ub=np.zeros(len(others)),
                       A_eq=np.concatenate([np.ones(n_leader), [0.0]])[None, :], b_eq=[1.0],
                       lower=np.concatenate([np.zeros(n_leader), [-np.inf]]))
    result = lp_solve(lp)
    return CommitmentPair(solution.leader_strategy, _simplex_vector(result.x[:n_leader]),
                          float(result.x[-1]), y)


def mix_commitment(pair, delta):
    """(1 - delta) x* + delta x_bar and the margin delta * c it guarantees."""
    if not 0.0 < delta <= 1.0:
        raise InvalidArgument("delta must lie in (0, 1], got %r" % delta)
    if pair.margin <= MARGIN_TOL:
        raise AssumptionViolated(
            "follower action %d has no strict margin (max margin %.3g): it is weakly dominated"
            % (pair.follower_action, pair.margin))
    strategy = (1.0 - delta) * pair.x_star + delta * pair.x_bar
    return _simplex_vector(strategy), delta * pair.margin


def perturbed_commitment(g, leader, delta):
    """
    Returns:
        (strategy, margin): the follower's Stackelberg response is the unique
        best response to `strategy`, by at least `margin`
    """
    pair = commitment_pair(g, leader)
    app_log.debug("Commitment for %s led by player %d: margin %.4g", g.name, leader, pair.margin)
    return mix_commitment(pair, delta)
