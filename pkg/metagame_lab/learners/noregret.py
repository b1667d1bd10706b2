"""
Multiplicative weights, EXP3, and the Blum-Mansour swap-regret reduction over
multiplicative-weights experts, in full-information and bandit flavours.

Utilities are rescaled to [0, 1] with the player's payoff range over the
prior's support, which the player knows. Full-information learners evaluate
counterfactual utilities in the game named by their signal. Bandit learners
sample their action themselves and emit it as a pure strategy: the expected
utility of a mixed strategy cannot be attributed to individual actions.
"""
import math

import numpy as np

from ..games import pure_strategy
from .strategies import Learner

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_STEPS = 1000


def softmax(scores):
    shifted = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


def stationary_distribution(Q, start=None, tol=POWER_ITERATION_TOL):
    """
    The distribution p with p = p Q for a row-stochastic Q, by power iteration
    from `start`, falling back to a direct least-squares solve.
    """
    n = Q.shape[0]
    p = np.full(n, 1.0 / n) if start is None else start
    for _ in range(POWER_ITERATION_STEPS):
        following = p @ Q
        if np.abs(following - p).sum() < tol:
            return following / following.sum()
        p = following
    system = np.vstack([Q.T - np.eye(n), np.ones((1, n))])
    target = np.concatenate([np.zeros(n), [1.0]])
    p = np.clip(np.linalg.lstsq(system, target, rcond=None)[0], 0.0, None)
    return p / p.sum()


class _ScaledLearner(Learner):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        matrices = self.prior.own_matrices(self.role)
        self.low = float(matrices.min())
        self.scale = self.prior.payoff_range(self.role)
        self.log_n = math.log(self.n) if self.n > 1 else 0.0

    def _scaled(self, utility):
        return (utility - self.low) / self.scale

    def _counterfactual(self, opponent):
        return self._scaled(self.signaled_game.own_matrix(self.role) @ opponent)

    def _full_eta(self):
        eta = self.spec.params['eta']
        return eta if eta is not None else math.sqrt(self.log_n / self.t)

    def _exploration(self):
        exploration = self.spec.params.get('exploration')
        if exploration is not None:
            return exploration
        return min(1.0, math.sqrt(self.n * self.log_n / self.t))

    def _bandit_eta(self, exploration):
        eta = self.spec.params['eta']
        return eta if eta is not None else exploration / self.n


class MultiplicativeWeights(_ScaledLearner):
    requires_full_information = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.cumulative = np.zeros(self.n)

    def _strategy(self):
        return softmax(self._full_eta() * self.cumulative)

    def _update(self, fb):
        self.cumulative += self._counterfactual(fb.opponent_strategy)


class Exp3(_ScaledLearner):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.cumulative = np.zeros(self.n)
        self._draw = None

    def _strategy(self):
        exploration = self._exploration()
        weights = softmax(self._bandit_eta(exploration) * self.cumulative)
        mixed = (1.0 - exploration) * weights + exploration / self.n
        action = int(self.rng.choice(self.n, p=mixed))
        self._draw = (action, mixed[action])
        return pure_strategy(action, self.n)

    def _update(self, fb):
        action, probability = self._draw
        self.cumulative[action] += self._scaled(fb.own_utility) / probability


class NoSwapRegretFull(_ScaledLearner):
    """
    One multiplicative-weights expert per action; expert i is charged the
    utility vector scaled by the probability the master put on action i, and
    the master plays the stationary distribution of the experts' matrix.
    """
    requires_full_information = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.cumulative = np.zeros((self.n, self.n))
        self.master = np.full(self.n, 1.0 / self.n)

    def _master(self, eta):
        return stationary_distribution(softmax(eta * self.cumulative), self.master)

    def _strategy(self):
        self.master = self._master(self._full_eta())
        return self.master

    def _update(self, fb):
        self.cumulative += np.outer(self.master, self._counterfactual(fb.opponent_strategy))


class NoSwapRegretBandit(NoSwapRegretFull):
    """
    The same reduction with exploration mixing and importance-weighted
    estimates of the sampled action's utility.
    """
    requires_full_information = False

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._draw = None

    def _strategy(self):
        exploration = self._exploration()
        self.master = self._master(self._bandit_eta(exploration))
        mixed = (1.0 - exploration) * self.master + exploration / self.n
        action = int(self.rng.choice(self.n, p=mixed))
        self._draw = (action, mixed[action])
        return pure_strategy(action, self.n)

    def _update(self, fb):
        action, probability = self._draw
        self.cumulative[:, action] += self.master * (self._scaled(fb.own_utility) / probability)
