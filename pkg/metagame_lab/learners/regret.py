"""
Regret meters over recorded trajectories.

Both meters are measured against the opponent's recorded strategies in the
game that was actually played, and are totals (not per-round averages).
"""
import numpy as np

from ..errors import InvalidArgument


class RegretReport:
    def __init__(self, external_regret, swap_regret, swap_targets):
        self.external_regret = float(external_regret)
        self.swap_regret = float(swap_regret)
        self.swap_targets = dict(swap_targets)

    def to_dict(self, action_labels=None):
        name = (lambda a: action_labels[a]) if action_labels else (lambda a: a)
        return {
            'external_regret': self.external_regret,
            'swap_regret': self.swap_regret,
            'swap_targets': {name(a): name(b) for a, b in self.swap_targets.items()},
        }

    def __repr__(self):
        return 'RegretReport(external=%.6g, swap=%.6g)' % (self.external_regret, self.swap_regret)


def _counterfactuals(traj, g, player):
    """(own strategies, V) where V[t, b] is the utility action b would have earned in round t."""
    own = traj.own(player)
    if own.shape[1] != g.num_actions(player) or traj.opponent(player).shape[1] != g.num_actions(3 - player):
        raise InvalidArgument("trajectory does not fit game %s" % g.name)
    return own, traj.opponent(player) @ g.own_matrix(player).T


def external_regret(traj, g, player):
    own, V = _counterfactuals(traj, g, player)
    return float(V.sum(axis=0).max() - np.sum(own * V))


def swap_regret(traj, g, player):
    """
    Swap regret with the best swap function, chosen independently per source
    action: action a is replaced by the b maximising sum_t own_t[a] * V[t, b].
    """
    own, V = _counterfactuals(traj, g, player)
    M = own.T @ V
    kept = np.diag(M)
    targets = {}
    for a in range(M.shape[0]):
        best = int(np.argmax(M[a]))
        targets[a] = best if M[a, best] > kept[a] else a
    improvement = M.max(axis=1) - kept
    return RegretReport(external_regret(traj, g, player), improvement.sum(), targets)


def regret_curves(traj, g, player, checkpoints):
    """
    External and swap regret of the first t rounds, for every t in checkpoints.

    Returns:
        (external, swap): arrays of totals aligned with checkpoints
    """
    own, V = _counterfactuals(traj, g, player)
    index = np.asarray(checkpoints, dtype=int) - 1
    if index.size and (index.min() < 0 or index.max() >= traj.horizon):
        raise InvalidArgument("checkpoints must lie in [1, %d]" % traj.horizon)
    realized = np.cumsum(np.sum(own * V, axis=1))[index]
    fixed = np.cumsum(V, axis=0)[index]
    external = fixed.max(axis=1) - realized
    M = np.cumsum(own[:, :, None] * V[:, None, :], axis=0)[index]
    swap = (M.max(axis=2) - np.diagonal(M, axis1=1, axis2=2)).sum(axis=1)
    return external, swap
