"""
Learners that lead by commitment, and the scripted revelation pair.
"""
import numpy as np
from tornado.log import app_log

from ..errors import AssumptionViolated, InvalidArgument
from ..games import pure_strategy
from ..StackelbergSolver import commitment_pair, mix_commitment, stackelberg_value
from .strategies import Learner


def epoch_horizon(t, initial_epoch):
    """The doubling-epoch horizon T_m in force at round t: the smallest initial * 2^k >= t."""
    horizon = int(initial_epoch)
    while horizon < t:
        horizon *= 2
    return horizon


class StackelbergLeader(Learner):
    """
    Commits to the perturbed Stackelberg strategy of the game named by its
    signal, with delta = T_m^(-b) for the current doubling epoch T_m.
    Feedback is ignored.
    """
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.b = self.spec.params['b']
        self.initial_epoch = int(self.spec.params['initial_epoch'])
        self.horizon = epoch_horizon(1, self.initial_epoch)
        self._pairs = {}
        self._strategies = {}

    def _pair(self, game_index):
        if game_index not in self._pairs:
            self._pairs[game_index] = commitment_pair(self.prior.games[game_index], self.role)
        return self._pairs[game_index]

    def commitment(self, game_index, horizon):
        key = (game_index, horizon)
        if key not in self._strategies:
            pair = self._pair(game_index)
            try:
                strategy, _ = mix_commitment(pair, horizon ** -self.b)
            except AssumptionViolated as e:
                app_log.warning("%s: %s; committing to the unperturbed strategy",
                                self.prior.games[game_index].name, e)
                strategy = pair.x_star
            self._strategies[key] = strategy
        return self._strategies[key]

    def _strategy(self):
        return self.commitment(self.signal, self.horizon)

    def _update(self, fb):
        if self.t >= self.horizon:
            self.horizon *= 2


class ExternalSignalLeader(StackelbergLeader):
    """
    A Stackelberg leader that ignores its pre-play signal and commits, every
    round, for the game named by that round's external side signal.
    """
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.side_signals is None:
            raise InvalidArgument("external_signal_leader needs a side-signal source")
        self.side_signal_log = []

    def _strategy(self):
        q = self.side_signals.draw(self.t)
        self.side_signal_log.append(q)
        return self.commitment(q, self.horizon)


class RevealThenFollowLeader(Learner):
    """
    Player 1 announces the game in round 1 by playing action (signal mod n1),
    then best-responds to the opponent's previous strategy.
    """
    requires_full_information = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._last_opponent = None

    def _strategy(self):
        if self._last_opponent is None:
            return pure_strategy(self.signal % self.n, self.n)
        return self._best_response(self.signaled_game, self._last_opponent)

    def _update(self, fb):
        self._last_opponent = fb.opponent_strategy


class InferThenCommitFollower(Learner):
    """
    Player 2 plays its first action in round 1, reads the game off player 1's
    round-1 action, and from then on plays its own optimistic Stackelberg
    commitment for that game.
    """
    requires_full_information = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.inferred_game = None
        self._commitment = None

    def _strategy(self):
        if self._commitment is None:
            return pure_strategy(0, self.n)
        return self._commitment

    def _update(self, fb):
        if self.t != 1:
            return
        n_opp = self.prior.num_actions(3 - self.role)
        announced = int(np.argmax(fb.opponent_strategy))
        candidates = [k for k in range(self.prior.support_size) if k % n_opp == announced]
        self.inferred_game = self.prior.mode(among=candidates) if candidates else self.prior.mode()
        game = self.prior.games[self.inferred_game]
        self._commitment = stackelberg_value(game, self.role).leader_strategy
