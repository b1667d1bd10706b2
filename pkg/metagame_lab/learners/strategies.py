import numpy as np

from ..errors import InvalidArgument, ProtocolViolation
from ..games import pure_strategy


class Learner:
    """
    Per-trial state of one player's algorithm.

    Every round the engine calls act() once, then observe() with the round's
    feedback. The strategy emitted by act() depends only on the LearnerSpec, the
    signal, the feedback seen so far and the learner's own random stream.
    """
    requires_full_information = False

    def __init__(self, spec, role, prior, signal, rng, side_signals=None):
        self.spec = spec
        self.role = role
        self.prior = prior
        self.signal = signal
        self.rng = rng
        self.side_signals = side_signals
        self.n = prior.num_actions(role)
        self.t = 1
        self._pending = None

    @property
    def signaled_game(self):
        return self.prior.games[self.signal]

    def act(self):
        if self._pending is not None:
            raise ProtocolViolation("%s: act() called twice in round %d" % (self.spec.kind, self.t))
        self._pending = self._strategy()
        return self._pending

    def observe(self, fb):
        if self._pending is None:
            raise ProtocolViolation("%s: observe() before act() in round %d" % (self.spec.kind, self.t))
        if self.requires_full_information and not fb.is_full_information:
            raise ProtocolViolation("%s needs full-information feedback" % self.spec.kind)
        self._update(fb)
        self._pending = None
        self.t += 1

    def _strategy(self):
        raise NotImplementedError

    def _update(self, fb):
        pass

    def _best_response(self, game, opponent):
        """Pure best response in `game`, lowest index on ties."""
        values = game.own_matrix(self.role) @ opponent
        return pure_strategy(int(np.argmax(values)), self.n)


class ConstantAction(Learner):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        action = self.spec.params['action']
        if action >= self.n:
            raise InvalidArgument("constant action %d out of range for %d actions" % (action, self.n))
        self._strategy_vector = pure_strategy(action, self.n)

    def _strategy(self):
        return self._strategy_vector


class BestResponder(Learner):
    """
    Best-responds, in the game named by its signal, to the opponent's strategy
    of the previous round; the first round answers a uniform opponent.
    """
    requires_full_information = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        n_opp = self.prior.num_actions(3 - self.role)
        self._last_opponent = np.full(n_opp, 1.0 / n_opp)

    def _strategy(self):
        return self._best_response(self.signaled_game, self._last_opponent)

    def _update(self, fb):
        self._last_opponent = fb.opponent_strategy
