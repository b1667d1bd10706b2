"""
Value types for repeated Bayesian stage games.

A realized game is one of the entries of a finite `Prior`; players receive
noisy signals about it (`SignalModel`), play mixed strategies for T rounds
(`Trajectory`), and the time-averaged joint play is summarised as a
correlated strategy profile (`CSP`).

All value types are immutable after construction: their numpy arrays are
flagged read-only, so they can be shared between trial workers.
"""
import string

import numpy as np

from .errors import InvalidArgument

# Probability-sum tolerance for values we construct ourselves, and for
# aggregates accumulated over many rounds.
SUM_TOL = 1e-9
AGGREGATE_TOL = 1e-6

_MASK64 = (1 << 64) - 1

# Independent random streams spawned for every trial.
STREAM_NATURE, STREAM_PLAYER1, STREAM_PLAYER2, STREAM_REALIZATION, STREAM_SIDE_SIGNALS = range(5)


def splitmix64(value):
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed, trial_index):
    """
    Derive the 64-bit seed of one trial from the experiment's master seed.

    The trial index is hashed with splitmix64 and xored into the master seed,
    which is hashed again: trial_seed = splitmix64(master ^ splitmix64(i + 1)).
    """
    if trial_index < 0:
        raise InvalidArgument("trial index must be nonnegative, got %r" % trial_index)
    return splitmix64((int(master_seed) & _MASK64) ^ splitmix64(int(trial_index) + 1))


def trial_streams(master_seed, trial_index):
    """
    Returns the five generators of a trial, indexed by the STREAM_* constants.
    """
    sequence = np.random.SeedSequence(trial_seed(master_seed, trial_index))
    return [np.random.default_rng(child) for child in sequence.spawn(5)]


def _frozen(values, ndim):
    array = np.array(values, dtype=float)
    if array.ndim != ndim:
        raise InvalidArgument("expected a %d-dimensional array, got shape %s" % (ndim, array.shape))
    array.setflags(write=False)
    return array


def mixed_strategy(probs, n=None):
    """
    Validate a simplex vector and return it as a read-only float array.

    Args:
        probs: probabilities over one player's actions
        n: expected number of actions, if known

    Returns:
        the validated strategy
    """
    probs = _frozen(probs, 1)
    if n is not None and probs.shape[0] != n:
        raise InvalidArgument("strategy has %d entries, expected %d" % (probs.shape[0], n))
    if probs.shape[0] == 0:
        raise InvalidArgument("strategy over an empty action set")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0.0):
        raise InvalidArgument("strategy entries must be finite and nonnegative: %s" % probs)
    if abs(probs.sum() - 1.0) > SUM_TOL:
        raise InvalidArgument("strategy entries sum to %r, not 1" % probs.sum())
    return probs


def pure_strategy(action, n):
    if not 0 <= action < n:
        raise InvalidArgument("action %r out of range for %d actions" % (action, n))
    probs = np.zeros(n)
    probs[action] = 1.0
    probs.setflags(write=False)
    return probs


def _default_labels(n1, n2):
    if n1 + n2 <= len(string.ascii_uppercase):
        letters = string.ascii_uppercase
        return list(letters[:n1]), list(letters[n1:n1 + n2])
    return ['r%d' % i for i in range(n1)], ['c%d' % j for j in range(n2)]


class GameMatrix:
    """
    A bimatrix stage game: u1[a][b] and u2[a][b] are the utilities of player 1
    and player 2 when player 1 plays a and player 2 plays b.
    """
    def __init__(self, name, u1, u2, action_labels1=None, action_labels2=None):
        self.name = str(name)
        self.u1 = _frozen(u1, 2)
        self.u2 = _frozen(u2, 2)
        if self.u1.shape != self.u2.shape:
            raise InvalidArgument("u1 has shape %s but u2 has shape %s" % (self.u1.shape, self.u2.shape))
        if min(self.u1.shape) == 0:
            raise InvalidArgument("game %s has an empty action set" % self.name)
        if not (np.all(np.isfinite(self.u1)) and np.all(np.isfinite(self.u2))):
            raise InvalidArgument("game %s has non-finite utilities" % self.name)

        labels1, labels2 = _default_labels(*self.u1.shape)
        self.action_labels1 = tuple(action_labels1) if action_labels1 is not None else tuple(labels1)
        self.action_labels2 = tuple(action_labels2) if action_labels2 is not None else tuple(labels2)
        if len(self.action_labels1) != self.n1 or len(self.action_labels2) != self.n2:
            raise InvalidArgument("game %s: action labels do not match the matrix shape" % self.name)

    @property
    def n1(self):
        return self.u1.shape[0]

    @property
    def n2(self):
        return self.u1.shape[1]

    @property
    def shape(self):
        return self.u1.shape

    def num_actions(self, player):
        return self.n1 if _check_player(player) == 1 else self.n2

    def utility(self, player):
        return self.u1 if _check_player(player) == 1 else self.u2

    def own_matrix(self, player):
        """Utilities of `player` with rows indexed by its own actions and columns by the opponent's."""
        return self.u1 if _check_player(player) == 1 else self.u2.T

    def labels(self, player):
        return self.action_labels1 if _check_player(player) == 1 else self.action_labels2

    def swap_roles(self):
        """The same game with the two players exchanged."""
        return GameMatrix(self.name + '~swapped', self.u2.T, self.u1.T,
                          self.action_labels2, self.action_labels1)

    def same_payoffs(self, other, tol=SUM_TOL):
        return (self.shape == other.shape
                and np.allclose(self.u1, other.u1, rtol=0.0, atol=tol)
                and np.allclose(self.u2, other.u2, rtol=0.0, atol=tol))

    def to_dict(self):
        return {
            'name': self.name,
            'actions1': list(self.action_labels1),
            'actions2': list(self.action_labels2),
            'u1': self.u1.tolist(),
            'u2': self.u2.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data.get('name', 'game'), data['u1'], data['u2'],
                       data.get('actions1'), data.get('actions2'))
        except KeyError as e:
            raise InvalidArgument("game object is missing key %s" % e)
        except (TypeError, ValueError) as e:
            if isinstance(e, InvalidArgument):
                raise
            raise InvalidArgument("malformed game object: %s" % e)

    def __repr__(self):
        return 'GameMatrix(%r, %dx%d)' % (self.name, self.n1, self.n2)


def _check_player(player):
    if player not in (1, 2):
        raise InvalidArgument("player must be 1 or 2, got %r" % (player,))
    return player


class Prior:
    """
    A finite-support distribution over games sharing one (n1, n2) shape.
    """
    def __init__(self, entries):
        entries = list(entries)
        if not entries:
            raise InvalidArgument("a prior needs at least one game")
        self.games = tuple(game for game, _ in entries)
        self.weights = _frozen([weight for _, weight in entries], 1)
        if np.any(self.weights < 0.0) or not np.all(np.isfinite(self.weights)):
            raise InvalidArgument("prior weights must be nonnegative: %s" % self.weights)
        if abs(self.weights.sum() - 1.0) > SUM_TOL:
            raise InvalidArgument("prior weights sum to %r, not 1" % self.weights.sum())
        shapes = set(game.shape for game in self.games)
        if len(shapes) != 1:
            raise InvalidArgument("all games in a prior must share one action-set shape, got %s" % sorted(shapes))

    @classmethod
    def single(cls, game):
        return cls([(game, 1.0)])

    @classmethod
    def uniform(cls, games):
        games = list(games)
        return cls([(game, 1.0 / len(games)) for game in games])

    @property
    def support_size(self):
        return len(self.games)

    @property
    def shape(self):
        return self.games[0].shape

    @property
    def entries(self):
        return list(zip(self.games, self.weights.tolist()))

    def num_actions(self, player):
        return self.games[0].num_actions(player)

    def labels(self, player):
        return self.games[0].labels(player)

    def mode(self, among=None):
        """Index of the heaviest game (lowest index on ties), optionally restricted to `among`."""
        candidates = range(self.support_size) if among is None else sorted(among)
        best = None
        for index in candidates:
            if best is None or self.weights[index] > self.weights[best]:
                best = index
        return best

    def check_index(self, index):
        if not (isinstance(index, (int, np.integer)) and 0 <= index < self.support_size):
            raise InvalidArgument("game index %r out of range for a prior of %d games" % (index, self.support_size))
        return int(index)

    def own_matrices(self, player):
        """Array of shape (K, own actions, opponent actions)."""
        return np.stack([game.own_matrix(player) for game in self.games])

    def payoff_range(self, player):
        """Spread of `player`'s utilities over the whole support (1.0 for constant payoffs)."""
        matrices = self.own_matrices(player)
        spread = float(matrices.max() - matrices.min())
        return spread if spread > 0.0 else 1.0

    def swap_roles(self):
        return Prior([(game.swap_roles(), weight) for game, weight in self.entries])

    def to_dict(self):
        return {'games': [{'weight': weight, 'game': game.to_dict()} for game, weight in self.entries]}

    def __repr__(self):
        return 'Prior(%s)' % ', '.join('%s:%.4g' % (g.name, w) for g, w in self.entries)


class SignalModel:
    """Signal precisions: s_i equals the realized game with probability p_i, else it is an independent prior draw."""
    def __init__(self, p1=1.0, p2=0.0):
        for name, value in (('p1', p1), ('p2', p2)):
            if not 0.0 <= value <= 1.0:
                raise InvalidArgument("%s must lie in [0, 1], got %r" % (name, value))
        self.p1 = float(p1)
        self.p2 = float(p2)

    def precision(self, player):
        return self.p1 if _check_player(player) == 1 else self.p2

    def to_dict(self):
        return {'p1': self.p1, 'p2': self.p2}

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {'p1', 'p2'}
        if unknown:
            raise InvalidArgument("unknown signal model keys: %s" % sorted(unknown))
        return cls(float(data.get('p1', 1.0)), float(data.get('p2', 0.0)))


class Trajectory:
    """
    The strategies played in one trial, one row per round.

    xs has shape (T, n1) and ys has shape (T, n2). side_signals maps a player
    to the per-round external signals the player received, if any.
    """
    def __init__(self, xs, ys, realized_game_index, signal_indices, side_signals=None):
        self.xs = _frozen(xs, 2)
        self.ys = _frozen(ys, 2)
        if self.xs.shape[0] != self.ys.shape[0]:
            raise InvalidArgument("trajectory has %d player-1 rounds but %d player-2 rounds"
                                  % (self.xs.shape[0], self.ys.shape[0]))
        for strategies in (self.xs, self.ys):
            if strategies.size and (np.any(strategies < 0.0)
                                    or np.max(np.abs(strategies.sum(axis=1) - 1.0)) > SUM_TOL):
                raise InvalidArgument("trajectory contains an invalid mixed strategy")
        self.realized_game_index = int(realized_game_index)
        self.signal_indices = tuple(int(s) for s in signal_indices)
        self.side_signals = dict(side_signals or {})

    @property
    def horizon(self):
        return self.xs.shape[0]

    def __len__(self):
        return self.horizon

    @property
    def rounds(self):
        return zip(self.xs, self.ys)

    def own(self, player):
        return self.xs if _check_player(player) == 1 else self.ys

    def opponent(self, player):
        return self.ys if _check_player(player) == 1 else self.xs


class CSP:
    """A correlated strategy profile: joint probability mass over action pairs."""
    def __init__(self, mass):
        self.mass = _frozen(mass, 2)
        if np.any(self.mass < -AGGREGATE_TOL) or not np.all(np.isfinite(self.mass)):
            raise InvalidArgument("CSP mass must be finite and nonnegative")
        if abs(self.mass.sum() - 1.0) > AGGREGATE_TOL:
            raise InvalidArgument("CSP mass sums to %r, not 1" % self.mass.sum())

    @classmethod
    def point_mass(cls, a, b, shape):
        mass = np.zeros(shape)
        mass[a, b] = 1.0
        return cls(mass)

    def cell(self, a, b):
        return float(self.mass[a, b])

    def expected_utility(self, game, player):
        if game.shape != self.mass.shape:
            raise InvalidArgument("CSP shape %s does not match game %s" % (self.mass.shape, game.shape))
        return float(np.sum(self.mass * game.utility(player)))

    def to_dict(self, labels1, labels2):
        return {a: {b: float(self.mass[i, j]) for j, b in enumerate(labels2)}
                for i, a in enumerate(labels1)}

    def __repr__(self):
        return 'CSP(%s)' % np.array2string(self.mass, precision=4)


class FeedbackRecord:
    """
    What a player observes after a round: its own strategy and utility, plus
    the opponent's strategy under full-information feedback (None under bandit).
    """
    __slots__ = ('own_strategy', 'opponent_strategy', 'own_utility')

    def __init__(self, own_strategy, opponent_strategy, own_utility):
        self.own_strategy = own_strategy
        self.opponent_strategy = opponent_strategy
        self.own_utility = float(own_utility)

    @property
    def is_full_information(self):
        return self.opponent_strategy is not None


def sample_signal(prior, realized_index, precision, rng):
    """
    Draw s ~ phi_p(. | G): the realized index with probability `precision`,
    otherwise an independent draw from the prior weights.
    """
    realized_index = prior.check_index(realized_index)
    if not 0.0 <= precision <= 1.0:
        raise InvalidArgument("precision must lie in [0, 1], got %r" % precision)
    if rng.random() < precision:
        return realized_index
    return int(rng.choice(prior.support_size, p=prior.weights))


def expected_utility(g, x, y, player):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (g.n1,) or y.shape != (g.n2,):
        raise InvalidArgument("strategies of shape %s and %s do not fit a %dx%d game"
                              % (x.shape, y.shape, g.n1, g.n2))
    return float(x @ g.utility(player) @ y)


def csp_from_trajectory(traj):
    """Empirical average of the per-round product distributions x_t (x) y_t."""
    if traj.horizon == 0:
        raise InvalidArgument("cannot build a CSP from an empty trajectory")
    return CSP(traj.xs.T @ traj.ys / traj.horizon)


def mix_csps(parts):
    """
    Convex combination of CSPs.

    Args:
        parts: list of (weight, CSP) pairs whose weights sum to 1

    Returns:
        the mixed CSP
    """
    parts = list(parts)
    if not parts:
        raise InvalidArgument("nothing to mix")
    weights = np.array([weight for weight, _ in parts], dtype=float)
    if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > SUM_TOL:
        raise InvalidArgument("mixture weights must be nonnegative and sum to 1, got %s" % weights)
    shapes = set(csp.mass.shape for _, csp in parts)
    if len(shapes) != 1:
        raise InvalidArgument("cannot mix CSPs of different shapes: %s" % sorted(shapes))
    mass = sum(weight * csp.mass for weight, csp in parts)
    return CSP(mass)


class SideSignalSource:
    """
    Per-round external signals about the realized game.

    q^t equals the realized game with probability 1 - t^(-exponent); a wrong
    draw is uniform over the other supported games. Drawn signals are kept in
    `history` so they can be recorded on the trajectory.
    """
    def __init__(self, prior, realized_index, rng, exponent=1.0):
        if not exponent > 0:
            raise InvalidArgument("accuracy exponent must be positive, got %r" % exponent)
        self.support_size = prior.support_size
        self.realized_index = prior.check_index(realized_index)
        self.rng = rng
        self.exponent = float(exponent)
        self.history = []

    def accuracy(self, t):
        return 1.0 - float(t) ** -self.exponent

    def draw(self, t):
        if t < 1:
            raise InvalidArgument("rounds are numbered from 1, got %r" % t)
        u = self.rng.random()
        if self.support_size == 1 or u < self.accuracy(t):
            signal = self.realized_index
        else:
            wrong = int(self.rng.integers(self.support_size - 1))
            signal = wrong if wrong < self.realized_index else wrong + 1
        self.history.append(signal)
        return signal
