"""
Monte-Carlo engine: runs a pair of learners on games drawn from a prior,
folds every trial into a small summary, and aggregates the summaries into
utility, regret and CSP reports.

Trials are independent and fully determined by (master_seed, trial index),
so reports do not depend on how many worker processes ran them.

Trajectories hold the strategies as they were fed back: mixed profiles for
full-information learners, but the sampled pure action for bandit learners
even when pure_realization is off. CSPs and regret curves of bandit runs are
therefore averages of realized play.
"""
import ast
import copy
import csv
from collections import OrderedDict, namedtuple
import math
import os

from joblib import Parallel, delayed
import numpy as np
from tornado.log import app_log
from traitlets import Bool, Enum, Instance, Int, List, TraitError, default, validate
from traitlets.config import Configurable

from .errors import InvalidArgument
from .gamefiles import resolve_prior
from .games import (STREAM_NATURE, STREAM_PLAYER1, STREAM_PLAYER2, STREAM_REALIZATION, STREAM_SIDE_SIGNALS,
                    CSP, FeedbackRecord, Prior, SideSignalSource, SignalModel, Trajectory,
                    mix_csps, pure_strategy, sample_signal, trial_streams)
from .learners import LearnerSpec, learner_init, regret_curves

CI_Z = 1.96

CSV_HEADER = ['trial', 'realized_game', 's1', 's2', 't', 'avg_u1', 'avg_u2',
              'ext_regret1', 'ext_regret2', 'swap_regret1', 'swap_regret2']

CONFIG_KEYS = ('prior', 'signal_model', 'learner1', 'learner2', 'horizon', 'trials', 'feedback_mode',
               'pure_realization', 'master_seed', 'checkpoints', 'threads', 'keep_trajectories')


def default_checkpoints(horizon):
    """Powers of two up to the horizon, plus the horizon itself."""
    points = []
    t = 1
    while t < horizon:
        points.append(t)
        t *= 2
    points.append(horizon)
    return points


class ExperimentConfig(Configurable):
    prior = Instance(Prior, allow_none=True,
                     help="Distribution over the stage games",
                     config=True)
    signal_model = Instance(SignalModel, args=(),
                            help="Precisions of the two players' pre-play signals",
                            config=True)
    spec1 = Instance(LearnerSpec, allow_none=True,
                     help="Algorithm of player 1",
                     config=True)
    spec2 = Instance(LearnerSpec, allow_none=True,
                     help="Algorithm of player 2",
                     config=True)
    horizon = Int(1000,
                  help="Number of rounds T of every trial",
                  config=True)
    trials = Int(32,
                 help="Number of independent trials",
                 config=True)
    feedback_mode = Enum(['full', 'bandit'], default_value='full',
                         help="full: players observe the opponent's strategy; bandit: only their own utility",
                         config=True)
    pure_realization = Bool(False,
                            help="Sample pure actions from the mixed strategies and feed back realized payoffs",
                            config=True)
    master_seed = Int(0,
                      help="64-bit seed every trial's random streams are derived from",
                      config=True)
    checkpoints = List(Int(),
                       help="Rounds at which curves are reported (default: powers of two up to T, plus T)",
                       config=True)
    threads = Int(1,
                  help="Maximum number of worker processes running trials",
                  config=True)
    keep_trajectories = Bool(False,
                             help="Retain full trajectories so they can be dumped",
                             config=True)

    @default('checkpoints')
    def _checkpoints_default(self):
        return default_checkpoints(self.horizon)

    @validate('horizon', 'trials', 'threads')
    def _check_positive(self, proposal):
        if proposal['value'] < 1:
            raise TraitError("%s must be at least 1, got %r" % (proposal['trait'].name, proposal['value']))
        return proposal['value']

    @validate('checkpoints')
    def _check_checkpoints(self, proposal):
        points = list(proposal['value'])
        if any(b <= a for a, b in zip(points, points[1:])):
            raise TraitError("checkpoints must be strictly increasing, got %s" % points)
        if points and points[0] < 1:
            raise TraitError("checkpoints must be rounds >= 1, got %s" % points)
        return points

    @validate('master_seed')
    def _check_seed(self, proposal):
        if not 0 <= proposal['value'] < 2 ** 64:
            raise TraitError("master_seed must be a 64-bit unsigned integer")
        return proposal['value']

    def check(self):
        """Cross-field checks that single-trait validators cannot see."""
        if self.prior is None or self.spec1 is None or self.spec2 is None:
            raise InvalidArgument("an experiment needs a prior and a learner for each player")
        if self.checkpoints and self.checkpoints[-1] > self.horizon:
            raise InvalidArgument("checkpoint %d lies beyond the horizon %d" % (self.checkpoints[-1], self.horizon))
        for player, spec in ((1, self.spec1), (2, self.spec2)):
            if player not in spec.allowed_roles:
                raise InvalidArgument("%s cannot play as player %d" % (spec.kind, player))
        return self

    def spec(self, player):
        return self.spec1 if player == 1 else self.spec2

    def copy(self, **changes):
        values = {name: getattr(self, name) for name in self.trait_names(config=True)}
        values.update(changes)
        if 'horizon' in changes and 'checkpoints' not in changes:
            values['checkpoints'] = default_checkpoints(changes['horizon'])
        return ExperimentConfig(**values)

    def replace_spec(self, player, spec):
        return self.copy(**{'spec%d' % player: spec})

    def to_dict(self):
        return OrderedDict([
            ('prior', self.prior.to_dict()),
            ('signal_model', self.signal_model.to_dict()),
            ('learner1', self.spec1.to_dict()),
            ('learner2', self.spec2.to_dict()),
            ('horizon', self.horizon),
            ('trials', self.trials),
            ('feedback_mode', self.feedback_mode),
            ('pure_realization', self.pure_realization),
            ('master_seed', self.master_seed),
            ('checkpoints', list(self.checkpoints)),
            ('threads', self.threads),
            ('keep_trajectories', self.keep_trajectories),
        ])

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise InvalidArgument("unknown experiment keys: %s" % sorted(unknown))
        missing = {'prior', 'learner1', 'learner2'} - set(data)
        if missing:
            raise InvalidArgument("experiment config is missing %s" % sorted(missing))
        kwargs = dict(
            prior=resolve_prior(data['prior']),
            signal_model=SignalModel.from_dict(data.get('signal_model', {})),
            spec1=LearnerSpec.from_dict(data['learner1']),
            spec2=LearnerSpec.from_dict(data['learner2']),
        )
        for key in ('horizon', 'trials', 'feedback_mode', 'pure_realization',
                    'master_seed', 'threads', 'keep_trajectories'):
            if key in data:
                kwargs[key] = data[key]
        horizon = kwargs.get('horizon', cls.horizon.default_value)
        kwargs['checkpoints'] = data.get('checkpoints') or default_checkpoints(horizon)
        return cls(**kwargs).check()


def _parse_value(text):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def apply_overrides(data, overrides):
    """
    Apply dotted-path overrides ("signal_model.p2=0.5") to a config dict.

    Values are parsed as Python literals when possible, else kept as strings.
    Every path must name a key that already exists.
    """
    data = copy.deepcopy(data)
    for item in overrides:
        path, eq, raw = item.partition('=')
        if not eq:
            raise InvalidArgument("override %r is not of the form key=value" % item)
        keys = path.strip().split('.')
        node = data
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise InvalidArgument("override %r names an unknown key %r" % (item, key))
            node = node[key]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise InvalidArgument("override %r names an unknown key %r" % (item, keys[-1]))
        node[keys[-1]] = _parse_value(raw.strip())
    return data


def _side_signal_exponent(spec):
    while spec.kind == 'mimic_deviation':
        spec = spec.base
    if spec.kind == 'external_signal_leader':
        return spec.params['accuracy_exponent']
    return None


def run_trial(cfg, trial_index):
    """
    Play one trial: draw the game and both signals, then run T rounds of
    act, act, observe, observe.

    Returns:
        the Trajectory of strategies as they were fed back
    """
    streams = trial_streams(cfg.master_seed, trial_index)
    nature = streams[STREAM_NATURE]
    prior = cfg.prior
    realized = int(nature.choice(prior.support_size, p=prior.weights))
    signals = (sample_signal(prior, realized, cfg.signal_model.p1, nature),
               sample_signal(prior, realized, cfg.signal_model.p2, nature))

    side_seeds = streams[STREAM_SIDE_SIGNALS].integers(2 ** 63, size=2)
    sources = {}
    learners = []
    for player, stream in ((1, STREAM_PLAYER1), (2, STREAM_PLAYER2)):
        exponent = _side_signal_exponent(cfg.spec(player))
        if exponent is not None:
            sources[player] = SideSignalSource(prior, realized, np.random.default_rng(side_seeds[player - 1]),
                                               exponent)
        learners.append(learner_init(cfg.spec(player), player, prior, signals[player - 1],
                                     streams[stream], sources.get(player)))
    first, second = learners

    game = prior.games[realized]
    n1, n2 = game.shape
    full = cfg.feedback_mode == 'full'
    realize = streams[STREAM_REALIZATION]
    xs = np.empty((cfg.horizon, n1))
    ys = np.empty((cfg.horizon, n2))
    for t in range(cfg.horizon):
        x = first.act()
        y = second.act()
        if cfg.pure_realization:
            x = pure_strategy(int(realize.choice(n1, p=x)), n1)
            y = pure_strategy(int(realize.choice(n2, p=y)), n2)
        first.observe(FeedbackRecord(x, y if full else None, x @ game.u1 @ y))
        second.observe(FeedbackRecord(y, x if full else None, x @ game.u2 @ y))
        xs[t] = x
        ys[t] = y

    side_signals = {player: np.array(source.history, dtype=int) for player, source in sources.items()}
    return Trajectory(xs, ys, realized, signals, side_signals)


TrialSummary = namedtuple('TrialSummary', [
    'trial', 'realized_game', 'signals', 'utilities', 'curves', 'csp_mass', 'trajectory'])


def summarize_trial(cfg, trial_index, traj):
    """Fold a trajectory into per-checkpoint averages; the trajectory is kept only on request."""
    game = cfg.prior.games[traj.realized_game_index]
    points = np.asarray(cfg.checkpoints, dtype=int)
    u1 = np.cumsum(np.einsum('ti,ij,tj->t', traj.xs, game.u1, traj.ys))
    u2 = np.cumsum(np.einsum('ti,ij,tj->t', traj.xs, game.u2, traj.ys))
    columns = [u1[points - 1] / points, u2[points - 1] / points]
    regrets = [regret_curves(traj, game, player, points) for player in (1, 2)]
    columns += [regrets[0][0] / points, regrets[1][0] / points, regrets[0][1] / points, regrets[1][1] / points]
    horizon = traj.horizon
    return TrialSummary(
        trial=trial_index,
        realized_game=traj.realized_game_index,
        signals=traj.signal_indices,
        utilities=np.array([u1[-1] / horizon, u2[-1] / horizon]),
        curves=np.stack(columns, axis=1),
        csp_mass=traj.xs.T @ traj.ys / horizon,
        trajectory=traj if cfg.keep_trajectories else None,
    )


def _trial_task(cfg_dict, trial_index, reducer):
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return reducer(cfg, trial_index, run_trial(cfg, trial_index))


def run_trials(cfg, reducer=summarize_trial):
    """
    Run every trial of cfg and return reducer(cfg, trial_index, trajectory)
    for each, in trial order. `reducer` must be picklable when threads > 1.
    """
    cfg.check()
    app_log.info("Running %d trials of %s vs %s, T=%d, %s feedback",
                 cfg.trials, cfg.spec1.label(), cfg.spec2.label(), cfg.horizon, cfg.feedback_mode)
    workers = min(cfg.threads, cfg.trials)
    if workers == 1:
        results = []
        for i in range(cfg.trials):
            results.append(reducer(cfg, i, run_trial(cfg, i)))
            app_log.debug("Trial %d/%d done", i + 1, cfg.trials)
        return results
    cfg_dict = cfg.to_dict()
    return Parallel(n_jobs=workers)(delayed(_trial_task)(cfg_dict, i, reducer) for i in range(cfg.trials))


def mean_ci(samples):
    """Mean and 95% normal-approximation half-width; the half-width is nan below two samples."""
    samples = np.asarray(samples, dtype=float)
    mean = float(samples.mean())
    if samples.size < 2:
        return mean, math.nan
    return mean, float(CI_Z * samples.std(ddof=1) / math.sqrt(samples.size))


def stratified_mean_ci(samples, realized, weights):
    """
    Prior-weighted mean sum_k w_k * mean(samples | realized == k) and its 95%
    half-width. Returns None when a game of positive weight was never realized.
    """
    samples = np.asarray(samples, dtype=float)
    realized = np.asarray(realized)
    mean = 0.0
    variance = 0.0
    for k, weight in enumerate(weights):
        if weight == 0.0:
            continue
        group = samples[realized == k]
        if group.size == 0:
            return None
        mean += weight * group.mean()
        if group.size > 1:
            variance += weight ** 2 * group.var(ddof=1) / group.size
    return float(mean), float(CI_Z * math.sqrt(variance))


def _json_number(value):
    return None if value is None or not np.isfinite(value) else float(value)


class EstimateReport:
    """
    Monte-Carlo estimates of the average utilities of an experiment.

    `trial_utilities` keeps the per-trial averages (trials x 2) so that
    deviation gains can be paired trial by trial.
    """
    def __init__(self, cfg, summaries):
        self.trials = len(summaries)
        self.checkpoints = list(cfg.checkpoints)
        self.labels = (cfg.spec1.label(cfg.prior.labels(1)), cfg.spec2.label(cfg.prior.labels(2)))
        self.trial_utilities = np.stack([s.utilities for s in summaries])
        self.mean_utilities = []
        self.ci_halfwidths = []
        for player in (0, 1):
            mean, half = mean_ci(self.trial_utilities[:, player])
            self.mean_utilities.append(mean)
            self.ci_halfwidths.append(half)

        # sum_k w_k * mean(u | G = k)
        self.realized_games = np.array([s.realized_game for s in summaries])
        self.prior_weights = cfg.prior.weights
        self._weighted = [stratified_mean_ci(self.trial_utilities[:, player], self.realized_games,
                                             self.prior_weights) for player in (0, 1)]

        self.by_game = self._conditional(summaries, lambda s: s.realized_game)
        self.by_signal_pair = self._conditional(summaries, lambda s: tuple(s.signals))

        curves = np.stack([s.curves for s in summaries])
        self.curves = curves.mean(axis=0)
        final = curves[:, -1, :]
        self.external_regret = final[:, 2:4].mean(axis=0)
        self.swap_regret = final[:, 4:6].mean(axis=0)
        self.trajectories = [s.trajectory for s in summaries if s.trajectory is not None]
        self._summaries = summaries

    def _conditional(self, summaries, key):
        groups = OrderedDict()
        for s in summaries:
            groups.setdefault(key(s), []).append(s.utilities)
        return OrderedDict((k, {'count': len(v), 'mean_utilities': np.mean(v, axis=0)})
                           for k, v in sorted(groups.items()))

    def mean_utility(self, player):
        return self.mean_utilities[player - 1]

    def ci(self, player):
        return self.ci_halfwidths[player - 1]

    def prior_weighted(self, player):
        """
        (mean, half-width) of the prior-weighted utility estimate; falls back
        to the plain sample mean when some game was never realized.
        """
        weighted = self._weighted[player - 1]
        if weighted is None:
            app_log.warning("Some game of the prior was never realized; using the sample mean")
            return self.mean_utility(player), self.ci(player)
        return weighted

    def conditional_mean(self, game_index, player):
        entry = self.by_game.get(game_index)
        return None if entry is None else float(entry['mean_utilities'][player - 1])

    def rows(self):
        for s in self._summaries:
            for t, values in zip(self.checkpoints, s.curves):
                yield [s.trial, s.realized_game, s.signals[0], s.signals[1], t] + [float(v) for v in values]

    def write_csv(self, path):
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(CSV_HEADER)
            writer.writerows(self.rows())

    def write_trajectories(self, output_dir):
        """One .npz file per retained trajectory; returns the written paths."""
        paths = []
        for s in self._summaries:
            if s.trajectory is None:
                continue
            path = os.path.join(output_dir, 'trajectory_%04d.npz' % s.trial)
            traj = s.trajectory
            np.savez(path, xs=traj.xs, ys=traj.ys, realized_game=traj.realized_game_index,
                     signals=np.array(traj.signal_indices),
                     **{'side_signals%d' % p: v for p, v in traj.side_signals.items()})
            paths.append(path)
        return paths

    def to_dict(self):
        return {
            'learners': list(self.labels),
            'trials': self.trials,
            'mean_utilities': [float(u) for u in self.mean_utilities],
            'ci95': [_json_number(h) for h in self.ci_halfwidths],
            'prior_weighted_utilities': [self.prior_weighted(p)[0] for p in (1, 2)],
            'prior_weighted_ci95': [_json_number(self.prior_weighted(p)[1]) for p in (1, 2)],
            'by_game': {str(k): {'count': v['count'], 'mean_utilities': v['mean_utilities'].tolist()}
                        for k, v in self.by_game.items()},
            'by_signal_pair': {'%d,%d' % k: {'count': v['count'], 'mean_utilities': v['mean_utilities'].tolist()}
                               for k, v in self.by_signal_pair.items()},
            'external_regret': self.external_regret.tolist(),
            'swap_regret': self.swap_regret.tolist(),
            'curves': {
                't': self.checkpoints,
                'columns': CSV_HEADER[5:],
                'means': self.curves.tolist(),
            },
        }


class CspReport:
    """
    Empirical CSPs bucketed by (realized game i, player-2 signal j), and the
    per-game mixtures CSP_i = sum_j phi_p2(j | i) CSP_ij.

    Buckets no trial landed in are absent, and so is any mixture that needs one.
    """
    def __init__(self, cfg, summaries):
        prior = cfg.prior
        self.p2 = cfg.signal_model.p2
        self.labels = (prior.labels(1), prior.labels(2))
        groups = OrderedDict()
        for s in summaries:
            groups.setdefault((s.realized_game, s.signals[1]), []).append(s.csp_mass)
        self.counts = OrderedDict((key, len(v)) for key, v in sorted(groups.items()))
        self.csp_by_signal_pair = OrderedDict((key, CSP(np.mean(v, axis=0))) for key, v in sorted(groups.items()))
        self.overall = CSP(np.mean([s.csp_mass for s in summaries], axis=0))

        self.csp_by_game = OrderedDict()
        for i in range(prior.support_size):
            parts = []
            for j in range(prior.support_size):
                weight = self.p2 * (i == j) + (1.0 - self.p2) * prior.weights[j]
                if weight > 0.0:
                    parts.append((weight, self.csp_by_signal_pair.get((i, j))))
            if parts and all(csp is not None for _, csp in parts):
                total = sum(w for w, _ in parts)
                self.csp_by_game[i] = mix_csps([(w / total, csp) for w, csp in parts])

    def mixture(self, game_index):
        return self.csp_by_game.get(game_index)

    def to_dict(self):
        labels1, labels2 = self.labels
        return {
            'p2': self.p2,
            'overall': self.overall.to_dict(labels1, labels2),
            'csp_by_signal_pair': {'%d,%d' % k: v.to_dict(labels1, labels2)
                                   for k, v in self.csp_by_signal_pair.items()},
            'counts': {'%d,%d' % k: v for k, v in self.counts.items()},
            'csp_by_game': {str(k): v.to_dict(labels1, labels2) for k, v in self.csp_by_game.items()},
        }


def run_experiment(cfg):
    return run_trials(cfg, summarize_trial)


def estimate(cfg, summaries=None):
    if summaries is None:
        summaries = run_experiment(cfg)
    report = EstimateReport(cfg, summaries)
    app_log.info("Mean utilities %.4f / %.4f over %d trials",
                 report.mean_utilities[0], report.mean_utilities[1], report.trials)
    return report


def estimate_csps(cfg, summaries=None):
    if summaries is None:
        summaries = run_experiment(cfg)
    return CspReport(cfg, summaries)
