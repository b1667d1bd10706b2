"""
Meta-game analysis on top of the engine: approximate pure-Nash audits
against a finite library of deviations, the claims verifier for the
imperfect-signal construction, one-round revelation analysis, and belief
meters measuring whether a player learns the realized game.

A pass of audit_pne is evidence at a fixed horizon against the deviations
tried, not a proof of equilibrium.
"""
from collections import OrderedDict
from functools import partial
import math

import numpy as np
from tornado.log import app_log

from .errors import InvalidArgument
from .ExperimentRunner import CI_Z, estimate, run_experiment, run_trials, stratified_mean_ci
from .gamefiles import fig1_g1, fig1_g2, gamma_from_threshold
from .games import SUM_TOL
from .learners import LearnerSpec
from .StackelbergSolver import VALUE_TIE_TOL, stackelberg_value, stackval_prior

CONSISTENCY_TOL = 1e-6
CLAIMS_Z = 1.645

BELIEF_KINDS = ('nearest_best_response', 'utility_likelihood', 'external_signal')


def _lower(value, half):
    return value - (0.0 if math.isnan(half) else half)


def _upper(value, half):
    return value + (0.0 if math.isnan(half) else half)


def _json(value):
    return None if value is None or (isinstance(value, float) and not math.isfinite(value)) else value


class DeviationLibrary:
    """Deviations tried against each player, in the order ties are reported."""
    def __init__(self, deviations):
        self.deviations = {player: list(deviations.get(player, [])) for player in (1, 2)}

    @classmethod
    def default(cls, cfg):
        """
        Per player: mimicking every signal with the player's own algorithm, the
        Stackelberg leader, the best responder and (player 2) infer-then-commit
        when feedback allows, then every constant action.
        """
        prior = cfg.prior
        full = cfg.feedback_mode == 'full'
        deviations = {}
        for player in (1, 2):
            base = cfg.spec(player)
            specs = [LearnerSpec.mimic(base, k) for k in range(prior.support_size)]
            specs.append(LearnerSpec('stackelberg_leader'))
            specs.append(LearnerSpec('best_responder'))
            specs.append(LearnerSpec('infer_then_commit_follower'))
            specs += [LearnerSpec.constant(a) for a in range(prior.num_actions(player))]
            deviations[player] = [spec for spec in specs
                                  if player in spec.allowed_roles and (full or not spec.requires_full_information)]
        return cls(deviations)

    def __getitem__(self, player):
        return self.deviations[player]


class DeviationResult:
    def __init__(self, player, spec, label, gain, half, deviated_utility):
        self.player = player
        self.spec = spec
        self.label = label
        self.gain = float(gain)
        self.half = float(half)
        self.deviated_utility = float(deviated_utility)

    @property
    def lower(self):
        return _lower(self.gain, self.half)

    def to_dict(self):
        return {
            'player': self.player,
            'deviation': self.label,
            'spec': self.spec.to_dict(),
            'gain': self.gain,
            'ci95': _json(self.half),
            'deviated_utility': self.deviated_utility,
        }


def deviation_gain(cfg, player, spec, baseline=None, common_random_numbers=True):
    """
    Estimated gain of `player` from replacing its algorithm by `spec`.

    With common random numbers the deviated run reuses the baseline's seeds
    and the gain is the prior-weighted mean of per-trial differences; otherwise
    the deviated run uses the next master seed and the two variances add.
    """
    if baseline is None:
        baseline = estimate(cfg)
    if common_random_numbers:
        deviated = estimate(cfg.replace_spec(player, spec))
        diffs = deviated.trial_utilities[:, player - 1] - baseline.trial_utilities[:, player - 1]
        stratified = stratified_mean_ci(diffs, baseline.realized_games, baseline.prior_weights)
        if stratified is None:
            gain, half = float(diffs.mean()), (CI_Z * float(diffs.std(ddof=1)) / math.sqrt(diffs.size)
                                                if diffs.size > 1 else math.nan)
        else:
            gain, half = stratified
    else:
        shifted = cfg.copy(master_seed=(cfg.master_seed + 1) % 2 ** 64)
        deviated = estimate(shifted.replace_spec(player, spec))
        dev_mean, dev_half = deviated.prior_weighted(player)
        base_mean, base_half = baseline.prior_weighted(player)
        gain = dev_mean - base_mean
        half = math.sqrt(dev_half ** 2 + base_half ** 2)
    label = spec.label(cfg.prior.labels(player))
    app_log.debug("Player %d deviating to %s: gain %.4f +- %.4f", player, label, gain, half)
    return DeviationResult(player, spec, label, gain, half, deviated.prior_weighted(player)[0])


class AuditReport:
    def __init__(self, epsilon, baseline, results):
        self.epsilon = float(epsilon)
        self.baseline = [baseline.prior_weighted(player) for player in (1, 2)]
        self.results = results
        self.max_gain = {}
        for player in (1, 2):
            own = [r for r in results if r.player == player]
            self.max_gain[player] = _first_max(own)
        failing = [r for r in results if r.lower > self.epsilon]
        self.failure = _first_max(failing)

    @property
    def passed(self):
        return self.failure is None

    @property
    def verdict(self):
        if self.passed:
            return 'pass'
        return 'fail(%d, %s)' % (self.failure.player, self.failure.label)

    def to_dict(self):
        return {
            'epsilon': self.epsilon,
            'baseline_utilities': [u for u, _ in self.baseline],
            'baseline_ci95': [_json(h) for _, h in self.baseline],
            'deviations': [r.to_dict() for r in self.results],
            'max_gain': {str(p): (r.to_dict() if r is not None else None) for p, r in self.max_gain.items()},
            'verdict': self.verdict,
            'passed': self.passed,
        }


def _first_max(results):
    """Largest gain; near-ties go to the earliest result."""
    if not results:
        return None
    best = max(r.gain for r in results)
    return next(r for r in results if r.gain >= best - VALUE_TIE_TOL)


def audit_pne(cfg, lib=None, epsilon=0.1, common_random_numbers=True):
    """
    Re-run the experiment with each deviation of the library swapped in for
    one player. Fails when some gain's lower 95% bound exceeds epsilon.
    """
    if not epsilon > 0:
        raise InvalidArgument("epsilon must be positive, got %r" % epsilon)
    if lib is None:
        lib = DeviationLibrary.default(cfg)
    baseline = estimate(cfg)
    results = []
    for player in (1, 2):
        for spec in lib[player]:
            results.append(deviation_gain(cfg, player, spec, baseline, common_random_numbers))
    report = AuditReport(epsilon, baseline, results)
    app_log.info("Audit of %s vs %s at epsilon=%g: %s",
                 cfg.spec1.label(), cfg.spec2.label(), epsilon, report.verdict)
    return report


def _check_fig1_family(prior, gamma):
    games = (fig1_g1(gamma), fig1_g2(gamma))
    if (prior.support_size != 2
            or not all(abs(w - 0.5) <= SUM_TOL for w in prior.weights)
            or not all(g.same_payoffs(expected) for g, expected in zip(prior.games, games))):
        raise InvalidArgument("the claims verifier needs the uniform prior over fig1_g1 and fig1_g2 with gamma=%.6g"
                              % gamma)


def _mixture_cell(summaries, prior, p2, game_index, cell):
    """A cell of CSP_i with its 95% half-width, or (None, nan) if a needed bucket is empty."""
    value = 0.0
    variance = 0.0
    for j in range(prior.support_size):
        weight = p2 * (game_index == j) + (1.0 - p2) * prior.weights[j]
        if weight == 0.0:
            continue
        masses = np.array([s.csp_mass[cell] for s in summaries
                           if s.realized_game == game_index and s.signals[1] == j])
        if masses.size == 0:
            return None, math.nan
        value += weight * masses.mean()
        if masses.size > 1:
            variance += weight ** 2 * masses.var(ddof=1) / masses.size
    return float(value), float(CLAIMS_Z * math.sqrt(variance))


class ClaimsReport:
    def __init__(self, gamma, tol, cells, utility2, benchmark, gain):
        self.gamma = gamma
        self.tol = tol
        self.cells = cells
        self.utility2 = utility2
        self.benchmark = benchmark
        self.gain = gain
        bound = gamma / 8.0 + tol
        self.checks = OrderedDict([
            ('csp1_BD', cells['csp1_BD'][0] is not None and _upper(*cells['csp1_BD']) <= bound),
            ('csp1_AD', cells['csp1_AD'][0] is not None and _upper(*cells['csp1_AD']) <= bound),
            ('csp2_BD', cells['csp2_BD'][0] is not None and _lower(*cells['csp2_BD']) >= 0.5 - tol),
        ])
        self.benchmark_achieved = utility2[0] >= benchmark - tol
        self.contradiction = self.benchmark_achieved and all(self.checks.values()) and gain.lower > 0.0

    @property
    def claims_hold(self):
        return all(self.checks.values())

    def to_dict(self):
        return {
            'gamma': self.gamma,
            'tol': self.tol,
            'cells': {name: {'mass': value, 'ci95': _json(half)} for name, (value, half) in self.cells.items()},
            'checks': dict(self.checks),
            'claims_hold': self.claims_hold,
            'utility2': self.utility2[0],
            'utility2_ci95': _json(self.utility2[1]),
            'benchmark': self.benchmark,
            'benchmark_achieved': self.benchmark_achieved,
            'mimic_gain': self.gain.to_dict(),
            'contradiction': self.contradiction,
        }


def verify_claims(cfg, p_star, tol=0.05):
    """
    On the fig1 family with gamma = (1 - p*)/(1 + p*), estimate the CSP cells
    CSP_1(B,D), CSP_1(A,D) and CSP_2(B,D) with one-sided 95% bounds, check
    whether player 2 reaches its Stackelberg benchmark, and estimate player 1's
    gain from always acting as if the game were the first one.
    """
    gamma = gamma_from_threshold(p_star)
    prior = cfg.prior
    _check_fig1_family(prior, gamma)
    p2 = cfg.signal_model.p2
    if p2 > p_star + SUM_TOL:
        raise InvalidArgument("player 2's precision %.6g exceeds the threshold p*=%.6g" % (p2, p_star))

    summaries = run_experiment(cfg)
    baseline = estimate(cfg, summaries)
    cells = OrderedDict([
        ('csp1_BD', _mixture_cell(summaries, prior, p2, 0, (1, 1))),
        ('csp1_AD', _mixture_cell(summaries, prior, p2, 0, (0, 1))),
        ('csp2_BD', _mixture_cell(summaries, prior, p2, 1, (1, 1))),
    ])
    gain = deviation_gain(cfg, 1, LearnerSpec.mimic(cfg.spec1, 0), baseline)
    report = ClaimsReport(gamma, tol, cells, baseline.prior_weighted(2), stackval_prior(prior, 2), gain)
    app_log.info("Claims at gamma=%.4g: claims %s, benchmark %s, contradiction %s",
                 gamma, report.claims_hold, report.benchmark_achieved, report.contradiction)
    return report


def revelation_analysis(prior, player):
    """
    For each of `player`'s actions, the range of utilities it can earn in each
    game of the prior. An action is revealing when these closed ranges are
    pairwise disjoint, so one round of own-utility feedback identifies the game.
    """
    if prior.support_size < 2:
        raise InvalidArgument("revelation needs a prior over at least two games")
    matrices = prior.own_matrices(player)
    actions = OrderedDict()
    for a, label in enumerate(prior.labels(player)):
        lows = matrices[:, a, :].min(axis=1)
        highs = matrices[:, a, :].max(axis=1)
        order = np.argsort(lows, kind='stable')
        revealing = bool(np.all(highs[order][:-1] < lows[order][1:]))
        actions[label] = {
            'ranges': [[float(lo), float(hi)] for lo, hi in zip(lows, highs)],
            'revealing': revealing,
        }
    return {
        'player': player,
        'games': [game.name for game in prior.games],
        'actions': actions,
        'any_revealing': any(entry['revealing'] for entry in actions.values()),
    }


def _evaluation_points(cfg):
    return sorted(set(cfg.checkpoints) | {cfg.horizon})


def _nearest_response_beliefs(cfg, traj, player, points):
    prior = cfg.prior
    n_opp = prior.num_actions(3 - player)
    responses = np.zeros((prior.support_size, n_opp))
    for k, game in enumerate(prior.games):
        responses[k, stackelberg_value(game, player).follower_action] = 1.0
    played = np.cumsum(traj.opponent(player), axis=0)
    beliefs = []
    for t in points:
        if t == 1:
            beliefs.append(prior.mode())
            continue
        average = played[t - 2] / (t - 1)
        distances = np.abs(responses - average).sum(axis=1)
        nearest = np.flatnonzero(distances <= distances.min() + 1e-12)
        beliefs.append(prior.mode(among=nearest))
    return beliefs


def _likelihood_beliefs(cfg, traj, player, points):
    prior = cfg.prior
    own, opp = traj.own(player), traj.opponent(player)
    observed = np.einsum('ti,ij,tj->t', own, prior.games[traj.realized_game_index].own_matrix(player), opp)
    inconsistent = []
    for matrix in prior.own_matrices(player):
        if cfg.feedback_mode == 'full':
            predicted = np.einsum('ti,ij,tj->t', own, matrix, opp)
            bad = np.abs(predicted - observed) > CONSISTENCY_TOL
        else:
            attainable = own @ matrix
            bad = ((observed < attainable.min(axis=1) - CONSISTENCY_TOL)
                   | (observed > attainable.max(axis=1) + CONSISTENCY_TOL))
        inconsistent.append(np.cumsum(bad))
    inconsistent = np.stack(inconsistent)
    beliefs = []
    for t in points:
        if t == 1:
            consistent = range(prior.support_size)
        else:
            consistent = np.flatnonzero(inconsistent[:, t - 2] == 0)
        beliefs.append(prior.mode(among=consistent) if len(consistent) else prior.mode())
    return beliefs


def _side_signal_beliefs(cfg, traj, player, points):
    signals = traj.side_signals.get(player)
    if signals is None:
        raise InvalidArgument("player %d receives no external side signals" % player)
    return [int(signals[t - 1]) for t in points]


_BELIEFS = {
    'nearest_best_response': _nearest_response_beliefs,
    'utility_likelihood': _likelihood_beliefs,
    'external_signal': _side_signal_beliefs,
}


def belief_errors(cfg, trial_index, traj, belief_kind, player):
    """1.0 where the belief held before round t names the wrong game, per evaluation point."""
    beliefs = _BELIEFS[belief_kind](cfg, traj, player, _evaluation_points(cfg))
    return np.array([belief != traj.realized_game_index for belief in beliefs], dtype=float)


class BeliefTraceReport:
    def __init__(self, belief_kind, player, tau, checkpoints, errors):
        self.belief_kind = belief_kind
        self.player = player
        self.tau = float(tau)
        self.checkpoints = list(checkpoints)
        self.errors = np.asarray(errors, dtype=float)
        self.final_error = float(self.errors[-1])
        self.success = self.final_error <= self.tau

    def to_dict(self):
        return {
            'belief_kind': self.belief_kind,
            'player': self.player,
            'tau': self.tau,
            'checkpoints': self.checkpoints,
            'error': self.errors.tolist(),
            'final_error': self.final_error,
            'success': self.success,
        }


def _default_belief_player(cfg, belief_kind):
    if belief_kind == 'nearest_best_response':
        return 1
    if belief_kind == 'external_signal':
        for player in (1, 2):
            spec = cfg.spec(player)
            while spec.kind == 'mimic_deviation':
                spec = spec.base
            if spec.kind == 'external_signal_leader':
                return player
        raise InvalidArgument("external_signal beliefs need an external_signal_leader in the pair")
    return 2


def belief_trace(cfg, belief_kind, tau, player=None):
    """
    Probability, over trials, that `player`'s belief before round t names a
    game other than the realized one, at every checkpoint and at T.

    nearest_best_response classifies the opponent's average strategy by the
    nearest follower response of the Stackelberg games `player` leads;
    utility_likelihood keeps the games consistent with every observed utility;
    external_signal believes the latest side signal.
    """
    if belief_kind not in BELIEF_KINDS:
        raise InvalidArgument("unknown belief kind %r (known: %s)" % (belief_kind, ', '.join(BELIEF_KINDS)))
    if not 0.0 <= tau <= 1.0:
        raise InvalidArgument("tau must lie in [0, 1], got %r" % tau)
    if player is None:
        player = _default_belief_player(cfg, belief_kind)
    if belief_kind == 'nearest_best_response' and cfg.prior.support_size != 2:
        raise InvalidArgument("nearest_best_response classifies between exactly two games")
    per_trial = run_trials(cfg, partial(belief_errors, belief_kind=belief_kind, player=player))
    report = BeliefTraceReport(belief_kind, player, tau, _evaluation_points(cfg), np.mean(per_trial, axis=0))
    app_log.info("Belief %s of player %d: final error %.4f (tau %.4g)",
                 belief_kind, player, report.final_error, tau)
    return report