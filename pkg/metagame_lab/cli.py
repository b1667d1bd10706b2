"""
metagame: command-line front end.

    metagame stackval --game=fig1_g2:gamma=1 --player=2
    metagame simulate --config=config/leader_vs_bandit.json --set=signal_model.p2=0.5
    metagame audit --config=config/reveal_follow.json --epsilon=0.1
    metagame claims --config=config/reveal_follow.json --p_star=0
    metagame reveal --prior=example41 --player=2
    metagame learn --config=config/external_signal.json --belief_kind=external_signal --tau=0.01

Reports are printed as JSON and also written to --output_dir. Exit status is
0 on success or a passing verdict, 2 on a failing verdict, 1 on errors.
"""
import json
import os
import sys

import requests
from tornado.log import app_log, define_logging_options
from tornado.options import Error as OptionsError
from tornado.options import OptionParser
from traitlets import TraitError

from .errors import InvalidArgument, MetagameError
from .ExperimentRunner import ExperimentConfig, apply_overrides, estimate, estimate_csps, run_experiment
from .gamefiles import load_json, resolve_game, resolve_prior
from .MetaGameAuditor import audit_pne, belief_trace, revelation_analysis, verify_claims
from .StackelbergSolver import stackelberg_value, stackval_prior

COMMANDS = ('stackval', 'simulate', 'audit', 'claims', 'reveal', 'learn')

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2

# flags that take no separate value word
BOOL_FLAGS = frozenset(['dump_trajectories', 'log_to_stderr', 'help'])


def make_parser():
    parser = OptionParser()
    parser.define('game', default='', help='game file, URI or builtin reference (e.g. fig1_g1:gamma=1)')
    parser.define('prior', default='', help='prior file, URI or builtin reference (e.g. fig1:gamma=1)')
    parser.define('player', default=None, type=int, help='player the command is about (1 or 2)')
    parser.define('config', default='', help='experiment config file or URI')
    parser.define('set', default=[], type=str, multiple=True,
                  help='comma separated dotted-path overrides, e.g. signal_model.p2=0.5')
    parser.define('seed', default=None, type=int, help='override the master seed')
    parser.define('trials', default=None, type=int, help='override the number of trials')
    parser.define('horizon', default=None, type=int, help='override the horizon T')
    parser.define('threads', default=None, type=int, help='maximum number of worker processes')
    parser.define('output_dir', default=os.environ.get('METAGAME_OUTPUT_DIR', './output'),
                  help='directory reports are written to')
    parser.define('epsilon', default=0.1, type=float, help='audit tolerance on deviation gains')
    parser.define('p_star', default=0.0, type=float, help='precision threshold of the fig1 family')
    parser.define('tol', default=0.05, type=float, help='tolerance of the claims checks')
    parser.define('belief_kind', default='utility_likelihood',
                  help='nearest_best_response, utility_likelihood or external_signal')
    parser.define('tau', default=0.05, type=float, help='error threshold for learning success')
    parser.define('dump_trajectories', default=False, type=bool, help='write every trajectory as .npz')
    define_logging_options(parser)
    return parser


def load_experiment(options):
    """Read --config and apply --set, --seed, --trials, --horizon, --threads on top."""
    if not options.config:
        raise InvalidArgument("this command needs --config")
    data = load_json(options.config)
    full = ExperimentConfig.from_dict(data).to_dict()
    overrides = [item for chunk in options.set for item in chunk.split(',') if item.strip()]
    full = apply_overrides(full, overrides)
    for flag, key in (('seed', 'master_seed'), ('trials', 'trials'), ('horizon', 'horizon'), ('threads', 'threads')):
        if getattr(options, flag) is not None:
            full[key] = getattr(options, flag)
    touched = any(item.split('=', 1)[0].strip() == 'checkpoints' for item in overrides)
    if 'checkpoints' not in data and not touched:
        full['checkpoints'] = []
    if options.dump_trajectories:
        full['keep_trajectories'] = True
    return ExperimentConfig.from_dict(full)


def _emit(options, name, report):
    text = json.dumps(report, indent=2)
    print(text)
    os.makedirs(options.output_dir, exist_ok=True)
    path = os.path.join(options.output_dir, '%s.json' % name)
    with open(path, 'w') as f:
        f.write(text + '\n')
    app_log.info("Wrote %s", path)


def _player(options, fallback):
    if options.player is None:
        return fallback
    if options.player not in (1, 2):
        raise InvalidArgument("--player must be 1 or 2, got %r" % options.player)
    return options.player


def cmd_stackval(options):
    player = _player(options, 1)
    if options.game:
        game = resolve_game(options.game)
        report = stackelberg_value(game, player).to_dict(game)
    elif options.prior:
        prior = resolve_prior(options.prior)
        report = {
            'player': player,
            'games': [dict(stackelberg_value(game, player).to_dict(game), weight=weight)
                      for game, weight in prior.entries],
            'value': stackval_prior(prior, player),
        }
    else:
        raise InvalidArgument("stackval needs --game or --prior")
    _emit(options, 'stackval', report)
    return EXIT_OK


def cmd_simulate(options):
    cfg = load_experiment(options)
    summaries = run_experiment(cfg)
    report = estimate(cfg, summaries)
    os.makedirs(options.output_dir, exist_ok=True)
    csv_path = os.path.join(options.output_dir, 'simulate.csv')
    report.write_csv(csv_path)
    app_log.info("Wrote %s", csv_path)
    if cfg.keep_trajectories:
        paths = report.write_trajectories(options.output_dir)
        app_log.info("Wrote %d trajectories to %s", len(paths), options.output_dir)
    _emit(options, 'simulate', {
        'estimate': report.to_dict(),
        'csps': estimate_csps(cfg, summaries).to_dict(),
        'csv': csv_path,
    })
    return EXIT_OK


def cmd_audit(options):
    report = audit_pne(load_experiment(options), epsilon=options.epsilon)
    _emit(options, 'audit', report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_claims(options):
    report = verify_claims(load_experiment(options), options.p_star, options.tol)
    _emit(options, 'claims', report.to_dict())
    return EXIT_OK


def cmd_reveal(options):
    if not options.prior:
        raise InvalidArgument("reveal needs --prior")
    report = revelation_analysis(resolve_prior(options.prior), _player(options, 2))
    _emit(options, 'reveal', report)
    return EXIT_OK


def cmd_learn(options):
    report = belief_trace(load_experiment(options), options.belief_kind, options.tau, _player(options, None))
    _emit(options, 'learn', report.to_dict())
    return EXIT_OK if report.success else EXIT_FAIL


def join_flag_values(parser, argv):
    """Rewrite "--flag value" pairs as "--flag=value" for the value-taking flags parser defines."""
    joined = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        name = arg[2:].replace('-', '_')
        following = argv[i + 1] if i + 1 < len(argv) else None
        if (arg.startswith('--') and '=' not in arg and name in parser and name not in BOOL_FLAGS
                and following is not None and not following.startswith('--')):
            arg = '%s=%s' % (arg, following)
            i += 1
        joined.append(arg)
        i += 1
    return joined


HANDLERS = {
    'stackval': cmd_stackval,
    'simulate': cmd_simulate,
    'audit': cmd_audit,
    'claims': cmd_claims,
    'reveal': cmd_reveal,
    'learn': cmd_learn,
}


def main(argv=None):
    """
    Entry point. tornado.options only reads "--flag=value" and stops at the first
    positional argument, so "--flag value" pairs are joined and the command
    word is taken out before the flags are parsed.
    """
    parser = make_parser()
    argv = join_flag_values(parser, sys.argv[1:] if argv is None else argv)
    commands = [arg for arg in argv if not arg.startswith('-')]
    if len(commands) != 1 or commands[0] not in HANDLERS:
        print("usage: metagame {%s} [--option=value ...]" % ','.join(COMMANDS), file=sys.stderr)
        return EXIT_ERROR
    argv.remove(commands[0])
    try:
        parser.parse_command_line(['metagame'] + argv)
    except (OptionsError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_ERROR

    try:
        return HANDLERS[commands[0]](parser)
    except json.JSONDecodeError as e:
        print("error: malformed JSON at line %d column %d: %s" % (e.lineno, e.colno, e.msg), file=sys.stderr)
    except (MetagameError, TraitError, OSError, requests.RequestException) as e:
        print("error: %s" % e, file=sys.stderr)
    return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
