"""
The algorithm zoo: every learner implements the act/observe protocol of
strategies.Learner and is built from a declarative LearnerSpec.
"""
from ..errors import InvalidArgument
from .commitment import ExternalSignalLeader, InferThenCommitFollower, RevealThenFollowLeader, StackelbergLeader
from .noregret import Exp3, MultiplicativeWeights, NoSwapRegretBandit, NoSwapRegretFull
from .regret import RegretReport, external_regret, regret_curves, swap_regret
from .spec import KINDS, LearnerSpec
from .strategies import BestResponder, ConstantAction, Learner

LEARNER_CLASSES = {
    'constant_action': ConstantAction,
    'multiplicative_weights': MultiplicativeWeights,
    'bandit_exp3': Exp3,
    'no_swap_regret_full': NoSwapRegretFull,
    'no_swap_regret_bandit': NoSwapRegretBandit,
    'stackelberg_leader': StackelbergLeader,
    'best_responder': BestResponder,
    'reveal_then_follow_leader': RevealThenFollowLeader,
    'infer_then_commit_follower': InferThenCommitFollower,
    'external_signal_leader': ExternalSignalLeader,
}


def learner_init(spec, role, prior, signal, rng, side_signals=None):
    """
    Build the per-trial state of `spec` playing as `role`.

    A mimic_deviation builds its base learner with the fixed signal in place
    of the one it received; everything else is unchanged.
    """
    if role not in (1, 2):
        raise InvalidArgument("role must be 1 or 2, got %r" % (role,))
    if role not in spec.allowed_roles:
        raise InvalidArgument("%s can only play as player %s" % (spec.kind, ' or '.join(map(str, spec.allowed_roles))))
    signal = prior.check_index(signal)
    if spec.kind == 'mimic_deviation':
        fixed = spec.params['fixed_signal']
        if fixed >= prior.support_size:
            raise InvalidArgument("mimic signal %d out of range for a prior of %d games" % (fixed, prior.support_size))
        return learner_init(spec.base, role, prior, fixed, rng, side_signals)
    return LEARNER_CLASSES[spec.kind](spec, role, prior, signal, rng, side_signals)


def learner_act(state):
    return state.act()


def learner_observe(state, fb):
    state.observe(fb)
    return state


__all__ = [
    'KINDS', 'LEARNER_CLASSES', 'Learner', 'LearnerSpec', 'RegretReport',
    'external_regret', 'learner_act', 'learner_init', 'learner_observe',
    'regret_curves', 'swap_regret',
]
