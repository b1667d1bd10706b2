from copy import deepcopy

from ..errors import InvalidArgument

_EPOCH_DEFAULTS = {'b': 0.25, 'a': 0.5, 'initial_epoch': 64}

# kind -> default parameters; None means "use the anytime schedule"
KINDS = {
    'constant_action': {'action': 0},
    'multiplicative_weights': {'eta': None},
    'bandit_exp3': {'eta': None, 'exploration': None},
    'no_swap_regret_full': {'eta': None},
    'no_swap_regret_bandit': {'eta': None, 'exploration': None},
    'stackelberg_leader': dict(_EPOCH_DEFAULTS),
    'best_responder': {},
    'mimic_deviation': {'base': None, 'fixed_signal': 0},
    'reveal_then_follow_leader': {},
    'infer_then_commit_follower': {},
    'external_signal_leader': dict(_EPOCH_DEFAULTS, accuracy_exponent=1.0),
}

FULL_INFORMATION_KINDS = frozenset([
    'multiplicative_weights', 'no_swap_regret_full', 'best_responder',
    'reveal_then_follow_leader', 'infer_then_commit_follower',
])

ROLE_RESTRICTIONS = {
    'reveal_then_follow_leader': (1,),
    'infer_then_commit_follower': (2,),
}


class LearnerSpec:
    """
    Declarative description of a repeated-game algorithm: a kind plus its
    parameters. JSON form: {"kind": str, "params": {...}}.
    """
    def __init__(self, kind, params=None):
        if kind not in KINDS:
            raise InvalidArgument("unknown learner kind %r (known: %s)" % (kind, ', '.join(sorted(KINDS))))
        params = dict(params or {})
        unknown = set(params) - set(KINDS[kind])
        if unknown:
            raise InvalidArgument("learner %s does not take parameters %s" % (kind, sorted(unknown)))
        merged = deepcopy(KINDS[kind])
        merged.update(params)
        self.kind = kind
        self.params = merged
        self.base = None
        if kind == 'mimic_deviation':
            base = merged['base']
            if base is None:
                raise InvalidArgument("mimic_deviation needs a base learner")
            self.base = base if isinstance(base, LearnerSpec) else LearnerSpec.from_dict(base)
            self.params['base'] = self.base
        self._validate()

    def _validate(self):
        p = self.params
        if p.get('eta') is not None and not p['eta'] > 0:
            raise InvalidArgument("eta must be positive, got %r" % p['eta'])
        if p.get('exploration') is not None and not 0.0 <= p['exploration'] <= 1.0:
            raise InvalidArgument("exploration must lie in [0, 1], got %r" % p['exploration'])
        if 'b' in p:
            if not (0.0 < p['a'] < 1.0 and 0.0 < p['b'] < 1.0 - p['a']):
                raise InvalidArgument("need 0 < b < 1 - a with a in (0, 1), got a=%r b=%r" % (p['a'], p['b']))
            if int(p['initial_epoch']) != p['initial_epoch'] or p['initial_epoch'] < 1:
                raise InvalidArgument("initial_epoch must be a positive integer")
        if 'accuracy_exponent' in p and not p['accuracy_exponent'] > 0:
            raise InvalidArgument("accuracy_exponent must be positive")
        for key in ('action', 'fixed_signal'):
            if key in p and (int(p[key]) != p[key] or p[key] < 0):
                raise InvalidArgument("%s must be a nonnegative integer, got %r" % (key, p[key]))

    @classmethod
    def constant(cls, action):
        return cls('constant_action', {'action': action})

    @classmethod
    def mimic(cls, base, fixed_signal):
        if base.kind == 'mimic_deviation':
            base = base.base
        return cls('mimic_deviation', {'base': base, 'fixed_signal': fixed_signal})

    @property
    def requires_full_information(self):
        if self.base is not None:
            return self.base.requires_full_information
        return self.kind in FULL_INFORMATION_KINDS

    @property
    def allowed_roles(self):
        if self.base is not None:
            return self.base.allowed_roles
        return ROLE_RESTRICTIONS.get(self.kind, (1, 2))

    def label(self, action_labels=None):
        """Short name used in reports, e.g. const:A or mimic:G1."""
        if self.kind == 'constant_action':
            action = self.params['action']
            return 'const:%s' % (action_labels[action] if action_labels else action)
        if self.kind == 'mimic_deviation':
            return 'mimic:G%d' % (self.params['fixed_signal'] + 1)
        return self.kind

    def to_dict(self):
        params = dict(self.params)
        if self.base is not None:
            params['base'] = self.base.to_dict()
        return {'kind': self.kind, 'params': params}

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            return cls(data)
        try:
            return cls(data['kind'], data.get('params'))
        except (KeyError, TypeError, AttributeError):
            raise InvalidArgument("learner spec must look like {\"kind\": ..., \"params\": {...}}, got %r" % (data,))

    def __eq__(self, other):
        return isinstance(other, LearnerSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))

    def __repr__(self):
        return 'LearnerSpec(%r, %r)' % (self.kind, self.to_dict()['params'])
