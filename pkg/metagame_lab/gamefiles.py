"""
Loading games, priors and configs from JSON files, URIs or builtin references.

Builtin references are strings such as "fig1_g1:gamma=0.5" or "example41".
The builtin families carry the exact matrices of the constructions they are
named after, so tests never depend on hand-entered data.
"""
import json
from urllib.parse import urlparse

import requests
from tornado.log import app_log

from .errors import InvalidArgument
from .games import GameMatrix, Prior


def is_uri(filename):
    parse_result = urlparse(filename)
    return len(parse_result.scheme) > 0 and len(parse_result.netloc) > 0


def load_json(path_or_uri):
    """
    Read a JSON document from a local file or a URI.

    Malformed documents raise json.JSONDecodeError, which carries the line and
    column of the problem.
    """
    if is_uri(path_or_uri):
        app_log.debug("Fetching %s", path_or_uri)
        response = requests.get(path_or_uri, timeout=30)
        response.raise_for_status()
        return json.loads(response.text)
    with open(path_or_uri) as f:
        return json.load(f)


def _check_gamma(gamma):
    if not 0.0 < gamma <= 1.0:
        raise InvalidArgument("gamma must lie in (0, 1], got %r" % gamma)
    return float(gamma)


def fig1_g1(gamma=1.0):
    gamma = _check_gamma(gamma)
    return GameMatrix('fig1_g1',
                      [[16.0 / gamma, 16.0 / gamma], [2.0, 0.0]],
                      [[1.0, -32.0 / gamma], [0.0, 2.0]],
                      ['A', 'B'], ['C', 'D'])


def fig1_g2(gamma=1.0):
    gamma = _check_gamma(gamma)
    return GameMatrix('fig1_g2',
                      [[1.0, 0.0], [0.9, 0.1]],
                      [[1.0, -32.0 / gamma], [0.0, 2.0]],
                      ['A', 'B'], ['C', 'D'])


def example41_g1():
    return GameMatrix('example41_g1',
                      [[1.0, -1.0], [0.0, 2.0]],
                      [[1.0, 5.0], [2.0, 5.0]],
                      ['A', 'B'], ['C', 'D'])


def example41_g2():
    return GameMatrix('example41_g2',
                      [[1.0, -1.0], [0.0, 2.0]],
                      [[3.0, 0.0], [7.0, 8.0]],
                      ['A', 'B'], ['C', 'D'])


def gamma_from_threshold(p_star):
    """gamma = (1 - p*) / (1 + p*) for a precision threshold p* in [0, 1)."""
    if not 0.0 <= p_star < 1.0:
        raise InvalidArgument("p_star must lie in [0, 1), got %r" % p_star)
    return (1.0 - p_star) / (1.0 + p_star)


def fig1_prior(gamma=1.0):
    return Prior.uniform([fig1_g1(gamma), fig1_g2(gamma)])


def example41_prior():
    return Prior.uniform([example41_g1(), example41_g2()])


BUILTIN_GAMES = {
    'fig1_g1': fig1_g1,
    'fig1_g2': fig1_g2,
    'example41_g1': example41_g1,
    'example41_g2': example41_g2,
}

BUILTIN_PRIORS = {
    'fig1': fig1_prior,
    'example41': example41_prior,
    'fig1_swapped': lambda gamma=1.0: fig1_prior(gamma).swap_roles(),
    'example41_swapped': lambda: example41_prior().swap_roles(),
}


def parse_ref(ref):
    """
    Split "name:key=value,key=value" into the name and a dict of float parameters.
    """
    name, _, params = ref.partition(':')
    kwargs = {}
    for item in filter(None, (p.strip() for p in params.split(','))):
        key, eq, value = item.partition('=')
        if not eq:
            raise InvalidArgument("malformed builtin parameter %r in %r" % (item, ref))
        try:
            kwargs[key.strip()] = float(value)
        except ValueError:
            raise InvalidArgument("parameter %r of %r is not a number" % (key, ref))
    return name.strip(), kwargs


def _call_builtin(table, ref):
    name, kwargs = parse_ref(ref)
    try:
        return table[name](**kwargs)
    except TypeError:
        raise InvalidArgument("builtin %r does not accept parameters %s" % (name, sorted(kwargs)))


def _builtin_name(ref):
    if not isinstance(ref, str) or is_uri(ref):
        return None
    return ref.partition(':')[0].strip()


def is_builtin_game(ref):
    return _builtin_name(ref) in BUILTIN_GAMES


def is_builtin_prior(ref):
    return _builtin_name(ref) in BUILTIN_PRIORS


def resolve_game(ref):
    """A game from a builtin reference, a file path / URI, or an already parsed game object."""
    if isinstance(ref, GameMatrix):
        return ref
    if isinstance(ref, dict):
        return GameMatrix.from_dict(ref)
    if is_builtin_game(ref):
        return _call_builtin(BUILTIN_GAMES, ref)
    if isinstance(ref, str):
        return GameMatrix.from_dict(load_json(ref))
    raise InvalidArgument("cannot interpret %r as a game" % (ref,))


def resolve_prior(ref):
    """
    A prior from a builtin reference ("fig1:gamma=1"), a single builtin game, a
    file path / URI, or a parsed {"games": [{"weight": w, "game": ...}]} object.
    """
    if isinstance(ref, Prior):
        return ref
    if isinstance(ref, str):
        if is_builtin_prior(ref):
            return _call_builtin(BUILTIN_PRIORS, ref)
        if is_builtin_game(ref):
            return Prior.single(_call_builtin(BUILTIN_GAMES, ref))
        return resolve_prior(load_json(ref))
    if isinstance(ref, dict):
        if 'u1' in ref:
            return Prior.single(GameMatrix.from_dict(ref))
        if 'games' not in ref:
            raise InvalidArgument("prior object needs a 'games' list")
        entries = []
        for entry in ref['games']:
            try:
                entries.append((resolve_game(entry['game']), float(entry['weight'])))
            except KeyError as e:
                raise InvalidArgument("prior entry is missing key %s" % e)
        return Prior(entries)
    raise InvalidArgument("cannot interpret %r as a prior" % (ref,))
