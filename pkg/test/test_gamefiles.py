import json

import numpy as np
import pytest

from metagame_lab import gamefiles
from metagame_lab.errors import InvalidArgument
from metagame_lab.gamefiles import (example41_prior, fig1_g1, gamma_from_threshold, is_uri, load_json,
                                    parse_ref, resolve_game, resolve_prior)


def test_fig1_matrices_scale_with_gamma():
    g = resolve_game('fig1_g1:gamma=0.5')
    assert np.array_equal(g.u1, [[32, 32], [2, 0]])
    assert np.array_equal(g.u2, [[1, -64], [0, 2]])
    g2 = resolve_game('fig1_g2')
    assert np.array_equal(g2.u1, [[1, 0], [0.9, 0.1]])
    assert g.labels(1) == ('A', 'B')
    assert g.labels(2) == ('C', 'D')


def test_example41_matrices():
    prior = example41_prior()
    assert np.array_equal(prior.games[0].u2, [[1, 5], [2, 5]])
    assert np.array_equal(prior.games[1].u2, [[3, 0], [7, 8]])
    assert np.array_equal(prior.games[0].u1, prior.games[1].u1)


def test_gamma_bounds():
    with pytest.raises(InvalidArgument):
        fig1_g1(0.0)
    with pytest.raises(InvalidArgument):
        resolve_game('fig1_g1:gamma=2')
    assert gamma_from_threshold(0.0) == 1.0
    assert gamma_from_threshold(1.0 / 3.0) == pytest.approx(0.5)
    with pytest.raises(InvalidArgument):
        gamma_from_threshold(1.0)


def test_parse_ref():
    assert parse_ref('fig1:gamma=0.25') == ('fig1', {'gamma': 0.25})
    assert parse_ref('example41') == ('example41', {})
    with pytest.raises(InvalidArgument):
        parse_ref('fig1:gamma')
    with pytest.raises(InvalidArgument):
        parse_ref('fig1:gamma=x')


def test_builtin_priors():
    prior = resolve_prior('fig1:gamma=1')
    assert prior.support_size == 2
    assert np.array_equal(prior.weights, [0.5, 0.5])
    single = resolve_prior('fig1_g2')
    assert single.support_size == 1
    swapped = resolve_prior('example41_swapped')
    assert np.array_equal(swapped.games[1].u1, example41_prior().games[1].u2.T)
    with pytest.raises(InvalidArgument):
        resolve_prior('example41:gamma=0.5')


def test_prior_from_objects():
    prior = resolve_prior({'games': [
        {'weight': 0.25, 'game': 'fig1_g1'},
        {'weight': 0.75, 'game': {'u1': [[1, 0], [0, 1]], 'u2': [[0, 1], [1, 0]]}},
    ]})
    assert prior.games[1].name == 'game'
    assert prior.mode() == 1
    with pytest.raises(InvalidArgument):
        resolve_prior({'games': [{'game': 'fig1_g1'}]})
    with pytest.raises(InvalidArgument):
        resolve_prior({'weights': []})


def test_game_round_trips_through_a_file(tmp_path):
    path = tmp_path / 'game.json'
    path.write_text(json.dumps(fig1_g1().to_dict()))
    assert resolve_game(str(path)).same_payoffs(fig1_g1())
    assert resolve_prior(str(path)).support_size == 1


def test_malformed_json_reports_position(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"u1": [[1, 2]],\n "u2": [[1 2]]}')
    with pytest.raises(json.JSONDecodeError) as info:
        load_json(str(path))
    assert info.value.lineno == 2


def test_game_object_missing_keys():
    with pytest.raises(InvalidArgument):
        resolve_game({'u1': [[1]]})


def test_is_uri():
    assert is_uri('https://example.org/prior.json')
    assert not is_uri('config/leader_vs_bandit.json')
    assert not is_uri('fig1:gamma=1')


class FakeResponse:
    def __init__(self, text):
        self.text = text

    def raise_for_status(self):
        pass


def test_load_json_fetches_uris(monkeypatch):
    calls = []

    def fake_get(url, timeout):
        calls.append(url)
        return FakeResponse(json.dumps({'games': [{'weight': 1.0, 'game': 'example41_g2'}]}))

    monkeypatch.setattr(gamefiles.requests, 'get', fake_get)
    prior = resolve_prior('https://example.org/prior.json')
    assert calls == ['https://example.org/prior.json']
    assert prior.games[0].name == 'example41_g2'
