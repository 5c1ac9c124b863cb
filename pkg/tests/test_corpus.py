import math

import numpy as np
import pytest

from orlicz_hardy import corpus
from orlicz_hardy.hardy import cesaro_limit
from orlicz_hardy.modular import WeightSpec, modular
from orlicz_hardy.young import YoungFunction

ALL = [(f, {}) for f in corpus.FAMILIES] + [("powerdecay", {"beta": 0.0}),
                                            ("powerdecay", {"beta": 0.6}),
                                            ("hat", {"L": 3.0}),
                                            ("powergrowth_cap", {"M": 2.5})]


def test_examples():
    e = corpus.make("powerdecay", {"beta": 0.0})
    x = np.linspace(0.1, 5, 7)
    assert np.allclose(e.function(x), np.exp(-x), rtol=0, atol=2e-3)
    assert e.analytic_u0 == 1.0
    h = corpus.make("hat", {"L": 2.0})
    assert h.analytic_u0 == 0.0
    assert float(h.function(np.array([1.0]))[0]) == 1.0
    assert np.all(h.function(np.array([2.0, 2.5, 10.0])) == 0.0)
    pd = corpus.make("powerdecay", {"beta": 1.0})
    val, note = pd.closed_forms["weighted_modular[p=2,s=0.75]"]
    assert val == pytest.approx(math.gamma(1.5) / (2 * 2**1.5), rel=1e-14)
    assert note


@pytest.mark.parametrize("family,params", ALL, ids=lambda v: str(v))
def test_refinement_nesting_exact(family, params):
    a = corpus.make(family, params, 50).function
    b = corpus.make(family, params, 100).function
    shared = np.intersect1d(a.nodes, b.nodes)
    assert shared.size >= a.nodes.size - 2
    assert np.array_equal(a(shared), b(shared))


@pytest.mark.parametrize("family,params", ALL, ids=lambda v: str(v))
def test_analytic_u0_matches_cesaro(family, params):
    e = corpus.make(family, params)
    if e.analytic_u0 is None:
        pytest.skip("no analytic value")
    assert cesaro_limit(e.function) == pytest.approx(e.analytic_u0, abs=1e-5)


@pytest.mark.parametrize("family,params", [("powerdecay", {"beta": -1.0}), ("hat", {"L": 0.0}),
                                           ("bump", {"radius": 2.0}), ("powergrowth_cap", {"M": -1}),
                                           ("hat", {"width": 1.0}), ("sawtooth", {})])
def test_invalid_params_rejected(family, params):
    with pytest.raises(ValueError):
        corpus.make(family, params)


def test_from_dict_and_ids():
    e = corpus.from_dict({"family": "hat", "L": 2.0})
    assert e.id == "hat(L=2)"
    assert corpus.from_dict({"family": "hat", "L": 2.0, "resolution": 30}).function.nodes.size < \
        e.function.nodes.size


def test_default_corpus_deterministic():
    a = corpus.default_corpus(40)
    b = corpus.default_corpus(40)
    assert [x.id for x in a] == [x.id for x in b]
    for x, y in zip(a, b):
        assert np.array_equal(x.function.values, y.function.values)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_closed_form_modulars(p):
    F = YoungFunction.power(p)
    for beta in (0.0, 1.0):
        e = corpus.make("powerdecay", {"beta": beta}, 2000)
        assert modular(e.function, F).value == pytest.approx(e.closed_form("modular", p), rel=2e-5)
    h = corpus.make("hat", {"L": 2.0})
    assert modular(h.function, F).value == pytest.approx(h.closed_form("modular", p), rel=1e-10)
    e = corpus.make("powerdecay", {"beta": 1.0}, 2000)
    w = modular(e.function, F, WeightSpec.inverse_power(0.75)).value
    assert w == pytest.approx(e.closed_form("weighted_modular", p, 0.75), rel=5e-5)
