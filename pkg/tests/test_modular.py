import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from oracles import hat, hat_slope, lp_norm, riemann_gagliardo_p
from orlicz_hardy import corpus
from orlicz_hardy.modular import (
    InfiniteNormError,
    IntegrabilityError,
    WeightSpec,
    gagliardo_seminorm,
    luxemburg_norm,
    luxemburg_norm_result,
    modular,
    scaled_norm,
    solve_unit_level,
)
from orlicz_hardy.quad import GridFunction
from orlicz_hardy.young import YoungFunction

P2 = YoungFunction.power(2)
LOG = YoungFunction.log_perturbed(1, 2, 1)
EXP = corpus.make("powerdecay", {"beta": 0.0}).function
XEXP = corpus.make("powerdecay", {"beta": 1.0}).function
HAT = corpus.make("hat", {"L": 2.0}).function
BUMP = corpus.make("bump").function
ZERO = GridFunction([1.0, 2.0], [0.0, 0.0])
# fine interpolants for the closed-form examples; the PL error is O(h^2), about 1e-6 here
EXP_FINE = corpus.make("powerdecay", {"beta": 0.0}, 2000).function
XEXP_FINE = corpus.make("powerdecay", {"beta": 1.0}, 2000).function


def test_modular_examples():
    assert modular(EXP_FINE, P2).value == pytest.approx(0.25, abs=2e-6)
    assert modular(ZERO, P2).value == 0.0
    s = 0.75
    exact = gamma(2 * (1 - s) + 1) / (2 * 2 ** (2 * (1 - s) + 1))
    assert exact == pytest.approx(0.1567, abs=5e-5)
    r = modular(XEXP_FINE, P2, WeightSpec.inverse_power(s))
    assert r.value == pytest.approx(exact, abs=2e-6)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_modular_hat_closed_form(p):
    assert modular(HAT, YoungFunction.power(p)).value == pytest.approx(2.0 / (p * (p + 1)), rel=1e-10)


def test_modular_rejects_nonintegrable_weight():
    # u(0+) = 1, so |u| / x^s with s p = 1.5 blows up non-integrably at 0
    with pytest.raises(IntegrabilityError) as info:
        modular(EXP, P2, WeightSpec.inverse_power(0.75))
    assert "0.75" in str(info.value) or "s" in str(info.value)
    # subtracting u0 = u(0+) restores integrability
    assert math.isfinite(modular(EXP, P2, WeightSpec.shifted(0.75, 1.0)).value)


def test_luxemburg_examples():
    assert luxemburg_norm(EXP_FINE, P2) == pytest.approx(0.5, abs=2e-6)
    assert luxemburg_norm(ZERO, P2) == 0.0


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("name", ["hat", "bump", "xexp"])
def test_luxemburg_power_identity(p, name):
    u = {"hat": HAT, "bump": BUMP, "xexp": XEXP}[name]
    # independent oracle: adaptive quadrature of |u|^p with breaks at the nodes
    ref = p ** (-1.0 / p) * lp_norm(lambda x: float(u(np.array([x]))[0]), p, 0.0, u.x_end,
                                    points=u.nodes[u.nodes < u.x_end])
    r = luxemburg_norm_result(u, YoungFunction.power(p))
    assert r.value == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("F", [P2, LOG, YoungFunction.power(1.5)], ids=lambda F: F.label)
@pytest.mark.parametrize("u", [HAT, BUMP, XEXP], ids=["hat", "bump", "xexp"])
def test_unit_ball_identity_and_monotone_relation(F, u):
    tol = 1e-10
    lam = luxemburg_norm(u, F, tol=tol)
    assert lam > 0
    assert modular(u.scaled(1 / lam), F, tol=tol).value == pytest.approx(1.0, abs=10 * tol + 1e-9)
    assert modular(u.scaled(1 / (0.9 * lam)), F).value > 1.0
    assert modular(u.scaled(1 / (1.1 * lam)), F).value < 1.0


@given(c=st.floats(-20.0, 20.0).filter(lambda c: abs(c) > 1e-3))
def test_norm_absolute_homogeneity(c):
    a = luxemburg_norm(HAT, LOG)
    b = luxemburg_norm(HAT.scaled(c), LOG)
    assert b == pytest.approx(abs(c) * a, rel=1e-8)


@pytest.mark.parametrize("F", [P2, LOG], ids=lambda F: F.label)
def test_triangle_inequality_on_corpus_pairs(F):
    fns = [HAT, BUMP, XEXP, EXP]
    for i, u in enumerate(fns):
        for v in fns[i + 1:]:
            # the sum is only sampled from the first shared node on; the piece below 1e-12 is negligible
            nodes = np.union1d(u.nodes, v.nodes)
            w = GridFunction(nodes, u(nodes) + v(nodes))
            lhs = luxemburg_norm(w, F)
            assert lhs <= luxemburg_norm(u, F) + luxemburg_norm(v, F) + 1e-8


def test_weighted_norm_infinite():
    # x / x^s has no decay at infinity once the modular is unweighted there
    u = GridFunction([1.0, 2.0], [1.0, 1.0], left=(1.0, 0.0, 0.0), right=(1.0, 0.0, 0.0))
    assert math.isinf(luxemburg_norm(u, P2))
    with pytest.raises(InfiniteNormError):
        solve_unit_level(lambda lam: 2.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
@given(eps=st.floats(1e-3, 1e3))
def test_scaled_norm_power_homogeneity(p, eps):
    F = YoungFunction.power(p)
    assert scaled_norm(HAT, F, eps) == pytest.approx(eps ** (1 / p) * luxemburg_norm(HAT, F), rel=1e-8)


@pytest.mark.parametrize("F", [P2, LOG], ids=lambda F: F.label)
def test_scaled_norm_examples(F):
    assert scaled_norm(BUMP, F, 1.0) == pytest.approx(luxemburg_norm(BUMP, F), rel=1e-9)
    phi_u = modular(BUMP, F).value
    assert scaled_norm(BUMP, F, 1.0 / phi_u) <= 1.0 + 1e-10
    with pytest.raises(ValueError):
        scaled_norm(BUMP, F, 0.0)


def test_seminorm_zero_and_power_oracle():
    assert gagliardo_seminorm(ZERO, P2, 0.5) == 0.0
    for p, s in [(2.0, 0.6), (3.0, 0.5)]:
        classical = riemann_gagliardo_p(hat, hat_slope, p, s, 2.0) ** (1 / p)
        got = gagliardo_seminorm(HAT, YoungFunction.power(p), s, tol=1e-8)
        assert got == pytest.approx(p ** (-1 / p) * classical, rel=1e-2)


@pytest.mark.parametrize("F", [P2, LOG], ids=lambda F: F.label)
def test_seminorm_constant_shift_invariant(F):
    a = gagliardo_seminorm(BUMP, F, 0.6, tol=1e-8)
    b = gagliardo_seminorm(BUMP.shifted(3.0), F, 0.6, tol=1e-8)
    assert b == pytest.approx(a, rel=1e-7)


def test_weight_spec_kinds():
    assert WeightSpec().kind == "none"
    assert WeightSpec.inverse_power(0.5).kind == "inverse_power"
    assert WeightSpec.shifted(0.5, 2.0).kind == "shifted"
    with pytest.raises(ValueError):
        WeightSpec(math.inf)
