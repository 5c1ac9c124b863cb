import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from orlicz_hardy import corpus
from orlicz_hardy.hardy import (
    NoLimitError,
    OutOfRegimeError,
    cesaro_limit,
    cesaro_limit_result,
    check_classical_hardy,
    check_local_lemma,
    check_modular_hardy,
    check_norm_hardy,
    check_palmieri,
    compute_constants,
    hardy_operator,
    make_report,
    palmieri_const,
    reconstruct,
    v_decompose,
)
from orlicz_hardy.quad import GridFunction, QuadResult
from orlicz_hardy.young import YoungFunction

P2 = YoungFunction.power(2)
LOG = YoungFunction.log_perturbed(1, 2, 1)
ZERO = GridFunction([1.0, 2.0], [0.0, 0.0])
XEXP = corpus.make("powerdecay", {"beta": 1.0}).function
HAT = corpus.make("hat", {"L": 2.0}).function
BUMP = corpus.make("bump").function
IND = corpus.make("indicator", {"ell": 1.0}).function
CAP = corpus.make("powergrowth_cap", {"M": 1.0}).function
U0_ZERO = [("powerdecay", {"beta": 0.6}), ("powerdecay", {"beta": 1.0}), ("hat", {"L": 2.0}),
           ("bump", {}), ("powergrowth_cap", {"M": 1.0})]


# --- constants ---------------------------------------------------------------

def test_constants_examples():
    c = compute_constants(P2, 0.75)
    assert c.c_H == pytest.approx(16.0, rel=1e-14)
    assert c.C_doubling == 4.0
    assert c.C_H == pytest.approx(68.0, rel=1e-14)
    assert c.norm_const_thm == pytest.approx(5.0, rel=1e-14)
    assert c.norm_const_cor == pytest.approx(math.sqrt(68), rel=1e-12)
    assert c.norm_const_cor == pytest.approx(8.246, abs=5e-4)
    assert c.norm_const_thm < c.norm_const_cor
    assert c.palmieri_const(0.25) == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(OutOfRegimeError):
        compute_constants(P2, 0.5)
    with pytest.raises(OutOfRegimeError):
        compute_constants(P2, 1.0)
    with pytest.raises(OutOfRegimeError):
        palmieri_const(2.0, 0.5)


@given(pm=st.floats(1.1, 5.0), dp=st.floats(0.0, 3.0), frac=st.floats(0.01, 0.99))
def test_constants_positive_in_regime(pm, dp, frac):
    s = (1.0 / pm) + frac * (1.0 - 1.0 / pm)
    F = YoungFunction.custom(lambda t: t, lambda t: t, pm, pm + dp)
    c = compute_constants(F, s)
    for v in (c.c_H, c.C_H, c.norm_const_thm, c.norm_const_cor):
        assert math.isfinite(v) and v > 0
    assert c.C_H > c.C_doubling


# --- Cesaro limit and decomposition -------------------------------------------

def test_cesaro_examples():
    assert cesaro_limit(corpus.make("powerdecay", {"beta": 0.0}).function) == pytest.approx(1.0, abs=1e-9)
    assert cesaro_limit(CAP) == pytest.approx(0.0, abs=1e-12)
    r = cesaro_limit_result(corpus.make("powerdecay", {"beta": 0.6}).function)
    assert abs(r.value) < 1e-6 and r.error < 1e-6


def test_cesaro_no_limit():
    # left rule x^-0.5 is integrable but the mean blows up
    u = GridFunction([1e-6, 1.0], [1e3, 1.0], left=(1.0, -0.5, 0.0))
    with pytest.raises(NoLimitError):
        cesaro_limit(u)


def test_v_decompose_examples():
    assert v_decompose(ZERO).is_zero
    v = v_decompose(CAP)
    x = CAP.nodes[CAP.nodes <= 1.0]
    assert np.allclose(v(x), x / 2, rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError):
        v_decompose(IND)


@pytest.mark.parametrize("family,params", U0_ZERO, ids=lambda v: str(v))
def test_reconstruction_identity(family, params):
    u = corpus.make(family, params, 10_000).function
    err = np.max(np.abs(reconstruct(u) - u(u.nodes)))
    assert err < 1e-6


# --- Hardy operator ----------------------------------------------------------

def test_hardy_operator_examples():
    H = hardy_operator(IND, 0.0)
    x = np.array([0.2, 0.5, 0.9, 2.0, 5.0, 40.0])
    assert np.allclose(H(x), np.minimum(x, 1.0) / x, atol=2e-9)
    assert hardy_operator(ZERO, 0.3).is_zero or np.all(hardy_operator(ZERO, 0.3)(x) == 0)
    H = hardy_operator(CAP, 1.0)
    xs = H.nodes[H.nodes <= 1.0]
    assert np.allclose(H(xs), xs**2 / 2, rtol=1e-12)


# --- checkers ----------------------------------------------------------------

def test_palmieri_hand_instance():
    r = check_palmieri(IND, P2, 0.0)
    assert r.constant == pytest.approx(2.0)
    assert r.lhs.value == pytest.approx(1.0, abs=1e-6)
    assert r.rhs.value == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    assert r.ratio == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    assert r.passed
    assert check_palmieri(ZERO, P2, 0.0).passed
    assert check_palmieri(XEXP, P2, 0.25).constant == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(OutOfRegimeError):
        check_palmieri(XEXP, P2, 0.6)


@pytest.mark.parametrize("theta", [-0.75, -0.3, 0.0, 0.25, 0.45])
@pytest.mark.parametrize("F", [P2, LOG, YoungFunction.power(3)], ids=lambda F: F.label)
def test_palmieri_holds_on_corpus(theta, F):
    if theta >= 1 - 1 / F.p_minus:
        pytest.skip("outside the admissible range")
    for u in (XEXP, HAT, BUMP):
        r = check_palmieri(u, F, theta)
        assert r.applicable and r.passed and r.ratio <= 1.0


def test_local_lemma_examples():
    assert check_local_lemma(ZERO, P2, 0.75).passed
    r = check_local_lemma(XEXP, P2, 0.75)
    assert r.applicable and r.ratio <= 1 and r.passed
    r = check_local_lemma(HAT, YoungFunction.power(1.5), 0.8)
    assert r.applicable and r.passed


def test_modular_hardy_examples():
    const = GridFunction([1.0, 2.0], [3.0, 3.0], left=(0.0, 1.0, 3.0), right=(0.0, 0.0, 3.0))
    r = check_modular_hardy(const, P2, 0.75)
    assert r.lhs.value == 0 and r.passed
    r = check_modular_hardy(XEXP, P2, 0.75)
    exact = gamma(2 * (1 - 0.75) + 1) / (2 * 2 ** (2 * (1 - 0.75) + 1))
    # PL interpolation at the default resolution moves the value by about 1e-4
    assert r.lhs.value == pytest.approx(exact, rel=2e-3)
    assert r.ratio <= 1 and r.passed
    r = check_modular_hardy(BUMP, YoungFunction.power(3), 0.5)
    assert r.passed and r.ratio <= 1


def test_norm_hardy_examples():
    const = GridFunction([1.0, 2.0], [3.0, 3.0], left=(0.0, 1.0, 3.0), right=(0.0, 0.0, 3.0))
    r = check_norm_hardy(const, P2, 0.75, "corollary")
    assert r.lhs.value == 0 and r.passed
    t = check_norm_hardy(XEXP, P2, 0.75, "theorem")
    c = check_norm_hardy(XEXP, P2, 0.75, "corollary")
    assert t.constant == pytest.approx(5.0) and c.constant == pytest.approx(math.sqrt(68))
    assert t.constant < c.constant
    assert t.passed and t.ratio <= 1 and c.passed
    with pytest.raises(ValueError):
        check_norm_hardy(XEXP, P2, 0.75, "lemma")


def test_classical_examples():
    assert check_classical_hardy(ZERO, 2.0).passed
    r = check_classical_hardy(HAT, 2.0)
    assert r.lhs.value == pytest.approx(1 + 3 - 4 * math.log(2), rel=1e-8)
    assert r.rhs.value == pytest.approx(2.0, rel=1e-12)
    assert r.constant == 4.0
    assert r.ratio == pytest.approx(0.1534, abs=1e-4) and r.passed
    assert check_classical_hardy(HAT, 1.5).passed


def test_report_invariants():
    r = make_report("x", QuadResult(1.0, 0.01), QuadResult(1.0, 0.01), 1.0)
    assert r.ratio == 1.0 and r.passed and r.budget == pytest.approx(0.02)
    r = make_report("x", QuadResult(1.2), QuadResult(1.0), 1.0)
    assert not r.passed
    with pytest.raises(ValueError):
        make_report("x", QuadResult(1.0), QuadResult(1.0), 0.0)


# --- properties --------------------------------------------------------------

@settings(max_examples=10)
@given(c=st.floats(-5.0, 5.0))
def test_shift_covariance(c):
    a = check_modular_hardy(BUMP, P2, 0.75)
    b = check_modular_hardy(BUMP.shifted(c), P2, 0.75)
    assert abs(a.lhs.value - b.lhs.value) <= a.lhs.budget + b.lhs.budget + 1e-12
    assert abs(a.rhs.value - b.rhs.value) <= a.rhs.budget + b.rhs.budget + 1e-12 * a.rhs.value


@pytest.mark.parametrize("F", [P2, LOG], ids=lambda F: F.label)
def test_regime_trend(F):
    """Ratios shrink as s p- approaches 1 from above (C_H blows up)."""
    ratios, consts = [], []
    for target in (1.5, 1.2, 1.05):
        r = check_modular_hardy(HAT, F, target / F.p_minus)
        ratios.append(r.ratio)
        consts.append(r.constant)
    assert consts[0] < consts[1] < consts[2]
    assert ratios[0] > ratios[1] > ratios[2]


@pytest.mark.parametrize("family,params", U0_ZERO[1:4], ids=lambda v: str(v))
def test_pass_monotone_in_tolerance(family, params):
    u = corpus.make(family, params).function
    loose = check_modular_hardy(u, P2, 0.75, tol=1e-3)
    tight = check_modular_hardy(u, P2, 0.75, tol=1e-8)
    assert not (loose.passed and not tight.passed)
    assert tight.budget <= loose.budget + 1e-15
    assert abs(tight.ratio - loose.ratio) <= loose.budget + tight.budget
