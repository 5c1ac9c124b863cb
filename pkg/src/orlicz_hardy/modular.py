"""Modulars, Luxemburg norms and fractional Gagliardo seminorms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .quad import (
    GridFunction,
    NonlocalRule,
    QuadResult,
    LEVEL_ORDERS,
    dyadic_rule,
    gauss_legendre,
    integrate_fractional_double,
    near_diagonal_levels,
    power_tail_integral,
)
from .young import YoungFunction

__all__ = [
    "WeightSpec",
    "IntegrabilityError",
    "InfiniteNormError",
    "modular",
    "luxemburg_norm",
    "luxemburg_norm_result",
    "fractional_modular",
    "gagliardo_seminorm",
    "gagliardo_seminorm_result",
    "scaled_norm",
    "solve_unit_level",
]


class IntegrabilityError(ValueError):
    pass


class InfiniteNormError(ArithmeticError):
    pass


@dataclass(frozen=True)
class WeightSpec:
    """Integrand ``|u - u0| / x**s`` (``s = None`` means no weight)."""

    s: float | None = None
    u0: float = 0.0

    def __post_init__(self):
        # the Hardy-operator checks also use x**theta weights, so any real exponent is allowed
        if self.s is not None and not math.isfinite(self.s):
            raise ValueError(f"weight exponent must be finite, got {self.s}")

    @classmethod
    def none(cls) -> "WeightSpec":
        return cls()

    @classmethod
    def inverse_power(cls, s: float) -> "WeightSpec":
        return cls(s, 0.0)

    @classmethod
    def shifted(cls, s: float, u0: float) -> "WeightSpec":
        return cls(s, float(u0))

    @property
    def kind(self) -> str:
        if self.s is None:
            return "none"
        return "shifted" if self.u0 != 0 else "inverse_power"

    @property
    def exponent(self) -> float:
        return 0.0 if self.s is None else self.s


def _left_behaviour(u: GridFunction, F: YoungFunction, w: WeightSpec) -> float | None:
    """Power exponent of |u - u0| x**-s at 0, or None if it vanishes there."""
    kappa, beta, c0 = u.left
    sig = w.exponent
    if kappa != 0 and beta < 0:
        delta = beta - sig
    elif c0 != w.u0:
        delta = -sig
    elif kappa != 0:
        delta = beta - sig
    else:
        return None
    if delta < 0 and (delta * F.p_minus <= -1 or delta * F.p_plus <= -1):
        raise IntegrabilityError(
            f"weighted integrand not integrable at 0: left rule {u.left} (beta={beta}), "
            f"s={sig}, u0={w.u0}, p-={F.p_minus} (needs (beta - s) p > -1)")
    return delta


def _numeric_right_tail(r, F: YoungFunction, sig: float, xn: float, q: int,
                        chunk: int = 16, max_chunks: int = 43) -> tuple[float, float]:
    """``int_{xn}^inf G(|r(x)| x**-sig) dx`` through x = xn e**t on unit t-cells.

    Returns (value, geometric estimate of the piece beyond the last chunk);
    the value is ``inf`` when chunk contributions stop decaying.  t stays
    below ~700 so x = xn e**t is finite.
    """
    t, wt = gauss_legendre(q)
    total, prev, part = 0.0, None, 0.0
    for c in range(max_chunks):
        tt = (c * chunk + np.arange(chunk)[:, None] + t[None, :]).ravel()
        xs = xn * np.exp(tt)
        vals = F.G(np.abs(r(xs)) * xs**-sig) * xs
        part = float(np.dot(np.tile(wt, chunk), vals))
        total += part
        if prev is not None and part <= 1e-17 * total:
            ratio = part / prev if prev > 0 else 0.0
            return total, (part * ratio / (1.0 - ratio) if ratio < 1 else part)
        if prev is not None and c > 4 and part >= prev:
            return math.inf, 0.0
        prev_prev, prev = prev, part
    ratio = part / prev_prev if prev_prev else 1.0
    if ratio >= 1:
        return math.inf, 0.0
    return total, part * ratio / (1.0 - ratio)


def _modular_parts(u: GridFunction, F: YoungFunction, w: WeightSpec, q: int,
                   ell: float = math.inf) -> tuple[float, float, float]:
    """(value, omitted-piece bound, tail-quadrature error) at Gauss order q."""
    sig = w.exponent
    u0 = w.u0
    X, V = u.nodes, u.values
    x1 = X[0]
    val = 0.0
    bound = 0.0
    tail_err = 0.0

    # (0, min(x1, ell)): dyadic cells toward 0
    delta = _left_behaviour(u, F, w)
    a_end = min(x1, ell)
    if delta is not None:
        e = delta * (F.p_minus if delta >= 0 else F.p_plus)
        levels = int(min(400, math.ceil(50.0 / (1.0 + e))))
        t, wt = dyadic_rule(levels, q)
        xs = t * a_end
        val += a_end * float(np.dot(wt, F.G(np.abs(u(xs) - u0) * xs**-sig)))
        eps = a_end * 2.0**-levels
        bound += float(F.G(abs(float(u(np.array([eps]))[0]) - u0) * eps**-sig)) * eps / (1.0 + e)

    # interpolation cells, split at zero crossings of u - u0
    if ell > x1:
        Xc = X if ell >= X[-1] else np.concatenate([X[X < ell], [ell]])
        Vc = np.interp(Xc, X, V) - u0
        a, b = Xc[:-1], Xc[1:]
        va, vb = Vc[:-1], Vc[1:]
        cross = (va * vb) < 0
        c = a.copy()
        c[cross] = a[cross] + (b[cross] - a[cross]) * va[cross] / (va[cross] - vb[cross])
        lo = np.concatenate([a[~cross], a[cross], c[cross]])
        hi = np.concatenate([b[~cross], c[cross], b[cross]])
        t, wt = gauss_legendre(q)
        xs = lo[:, None] + (hi - lo)[:, None] * t[None, :]
        vals = np.abs(np.interp(xs, X, V) - u0) * xs**-sig
        val += float(np.sum(((hi - lo)[:, None] * wt[None, :]) * F.G(vals)))

    # beyond x_n
    if ell > X[-1]:
        K, gamma, cinf = u.right
        C = cinf - u0
        if u.right_fn is None and K == 0:
            C, dlt = C, -sig
        elif u.right_fn is None and C == 0:
            C, dlt = K, gamma - sig
        else:
            C, dlt = None, None
        if math.isinf(ell):
            if C is None:
                tv, tb = _numeric_right_tail(lambda x: u(x) - u0, F, sig, X[-1], q)
                if math.isinf(tv):
                    return math.inf, 0.0, 0.0
                val += tv
                bound += tb
            elif C == 0:
                pass
            elif dlt >= 0:
                return math.inf, 0.0, 0.0
            else:
                tail = power_tail_integral(F, C, dlt, X[-1])
                if not math.isfinite(tail.value):
                    return math.inf, 0.0, 0.0
                val += tail.value
                bound += tail.tail_bound
                tail_err += tail.abs_error_estimate
        else:
            edges = np.geomspace(X[-1], ell, 65)
            t, wt = gauss_legendre(q)
            xs = edges[:-1, None] + np.diff(edges)[:, None] * t[None, :]
            vals = F.G(np.abs(u(xs.ravel()) - u0).reshape(xs.shape) * xs**-sig)
            val += float(np.sum(np.diff(edges)[:, None] * wt * vals))
    return val, bound, tail_err


def modular(u: GridFunction, F: YoungFunction, w: WeightSpec | None = None, tol: float = 1e-10,
            ell: float = math.inf) -> QuadResult:
    """``int_0^ell G(|u(x) - u0| / x**s) dx`` with an error budget.

    The Gauss order on every cell doubles until two orders agree within
    ``tol * max(1, value)``; an infinite result is returned as ``inf`` with
    ``diverged=True``.
    """
    w = WeightSpec() if w is None else w
    if u.is_zero and w.u0 == 0:
        return QuadResult(0.0)
    prev = None
    res = None
    for q in (4, 8, 16, 32):
        val, bound, terr = _modular_parts(u, F, w, q, ell)
        if math.isinf(val):
            return QuadResult(math.inf, 0.0, 0.0, 0, converged=False, diverged=True)
        if prev is not None:
            err = abs(val - prev) + terr
            res = QuadResult(float(val), float(err), float(bound), q * u.nodes.size,
                             converged=bool(err <= tol * max(1.0, val)))
            if res.converged:
                break
        prev = val
    return res


def solve_unit_level(fn, tol: float = 1e-12, max_doublings: int = 200) -> float:
    """Root of the strictly decreasing map lam -> fn(lam) - 1 on (0, inf).

    Brackets by doubling/halving from 1, then refines with safeguarded
    bisection (Brent).  Raises :class:`InfiniteNormError` if fn stays above 1.
    """
    hi = 1.0
    f_hi = fn(hi)
    n = 0
    while not f_hi < 1.0:
        hi *= 2.0
        n += 1
        if n > max_doublings or not math.isfinite(hi):
            raise InfiniteNormError("modular never dropped below 1")
        f_hi = fn(hi)
    lo = hi / 2.0
    n = 0
    while fn(lo) <= 1.0:
        hi = lo
        lo /= 2.0
        n += 1
        if n > 2000 or lo == 0.0:
            return 0.0
    return brentq(lambda lam: fn(lam) - 1.0, lo, hi, xtol=1e-300, rtol=max(tol, 1e-15), maxiter=500)


def _norm_error(lam: float, budget: float, F: YoungFunction) -> float:
    # |d Phi(u/lam)/d lam| >= p- Phi / lam = p- / lam at the unit level
    return lam * budget / F.p_minus


def luxemburg_norm_result(u: GridFunction, F: YoungFunction, w: WeightSpec | None = None,
                          tol: float = 1e-10, ell: float = math.inf) -> QuadResult:
    """Luxemburg norm as a QuadResult (value, propagated error, tail part)."""
    w = WeightSpec() if w is None else w
    if u.is_zero and w.u0 == 0:
        return QuadResult(0.0)
    probe = modular(u, F, w, tol, ell)
    if probe.diverged:
        return QuadResult(math.inf, 0.0, 0.0, 0, converged=False, diverged=True)
    if probe.value == 0.0:
        return QuadResult(0.0)
    lams = []
    last = None
    for q in (8, 16):
        def fn(lam, q=q):
            v, _, _ = _modular_parts(u.scaled(1.0 / lam), F, WeightSpec(w.s, w.u0 / lam), q, ell)
            return v
        lams.append(solve_unit_level(fn))
        last = q
    lam = lams[-1]
    at = modular(u.scaled(1.0 / lam), F, WeightSpec(w.s, w.u0 / lam), tol, ell)
    err = abs(lams[1] - lams[0]) + _norm_error(lam, at.abs_error_estimate, F)
    return QuadResult(lam, err, _norm_error(lam, at.tail_bound, F), at.cells_used + last)


def luxemburg_norm(u: GridFunction, F: YoungFunction, w: WeightSpec | None = None,
                   tol: float = 1e-10, ell: float = math.inf) -> float:
    """``inf{lam > 0 : Phi_G(u/lam) <= 1}``; ``inf`` when the modular is infinite."""
    return luxemburg_norm_result(u, F, w, tol, ell).value


def scaled_norm(u: GridFunction, F: YoungFunction, eps: float, tol: float = 1e-10) -> float:
    """Luxemburg norm for the measure eps dx: ``inf{lam : eps Phi_G(u/lam) <= 1}``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if u.is_zero:
        return 0.0
    probe = modular(u, F, None, tol)
    if probe.diverged:
        return math.inf
    return solve_unit_level(lambda lam: eps * _modular_parts(u.scaled(1.0 / lam), F, WeightSpec(), 16)[0])


def fractional_modular(u: GridFunction, F: YoungFunction, s: float, tol: float = 1e-6) -> QuadResult:
    return integrate_fractional_double(u, F, s, tol)


def gagliardo_seminorm_result(u: GridFunction, F: YoungFunction, s: float, tol: float = 1e-6,
                              max_level: int = len(LEVEL_ORDERS) - 1) -> QuadResult:
    """``inf{lam : Phi_{s,G}(u/lam) <= 1}`` with Gauss order raised until stable."""
    if not 0 < s < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if u.is_zero:
        return QuadResult(0.0)
    mesh, U = u.working_mesh()
    if np.all(U == U[0]):
        return QuadResult(0.0)
    levels = near_diagonal_levels(s, F.p_minus)
    prev = None
    res = None
    for lv in range(max_level + 1):
        rule = NonlocalRule(mesh, s, LEVEL_ORDERS[lv], levels, ("right",))
        pa, ka = rule.arguments(U)
        lam = solve_unit_level(lambda l: rule.evaluate_args(F, pa, ka, 1.0 / l))
        if prev is not None:
            err = abs(lam - prev)
            tail = _norm_error(lam, rule.corner_bound(F, U, 1.0 / lam), F)
            res = QuadResult(lam, err, tail, rule.size, converged=err <= tol * max(1.0, lam))
            if res.converged:
                break
        prev = lam
    return res


def gagliardo_seminorm(u: GridFunction, F: YoungFunction, s: float, tol: float = 1e-6) -> float:
    return gagliardo_seminorm_result(u, F, s, tol).value
