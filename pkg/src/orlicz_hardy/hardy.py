"""Hardy-type inequality checkers and their explicit constants.

Each checker returns an :class:`InequalityReport`.  A report passes when
``lhs / (constant * rhs) <= 1 + budget``, with ``budget`` the relative error
budget propagated from both sides.  The inequalities are verified for the
discrete function exactly as represented (piecewise-linear interpolant with
its end rules), so discretization of a smooth profile is not an error source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modular import (
    IntegrabilityError,
    WeightSpec,
    fractional_modular,
    gagliardo_seminorm_result,
    luxemburg_norm_result,
    modular,
)
from .quad import GridFunction, QuadResult, gauss_legendre
from .young import YoungFunction, phi, psi

__all__ = [
    "OutOfRegimeError",
    "NoLimitError",
    "HardyConstants",
    "InequalityReport",
    "CesaroResult",
    "compute_constants",
    "cesaro_limit",
    "cesaro_limit_result",
    "v_decompose",
    "reconstruct",
    "hardy_operator",
    "check_palmieri",
    "check_local_lemma",
    "check_modular_hardy",
    "check_norm_hardy",
    "check_classical_hardy",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("name", "g_kind", "p_minus", "p_plus", "s", "item", "constant", "lhs", "rhs",
               "ratio", "budget", "pass", "status", "note")


class OutOfRegimeError(ValueError):
    """Parameters outside the range where the inequality is claimed."""


class NoLimitError(ArithmeticError):
    """The Cesaro means do not settle as x -> 0."""


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class HardyConstants:
    s: float
    p_minus: float
    p_plus: float
    c_H: float
    C_doubling: float
    C_H: float
    norm_const_thm: float
    norm_const_cor: float

    @property
    def p_minus_conj(self) -> float:
        return self.p_minus / (self.p_minus - 1.0)

    def palmieri_const(self, theta: float) -> float:
        return palmieri_const(self.p_minus, theta)

    def to_dict(self) -> dict:
        return {"s": self.s, "p_minus": self.p_minus, "p_plus": self.p_plus, "c_H": self.c_H,
                "C_doubling": self.C_doubling, "C_H": self.C_H,
                "norm_const_thm": self.norm_const_thm, "norm_const_cor": self.norm_const_cor}


def palmieri_const(p_minus: float, theta: float) -> float:
    pc = p_minus / (p_minus - 1.0)
    if not theta < 1.0 / pc:
        raise OutOfRegimeError(f"theta={theta} must be below 1/(p-)' = {1.0 / pc}")
    return pc / (1.0 - theta * pc)


def _require_regime(F: YoungFunction, s: float) -> None:
    if not 0 < s < 1:
        raise OutOfRegimeError(f"s must lie in (0, 1), got {s}")
    if not s * F.p_minus > 1:
        raise OutOfRegimeError(f"sp- <= 1 (s={s}, p-={F.p_minus})")


def compute_constants(F: YoungFunction, s: float) -> HardyConstants:
    _require_regime(F, s)
    pm, pp = F.p_minus, F.p_plus
    c_H = float(psi(pm / (s * pm - 1.0), pm, pp))
    C = 2.0**pp
    C_H = C * (1.0 + c_H)
    return HardyConstants(s, pm, pp, c_H, C, C_H, ((1.0 + s) * pm - 1.0) / (s * pm - 1.0),
                          float(phi(C_H, pm, pp)))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: QuadResult
    rhs: QuadResult
    constant: float
    ratio: float
    passed: bool
    budget: float
    status: str = "ok"
    note: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return self.status == "ok"

    def to_row(self) -> dict:
        m = self.meta
        return {
            "name": self.name,
            "g_kind": m.get("g_kind", ""),
            "p_minus": _fmt(m.get("p_minus")),
            "p_plus": _fmt(m.get("p_plus")),
            "s": _fmt(m.get("s")),
            "item": m.get("item", ""),
            "constant": _fmt(self.constant),
            "lhs": _fmt(self.lhs.value),
            "rhs": _fmt(self.rhs.value),
            "ratio": _fmt(self.ratio),
            "budget": _fmt(self.budget),
            "pass": "true" if self.passed else "false",
            "status": self.status,
            "note": self.note,
        }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def _meta(F: YoungFunction | None, s, item: str = "") -> dict:
    if F is None:
        return {"s": s, "item": item}
    return {"g_kind": F.label, "p_minus": F.p_minus, "p_plus": F.p_plus, "s": s, "item": item}


def make_report(name: str, lhs: QuadResult, rhs: QuadResult, constant: float,
                meta: dict | None = None, note: str = "") -> InequalityReport:
    if not constant > 0:
        raise ValueError("constant must be positive")
    L, R = lhs.value, rhs.value
    if L == 0:
        ratio = 0.0
        budget = lhs.budget / (constant * R) if R > 0 else 0.0
    elif R == 0 or math.isinf(L):
        ratio, budget = math.inf, 0.0
    else:
        ratio = L / (constant * R)
        budget = ratio * (lhs.budget / L + rhs.budget / R)
    passed = bool(ratio <= 1.0 + budget)
    return InequalityReport(name, lhs, rhs, constant, ratio, passed, budget, "ok", note, meta or {})


def not_applicable(name: str, reason: str, constant: float = math.nan, meta: dict | None = None,
                   status: str = "not_applicable") -> InequalityReport:
    nan = QuadResult(math.nan, converged=False)
    return InequalityReport(name, nan, nan, constant, math.nan, True, math.nan, status, reason,
                            meta or {})


# ---------------------------------------------------------------------------
# Cesaro limit and the decomposition u = v + int v/t


@dataclass(frozen=True)
class CesaroResult:
    value: float
    error: float
    raw: float


def _cesaro_mean(u: GridFunction, x: np.ndarray) -> np.ndarray:
    return u.antiderivative(x, 0) / x


def _extrapolate3(m4: float, m2: float, m1: float) -> float:
    """Limit of m(x) = L + a x**gamma from samples at x/4, x/2, x (gamma fitted)."""
    d1, d2 = m2 - m4, m1 - m2
    # means that agree to rounding carry no exponent information
    if max(abs(d1), abs(d2)) <= 4e-16 * max(1.0, abs(m4)) or d1 == 0:
        return m4
    ratio = d2 / d1
    if ratio <= 1.0:
        # no decaying power behaviour; fall back to the last sample
        return math.nan
    return m4 - d1 / (ratio - 1.0)


def cesaro_limit_result(u: GridFunction, tol: float = 1e-6) -> CesaroResult:
    """Extrapolate m(x) = (1/x) int_0^x u to x = 0 from x, x/2, x/4 with x = 8 x_1.

    The three geometric samples fix both the limit and the leading exponent
    of m(x) - u0 (Aitken's delta-squared on a geometric sequence), so a
    fractional power such as x**0.6 is removed exactly.  The error estimate
    is the change when the triple is shifted down by one factor of 2.
    The value is replaced by the left limit of the representation when the
    two agree within the error estimate (+1e-9), so that an exactly
    representable limit is subtracted exactly.
    """
    x = 8.0 * u.nodes[0]
    try:
        m8, m4, m2, m1 = _cesaro_mean(u, np.array([x / 8, x / 4, x / 2, x]))
    except ValueError as exc:
        raise NoLimitError(str(exc)) from exc
    R = _extrapolate3(m4, m2, m1)
    R2 = _extrapolate3(m8, m4, m2)
    err = abs(R - R2)
    if not (math.isfinite(R) and err <= tol * max(1.0, abs(R))):
        raise NoLimitError(f"Cesaro means do not settle: R={R}, error estimate={err}")
    val = R
    ll = u.left_limit
    if math.isfinite(ll) and abs(R - ll) <= err + 1e-9:
        val = ll
    return CesaroResult(float(val), float(err), float(R))


def cesaro_limit(u: GridFunction, tol: float = 1e-6) -> float:
    return cesaro_limit_result(u, tol).value


def _exact_v(u: GridFunction, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return u(x) - u.antiderivative(x, 0) / x


def v_decompose(u: GridFunction) -> GridFunction:
    """v(x) = u(x) - (1/x) int_0^x u on u's mesh, with matching end rules.

    Requires the Cesaro limit to vanish (subtract it first otherwise).
    """
    if u.is_zero:
        return u
    kappa, beta, c0 = u.left
    if c0 != 0:
        raise ValueError("v_decompose needs u0 = 0; subtract the Cesaro limit first")
    X = u.nodes
    V = _exact_v(u, X)
    left = (kappa * beta / (beta + 1.0), beta, 0.0)
    K, gamma, cinf = u.right
    A_n = float(u.antiderivative(np.array([X[-1]]))[0])
    if u.right_is_constant:
        right = (cinf * X[-1] - A_n, -1.0, 0.0)
        return GridFunction(X, V, left, right, u.label + ":v")
    return GridFunction(X, V, left, (0.0, 0.0, 0.0), u.label + ":v",
                        right_fn=lambda x, u=u: _exact_v(u, x))


def reconstruct(u: GridFunction, x=None, q: int = 10) -> np.ndarray:
    """Evaluate v(x) + int_0^x v(t)/t dt at ``x`` (default: the mesh nodes).

    v is evaluated from u through the decomposition formula and the integral
    is done by Gauss quadrature cell by cell, so agreement with u checks the
    identity numerically rather than algebraically.
    """
    X = u.nodes
    x = X if x is None else np.asarray(x, dtype=float)
    kappa, beta, c0 = u.left
    if c0 != 0:
        raise ValueError("reconstruct needs u0 = 0")
    # on (0, x_1): v = kappa beta/(beta+1) x^beta, so int_0^x v/t = kappa/(beta+1) x^beta
    edges = np.union1d(X, x[x >= X[0]])
    t, w = gauss_legendre(q)
    a, b = edges[:-1], edges[1:]
    pts = a[:, None] + (b - a)[:, None] * t[None, :]
    vals = _exact_v(u, pts.ravel()).reshape(pts.shape) / pts
    cum = np.concatenate([[0.0], np.cumsum((b - a) * (vals @ w))])
    start = kappa / (beta + 1.0) * X[0] ** beta if kappa != 0 else 0.0
    integral = np.where(x >= X[0], start + np.interp(x, edges, cum),
                        kappa / (beta + 1.0) * np.maximum(x, 1e-300) ** beta if kappa else 0.0)
    return _exact_v(u, x) + integral


# ---------------------------------------------------------------------------
# Hardy-type operators


def _refine(nodes: np.ndarray, k: int) -> np.ndarray:
    if k <= 0:
        return nodes
    t = np.arange(1, k + 1) / (k + 1.0)
    inner = nodes[:-1, None] + np.diff(nodes)[:, None] * t[None, :]
    return np.sort(np.concatenate([nodes, inner.ravel()]))


def hardy_operator(u: GridFunction, theta: float, refine: int = 3) -> GridFunction:
    """x -> x**(theta - 1) int_0^x u, sampled on a refinement of u's mesh."""
    kappa, beta, c0 = u.left
    if kappa != 0 and beta <= -1:
        raise IntegrabilityError(f"int_0^x u diverges at 0 for left rule {u.left}")
    if kappa != 0 and c0 != 0:
        raise ValueError("left rule with both a power and an offset is not supported here")
    X = _refine(u.nodes, refine)
    A = u.antiderivative(X, 0)
    H = X ** (theta - 1.0) * A
    if kappa != 0:
        left = (kappa / (beta + 1.0), theta + beta, 0.0)
    else:
        left = (c0, theta, 0.0) if theta != 0 else (0.0, 0.0, c0)
    xn = X[-1]
    A_n = float(A[-1])
    label = f"H[{u.label},theta={theta:g}]"
    if u.right_is_constant and u.right[2] == 0:
        return GridFunction(X, H, left, (A_n, theta - 1.0, 0.0), label)

    def right_fn(x, u=u, theta=theta):
        return x ** (theta - 1.0) * u.antiderivative(x, 0)

    return GridFunction(X, H, left, (0.0, 0.0, 0.0), label, right_fn=right_fn)


def _local_W(u: GridFunction, refine: int = 3) -> GridFunction:
    """W(x) = int_0^x u(t)/t dt sampled on a refinement of u's mesh."""
    kappa, beta, c0 = u.left
    X = _refine(u.nodes, refine)
    W = u.antiderivative(X, -1)
    left = (kappa / beta, beta, 0.0) if kappa != 0 else (0.0, 1.0, 0.0)
    K, gamma, cinf = u.right
    W_n = float(W[-1])
    if u.right_is_constant and cinf == 0:
        return GridFunction(X, W, left, (0.0, 0.0, W_n), f"W[{u.label}]")
    xn = X[-1]

    def right_fn(x, u=u):
        return u.antiderivative(x, -1)

    if u.right_is_constant:
        right_fn = lambda x, W_n=W_n, c=cinf, xn=xn: W_n + c * np.log(x / xn)  # noqa: E731
    return GridFunction(X, W, left, (0.0, 0.0, 0.0), f"W[{u.label}]", right_fn=right_fn)


def _with_refinement_error(build, evaluate) -> QuadResult:
    """Evaluate on two refinements; the difference is added to the error estimate."""
    coarse = evaluate(build(3))
    fine = evaluate(build(7))
    if not math.isfinite(fine.value):
        return fine
    extra = abs(fine.value - coarse.value)
    return QuadResult(fine.value, fine.abs_error_estimate + extra, fine.tail_bound,
                      fine.cells_used, fine.converged, fine.diverged)


# ---------------------------------------------------------------------------
# checkers


def check_palmieri(u: GridFunction, F: YoungFunction, theta: float, ell: float = math.inf,
                   tol: float = 1e-10, item: str = "") -> InequalityReport:
    """||x^(theta-1) int_0^x u||_{L^G(0,ell)} <= C ||x^theta u||_{L^G(0,ell)}."""
    name = "palmieri"
    const = palmieri_const(F.p_minus, theta)
    meta = _meta(F, None, item)
    meta["theta"] = theta
    if u.is_zero:
        return make_report(name, QuadResult(0.0), QuadResult(0.0), const, meta)
    try:
        rhs = luxemburg_norm_result(u, F, WeightSpec(-theta), tol, ell)
    except IntegrabilityError as exc:
        return not_applicable(name, f"x^theta u not in L^G: {exc}", const, meta)
    if rhs.diverged:
        return not_applicable(name, "x^theta u not in L^G (infinite norm)", const, meta)
    lhs = _with_refinement_error(lambda k: hardy_operator(u, theta, k),
                                 lambda H: luxemburg_norm_result(H, F, None, tol, ell))
    return make_report(name, lhs, rhs, const, meta)


def check_local_lemma(u: GridFunction, F: YoungFunction, s: float, tol: float = 1e-10,
                      item: str = "") -> InequalityReport:
    """int G(|x^-s int_0^x u(t)/t dt|) <= c_H int G(|u|/x^s)."""
    name = "local_lemma"
    const = compute_constants(F, s).c_H
    meta = _meta(F, s, item)
    if u.is_zero:
        return make_report(name, QuadResult(0.0), QuadResult(0.0), const, meta)
    try:
        rhs = modular(u, F, WeightSpec(s), tol)
    except IntegrabilityError as exc:
        return not_applicable(name, f"x^-s u not in L^G: {exc}", const, meta)
    if rhs.diverged:
        return not_applicable(name, "x^-s u not in L^G", const, meta)
    try:
        lhs = _with_refinement_error(lambda k: _local_W(u, k),
                                     lambda W: modular(W, F, WeightSpec(s), tol))
    except (ValueError, IntegrabilityError) as exc:
        return not_applicable(name, f"int_0^x u(t)/t dt undefined: {exc}", const, meta)
    return make_report(name, lhs, rhs, const, meta)


def check_modular_hardy(u: GridFunction, F: YoungFunction, s: float, tol: float = 1e-6,
                        item: str = "") -> InequalityReport:
    """int G(|u - u0|/x^s) <= C_H Phi_{s,G}(u) with u0 the Cesaro limit."""
    name = "modular_hardy"
    const = compute_constants(F, s).C_H
    meta = _meta(F, s, item)
    u0 = cesaro_limit(u)
    meta["u0"] = u0
    lhs = modular(u, F, WeightSpec.shifted(s, u0), min(tol, 1e-8))
    rhs = fractional_modular(u, F, s, tol)
    return make_report(name, lhs, rhs, const, meta)


def check_norm_hardy(u: GridFunction, F: YoungFunction, s: float, variant: str = "corollary",
                     tol: float = 1e-6, item: str = "") -> InequalityReport:
    """Norm form: ``corollary`` subtracts u0 with constant phi(C_H); ``theorem`` does not."""
    consts = compute_constants(F, s)
    meta = _meta(F, s, item)
    if variant == "corollary":
        name, const = "norm_hardy_cor", consts.norm_const_cor
        u0 = cesaro_limit(u)
    elif variant == "theorem":
        name, const = "norm_hardy_thm", consts.norm_const_thm
        u0 = 0.0
    else:
        raise ValueError(f"variant must be 'corollary' or 'theorem', got {variant!r}")
    meta["u0"] = u0
    if u.is_zero:
        return make_report(name, QuadResult(0.0), QuadResult(0.0), const, meta)
    try:
        lhs = luxemburg_norm_result(u, F, WeightSpec.shifted(s, u0), min(tol, 1e-8))
    except IntegrabilityError as exc:
        return not_applicable(name, f"||u/x^s||_G is infinite: {exc}", const, meta)
    if lhs.diverged:
        return not_applicable(name, "||u/x^s||_G is infinite", const, meta)
    rhs = gagliardo_seminorm_result(u, F, s, tol)
    return make_report(name, lhs, rhs, const, meta)


def check_classical_hardy(u: GridFunction, p: float, item: str = "") -> InequalityReport:
    """int |u|^p/x^p <= (p/(p-1))^p int |u'|^p for u(0) = 0."""
    name = "classical"
    const = (p / (p - 1.0)) ** p
    meta = {"g_kind": f"power(p={p:g})", "p_minus": p, "p_plus": p, "s": None, "item": item}
    F = YoungFunction.power(p)
    if u.is_zero:
        return make_report(name, QuadResult(0.0), QuadResult(0.0), const, meta)
    kappa, beta, c0 = u.left
    if c0 != 0:
        raise IntegrabilityError("classical Hardy needs u(0) = 0; int |u|^p/x^p diverges")
    lhs = modular(u, F, WeightSpec(1.0), 1e-10)
    if lhs.diverged:
        raise IntegrabilityError("int |u|^p/x^p diverges")
    lhs = lhs.scaled(p)
    X = u.nodes
    rhs_val = float(np.sum(np.abs(u.slopes()) ** p * np.diff(X)))
    if kappa != 0:
        e = p * (beta - 1.0) + 1.0
        if e <= 0:
            raise IntegrabilityError("u' not in L^p near 0")
        rhs_val += abs(kappa * beta) ** p * X[0] ** e / e
    if u.right_fn is not None:
        raise ValueError("classical Hardy needs a power right rule")
    K, gamma, _ = u.right
    if K != 0:
        e = p * (gamma - 1.0) + 1.0
        if e >= 0:
            raise IntegrabilityError("u' not in L^p near infinity")
        rhs_val += abs(K * gamma) ** p * X[-1] ** e / (-e)
    return make_report(name, lhs, QuadResult(rhs_val), const, meta)
