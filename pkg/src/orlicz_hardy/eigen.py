"""Lowest eigenvalue of the fractional g-Laplacian on an interval (a, b), a > 0.

Functions are continuous, piecewise linear on a uniform mesh and vanish
outside (a, b); the fractional modular is taken over the whole line, so the
two strips where one point leaves the interval are included.  The quotient
Phi_{s,G}(u) / Phi_G(u) is minimized over the modular sphere Phi_G(u) = alpha
by projected gradient descent, preconditioned with the Hessian of the
quadratic (p = 2) form.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from scipy.integrate import quad as _scipy_quad
from scipy.optimize import brentq

from .hardy import compute_constants
from .quad import NonlocalRule, gauss_legendre, near_diagonal_levels
from .young import YoungFunction, psi

__all__ = [
    "DiscreteSpace",
    "EigenSolution",
    "BoundCheck",
    "DegenerateSolutionError",
    "pairing",
    "modular_gradient",
    "fractional_modular_discrete",
    "constraint_modular",
    "project_to_constraint",
    "minimize_quotient",
    "extract_lambda",
    "check_lower_bounds",
    "dense_eigen_oracle",
    "SEED_NAMES",
]

SEED_NAMES = ("sine", "random_uniform", "sign_alternating", "bump_left", "bump_right")


class DegenerateSolutionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DiscreteSpace:
    """Continuous piecewise-linear functions on (a, b) with n interior nodes."""

    a: float
    b: float
    n: int
    q: int = 4
    digits: float = 12.0

    def __post_init__(self):
        if not 0 < self.a < self.b < math.inf:
            raise ValueError(f"need 0 < a < b < inf, got ({self.a}, {self.b})")
        if self.n < 1:
            raise ValueError("need at least one interior node")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def diam(self) -> float:
        return self.b - self.a

    @cached_property
    def mesh(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n + 2)

    @property
    def interior(self) -> np.ndarray:
        return self.mesh[1:-1]

    def full(self, U: np.ndarray) -> np.ndarray:
        return np.concatenate([[0.0], np.asarray(U, dtype=float), [0.0]])

    def refine(self) -> "DiscreteSpace":
        """Halve every element; the new space contains the old one."""
        return DiscreteSpace(self.a, self.b, 2 * self.n + 1, self.q, self.digits)

    def prolong(self, U: np.ndarray) -> np.ndarray:
        """Nodal values of the same function in :meth:`refine`."""
        Uf = self.full(U)
        fine = np.empty(2 * Uf.size - 1)
        fine[0::2] = Uf
        fine[1::2] = 0.5 * (Uf[:-1] + Uf[1:])
        return fine[1:-1]

    def __call__(self, U: np.ndarray, x) -> np.ndarray:
        """Evaluate the function with interior values U; exactly 0 off (a, b)."""
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.mesh, self.full(U), left=0.0, right=0.0)

    def _rule(self, s: float, p_minus: float) -> NonlocalRule:
        key = (s, p_minus)
        cache = self.__dict__.setdefault("_rules", {})
        if key not in cache:
            levels = near_diagonal_levels(s, p_minus, self.digits)
            cache[key] = NonlocalRule(self.mesh, s, self.q, levels, ("left", "right"))
        return cache[key]

    def _gauss(self, order: int = 8):
        t, w = gauss_legendre(order)
        x = (self.mesh[:-1, None] + self.h * t[None, :]).ravel()
        # basis values of the two nodes of each element at the points
        phi_l = np.tile(1.0 - t, self.n + 1)
        phi_r = np.tile(t, self.n + 1)
        cell = np.repeat(np.arange(self.n + 1), t.size)
        return x, np.tile(w * self.h, self.n + 1), cell, phi_l, phi_r


def _values_at_points(space: DiscreteSpace, U: np.ndarray):
    x, w, cell, pl, pr = space._gauss()
    Uf = space.full(U)
    return x, w, cell, pl, pr, Uf[cell] * pl + Uf[cell + 1] * pr


def fractional_modular_discrete(space: DiscreteSpace, U, F: YoungFunction, s: float) -> float:
    """Phi_{s,G} of the discrete function over the whole line."""
    return space._rule(s, F.p_minus).modular(F, space.full(U))


def modular_gradient(space: DiscreteSpace, U, F: YoungFunction, s: float) -> np.ndarray:
    """Gradient of Phi_{s,G} in interior nodal coordinates; entry i is pairing(u, phi_i)."""
    return space._rule(s, F.p_minus).gradient(F, space.full(U))[1:-1]


def pairing(space: DiscreteSpace, U, V, F: YoungFunction, s: float) -> float:
    """Integral of g(|D_s u|) sign(D_s u) D_s v d mu with d mu = dx dy / |x - y|."""
    return float(np.dot(modular_gradient(space, U, F, s), np.asarray(V, dtype=float)))


def constraint_modular(space: DiscreteSpace, U, F: YoungFunction, weight_s: float | None = None):
    """int_Omega G(|u|) or, with ``weight_s``, int_Omega G(|u| / x**s)."""
    x, w, *_, u = _values_at_points(space, U)
    arg = np.abs(u) if weight_s is None else np.abs(u) * x**-weight_s
    return float(np.dot(w, F.G(arg)))


def _constraint_gradient(space: DiscreteSpace, U, F: YoungFunction, weight_s=None) -> np.ndarray:
    x, w, cell, pl, pr, u = _values_at_points(space, U)
    scale = np.ones_like(x) if weight_s is None else x**-weight_s
    c = w * F.g(np.abs(u) * scale) * np.sign(u) * scale
    full = np.zeros(space.n + 2)
    full[:-1] += np.bincount(cell, c * pl, space.n + 1)
    full[1:] += np.bincount(cell, c * pr, space.n + 1)
    return full[1:-1]


def _denominator_pairing(space: DiscreteSpace, U, F: YoungFunction, weight_s=None) -> float:
    """int g(|u|)|u| or int g(|u|/x^s) |u|/x^s."""
    x, w, *_, u = _values_at_points(space, U)
    arg = np.abs(u) if weight_s is None else np.abs(u) * x**-weight_s
    return float(np.dot(w, F.g(arg) * arg))


def project_to_constraint(space: DiscreteSpace, U, F: YoungFunction, alpha: float,
                          weight_s: float | None = None, tol: float = 1e-14) -> np.ndarray:
    """c U with c > 0 the root of Phi_G(c U) = alpha."""
    U = np.asarray(U, dtype=float)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not np.any(U):
        raise ValueError("cannot project the zero function onto the modular sphere")
    f = lambda c: constraint_modular(space, c * U, F, weight_s) - alpha  # noqa: E731
    f1 = f(1.0)
    if f1 == 0:
        return U.copy()
    lo, hi = (1.0, 2.0) if f1 < 0 else (0.5, 1.0)
    for _ in range(2000):
        if f1 < 0 and f(hi) < 0:
            lo, hi = hi, hi * 2.0
        elif f1 > 0 and f(lo) > 0:
            lo, hi = lo / 2.0, lo
        else:
            break
    c = brentq(f, lo, hi, xtol=1e-300, rtol=tol, maxiter=500)
    return c * U


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool


@dataclass
class EigenSolution:
    alpha: float
    coefficients: np.ndarray
    Lambda_alpha: float
    lambda_alpha: float
    diagnostics: dict
    bound_checks: list = field(default_factory=list)
    space: DiscreteSpace | None = None
    s: float | None = None
    weighted: bool = False
    converged: bool = True

    def to_row(self) -> dict:
        return {"alpha": self.alpha, "Lambda_alpha": self.Lambda_alpha,
                "lambda_alpha": self.lambda_alpha, "n": self.space.n if self.space else None,
                "iterations": self.diagnostics.get("iterations"),
                "restarts": self.diagnostics.get("restarts"),
                "converged": self.converged, "weighted": self.weighted}


def _seed(space: DiscreteSpace, k: int) -> np.ndarray:
    t = (space.interior - space.a) / space.diam
    kind = SEED_NAMES[k % len(SEED_NAMES)]
    rng = np.random.default_rng(1000 + k)
    if kind == "sine":
        return np.sin(np.pi * t)
    if kind == "random_uniform":
        return rng.uniform(0.0, 1.0, space.n) + 1e-3
    if kind == "sign_alternating":
        return (-1.0) ** np.arange(space.n) * rng.uniform(0.5, 1.0, space.n)
    if kind == "bump_left":
        return np.exp(-(((t - 1.0 / 3.0) / 0.12) ** 2))
    return np.exp(-(((t - 2.0 / 3.0) / 0.12) ** 2))


def _descend(space, F, s, alpha, weight_s, U0, tol, max_iter):
    rule = space._rule(s, F.p_minus)
    P = rule.quadratic_hessian()[1:-1, 1:-1]
    chol = sla.cho_factor(P)
    U = project_to_constraint(space, U0, F, alpha, weight_s)
    val = fractional_modular_discrete(space, U, F, s)
    history = [val / alpha]
    t_prev, it, converged, gnorm = 1.0, 0, False, math.inf
    for it in range(1, max_iter + 1):
        gs = modular_gradient(space, U, F, s)
        gG = _constraint_gradient(space, U, F, weight_s)
        zs, zG = sla.cho_solve(chol, gs), sla.cho_solve(chol, gG)
        mu = float(gG @ zs) / float(gG @ zG)
        d = -(zs - mu * zG)
        slope = float(gs @ d)
        gnorm = math.sqrt(max(-slope, 0.0))
        if -slope <= tol * val:
            converged = True
            break
        # unit step is inverse iteration for p = 2
        t = 1.0 if t_prev >= 0.5 else min(1.0, 2.0 * t_prev)
        accepted = False
        for _ in range(60):
            trial = project_to_constraint(space, U + t * d, F, alpha, weight_s)
            tv = fractional_modular_discrete(space, trial, F, s)
            if tv <= val + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        rel = (val - tv) / val
        U, val, t_prev = trial, tv, t
        history.append(val / alpha)
        if rel <= 1e-15:
            converged = True
            break
    return U, val / alpha, {"iterations": it, "grad_norm": gnorm, "history": history,
                            "converged": converged}


def _run_seed(args):
    space, F, s, alpha, weight_s, k, tol, max_iter = args
    U, Q, diag = _descend(space, F, s, alpha, weight_s, _seed(space, k), tol, max_iter)
    diag["seed"] = SEED_NAMES[k % len(SEED_NAMES)]
    return U, Q, diag


def minimize_quotient(space: DiscreteSpace, F: YoungFunction, s: float, alpha: float = 1.0,
                      restarts: int = 5, tol: float = 1e-11, max_iter: int = 400,
                      weighted: bool = False, jobs: int = 1) -> EigenSolution:
    """Minimize Phi_{s,G} / Phi_G on {Phi_G = alpha} from ``restarts`` seeds.

    With ``weighted`` the constraint modular is int G(|u| / x**s).  The best
    seed wins (ties go to the lower seed index).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    weight_s = s if weighted else None
    tasks = [(space, F, s, alpha, weight_s, k, tol, max_iter) for k in range(restarts)]
    if jobs > 1 and F.kind != "custom":
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_seed, tasks))
    else:
        results = [_run_seed(t) for t in tasks]
    best = min(range(len(results)), key=lambda k: (results[k][1], k))
    U, Q, diag = results[best]
    diag = dict(diag)
    diag["restarts"] = restarts
    diag["all_quotients"] = [r[1] for r in results]
    any_conv = any(r[2]["converged"] for r in results)
    sol = EigenSolution(alpha, U, Q, math.nan, diag, [], space, s, weighted, converged=any_conv)
    sol.lambda_alpha = extract_lambda(sol, F)
    return sol


def extract_lambda(sol: EigenSolution, F: YoungFunction, tol: float = 1e-300,
                   weighted: bool | None = None) -> float:
    """Ratio of the operator pairing and the constraint pairing at v = u_alpha."""
    weighted = sol.weighted if weighted is None else weighted
    space, s, U = sol.space, sol.s, sol.coefficients
    num = pairing(space, U, U, F, s)
    den = _denominator_pairing(space, U, F, s if weighted else None)
    if not den > tol:
        raise DegenerateSolutionError(f"denominator {den} <= {tol}")
    return num / den


def check_lower_bounds(sol: EigenSolution, F: YoungFunction, s: float | None = None,
                       mode: str | None = None, rtol: float = 1e-12) -> list[BoundCheck]:
    """Hardy lower bound for Lambda_alpha and the comparability band for lambda_alpha."""
    s = sol.s if s is None else s
    mode = mode or ("weighted" if sol.weighted else "dirichlet")
    C_H = compute_constants(F, s).C_H
    Lam, lam = sol.Lambda_alpha, sol.lambda_alpha
    if mode == "dirichlet":
        bound = 1.0 / (float(psi(sol.space.diam, F.p_minus, F.p_plus)) * C_H)
        name = "dirichlet_hardy_lower"
    elif mode == "weighted":
        bound = 1.0 / C_H
        name = "weighted_hardy_lower"
    else:
        raise ValueError("mode must be 'dirichlet' or 'weighted'")
    r = F.p_minus / F.p_plus
    checks = [
        BoundCheck(name, bound, Lam, bound <= Lam),
        BoundCheck("comparability_lower", r * Lam, lam, r * Lam <= lam * (1 + rtol)),
        BoundCheck("comparability_upper", lam, Lam / r, lam <= Lam / r * (1 + rtol)),
    ]
    sol.bound_checks = checks
    return checks


# ---------------------------------------------------------------------------
# independent oracle for p = 2


def _b3(t: float) -> float:
    """Autocorrelation of the unit hat (the centred cubic B-spline)."""
    t = abs(t)
    if t <= 1.0:
        return 2.0 / 3.0 - t * t + t**3 / 2.0
    if t <= 2.0:
        return (2.0 - t) ** 3 / 6.0
    return 0.0


def _toeplitz_symbol(k: int, s: float) -> float:
    """int_0^inf tau^(-1-2s) [2 B(k) - B(k + tau) - B(k - tau)] dtau."""
    top = k + 2.0
    brk = sorted({abs(k + m) for m in range(-2, 3)} - {0.0})
    f = lambda t: t ** (-1.0 - 2.0 * s) * (2 * _b3(k) - _b3(k + t) - _b3(k - t))  # noqa: E731
    pts = [0.0] + [p for p in brk if p < top] + [top]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = _scipy_quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total + 2.0 * _b3(k) * top ** (-2.0 * s) / (2.0 * s)


def dense_eigen_oracle(space: DiscreteSpace, s: float) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the exact quadratic form for G(t) = t**2/2 on ``space``.

    Stiffness from the hat autocorrelation (Toeplitz), mass from the exact
    P1 mass matrix; solved with a dense generalized symmetric eigensolver.
    """
    n, h = space.n, space.h
    col = np.array([_toeplitz_symbol(k, s) for k in range(n)])
    Q = 2.0 * h ** (1.0 - 2.0 * s) * sla.toeplitz(col)
    M = h * (np.diag(np.full(n, 2.0 / 3.0)) + np.diag(np.full(n - 1, 1.0 / 6.0), 1)
             + np.diag(np.full(n - 1, 1.0 / 6.0), -1))
    w, V = sla.eigh(Q, M, subset_by_index=[0, 0])
    return float(w[0]), V[:, 0]
