"""Young functions satisfying the growth condition p- <= t g(t)/G(t) <= p+.

Two built-in families are provided: pure powers ``G(t) = t**p / p`` and the
log-perturbed powers ``g(t) = t**a * log(b + c t)`` (declared exponents
``p- = 1 + a`` and ``p+ = 2 + a``).  Arbitrary functions can be wrapped with
:meth:`YoungFunction.custom`; their growth exponents are only trusted after
:func:`certify_growth`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import hyp2f1

__all__ = [
    "YoungFunction",
    "GrowthCertificate",
    "RootFindError",
    "MalformedFunctionError",
    "eval_G",
    "eval_g",
    "conjugate",
    "conjugate_function",
    "certify_growth",
    "envelope",
    "psi",
    "phi",
    "check_G1_G2",
    "DEFAULT_GROWTH_GRID",
]

DEFAULT_GROWTH_GRID = np.logspace(-6, 6, 2401)


class RootFindError(RuntimeError):
    """Monotone root-find failed; ``bracket`` is the last interval tried."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (bracket={bracket})")
        self.bracket = bracket


class MalformedFunctionError(ValueError):
    pass


def _log_perturbed_K(z: np.ndarray, a: float) -> np.ndarray:
    """K(z) = int_0^1 tau^a log(1 + z tau) d tau for z >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 0.5
    if np.any(small):
        zs = z[small]
        zmax = float(zs.max())
        # alternating series; |z| < 1/2 so at most 63 terms reach double precision
        nterms = 63 if zmax >= 0.5 else max(1, min(63, int(math.ceil(-37.0 / math.log(max(zmax, 1e-300))))))
        k = np.arange(1, nterms + 1, dtype=float)
        terms = (-1.0) ** (k + 1) / (k * (a + k + 1.0))
        acc = np.zeros_like(zs)
        for c in terms[::-1]:
            acc = (acc + c) * zs
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        if a == 1.0:
            L = 1.0 / zb - np.log1p(zb) / zb**2
        else:
            L = hyp2f1(1.0, a + 1.0, a + 2.0, -zb) / (a + 1.0)
        out[big] = np.log1p(zb) / (a + 1.0) - 1.0 / (a + 1.0) ** 2 + L / (a + 1.0)
    return out


@dataclass(frozen=True)
class YoungFunction:
    """An evaluable pair (G, g = G') with declared growth exponents.

    Use the constructors :meth:`power`, :meth:`log_perturbed` and
    :meth:`custom`.  Instances are immutable and safe to share.
    """

    kind: str
    params: tuple[tuple[str, float], ...]
    p_minus: float
    p_plus: float
    _G: Callable | None = field(default=None, repr=False, compare=False)
    _g: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.p_minus > 1:
            raise ValueError(f"p_minus must exceed 1, got {self.p_minus}")
        if not self.p_plus >= self.p_minus:
            raise ValueError(f"p_plus={self.p_plus} < p_minus={self.p_minus}")
        if self.kind == "custom" and (self._G is None or self._g is None):
            raise ValueError("custom Young function needs both G and g")

    @classmethod
    def power(cls, p: float) -> "YoungFunction":
        p = float(p)
        if not p > 1:
            raise ValueError(f"power Young function needs p > 1, got {p}")
        return cls("power", (("p", p),), p, p)

    @classmethod
    def log_perturbed(cls, a: float, b: float, c: float) -> "YoungFunction":
        a, b, c = float(a), float(b), float(c)
        if not a > 0:
            raise ValueError(f"log-perturbed Young function needs a > 0, got {a}")
        if not b >= 1:
            raise ValueError(f"log-perturbed Young function needs b >= 1, got {b}")
        if not c > 0:
            raise ValueError(f"log-perturbed Young function needs c > 0, got {c}")
        return cls("log_perturbed", (("a", a), ("b", b), ("c", c)), 1.0 + a, 2.0 + a)

    @classmethod
    def custom(cls, G: Callable, g: Callable, p_minus: float, p_plus: float,
               name: str = "custom") -> "YoungFunction":
        return cls("custom", (("name", name),), float(p_minus), float(p_plus), G, g)

    @classmethod
    def from_dict(cls, d: dict) -> "YoungFunction":
        kind = d.get("kind")
        if kind == "power":
            return cls.power(d["p"])
        if kind in ("log_perturbed", "log-perturbed"):
            return cls.log_perturbed(d["a"], d["b"], d["c"])
        raise ValueError(f"unknown Young function kind {kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}

    @property
    def param(self) -> dict:
        return dict(self.params)

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"power(p={self.param['p']:g})"
        if self.kind == "log_perturbed":
            q = self.param
            return f"log_perturbed(a={q['a']:g},b={q['b']:g},c={q['c']:g})"
        return self.param.get("name", "custom")

    @property
    def doubling_constant(self) -> float:
        return 2.0 ** self.p_plus

    def G(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            p = self.param["p"]
            return t**p / p
        if self.kind == "log_perturbed":
            q = self.param
            a, b, c = q["a"], q["b"], q["c"]
            return t ** (a + 1.0) * (math.log(b) / (a + 1.0) + _log_perturbed_K(c * t / b, a))
        return np.asarray(self._G(t), dtype=float)

    def G_scaled(self, t):
        """G(t) / t**p_minus, computed without underflow for the built-in families.

        Nondecreasing in t whenever the lower growth bound holds.
        """
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return np.full_like(t, 1.0 / self.param["p"])
        if self.kind == "log_perturbed":
            q = self.param
            a, b, c = q["a"], q["b"], q["c"]
            return math.log(b) / (a + 1.0) + _log_perturbed_K(c * t / b, a)
        return self.G(t) / t**self.p_minus

    def g(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            p = self.param["p"]
            return t ** (p - 1.0)
        if self.kind == "log_perturbed":
            q = self.param
            return t ** q["a"] * np.log(q["b"] + q["c"] * t)
        return np.asarray(self._g(t), dtype=float)

    def __call__(self, t):
        return self.G(t)


def eval_G(F: YoungFunction, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("G is defined on [0, inf)")
    return F.G(t)


def eval_g(F: YoungFunction, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("g is defined on [0, inf)")
    return F.g(t)


def _invert_g(F: YoungFunction, w: float) -> float:
    """Solve g(t) = w by a geometrically grown bracket and safeguarded bisection."""
    lo, hi = 0.0, 1.0
    for _ in range(400):
        if F.g(hi) >= w:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise RootFindError("g never reached the target value", (lo, hi))
    try:
        return brentq(lambda t: float(F.g(t)) - w, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise RootFindError(str(exc), (lo, hi)) from exc


def conjugate(F: YoungFunction, w):
    """Complementary function sup_{t>0} (t w - G(t)), via the root of g(t) = w."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr < 0):
        raise ValueError("conjugate is evaluated on [0, inf)")
    flat = w_arr.ravel()
    out = np.zeros_like(flat)
    for i, wi in enumerate(flat):
        if wi == 0.0:
            continue
        t = _invert_g(F, wi)
        out[i] = t * wi - float(F.G(t))
    return out.reshape(w_arr.shape) if w_arr.ndim else float(out[0])


def conjugate_function(F: YoungFunction) -> YoungFunction:
    """The complementary Young function as a custom :class:`YoungFunction`.

    Its derivative is the inverse of g and its exponents are the conjugates
    of the swapped exponents of F.
    """

    def g_tilde(w):
        w = np.asarray(w, dtype=float)
        flat = [0.0 if wi == 0 else _invert_g(F, float(wi)) for wi in w.ravel()]
        return np.asarray(flat).reshape(w.shape)

    def conj_p(p):
        return p / (p - 1.0)

    return YoungFunction.custom(lambda w: conjugate(F, w), g_tilde,
                                conj_p(F.p_plus), conj_p(F.p_minus),
                                name=f"conjugate[{F.label}]")


@dataclass(frozen=True)
class GrowthCertificate:
    min_ratio: float
    max_ratio: float
    p_minus: float
    p_plus: float
    passed: bool
    grid_size: int


def certify_growth(F: YoungFunction, grid=None, rtol: float = 1e-10) -> GrowthCertificate:
    """Sampled check of p- <= t g(t) / G(t) <= p+ over ``grid``."""
    grid = DEFAULT_GROWTH_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("growth grid must be nonempty and strictly positive")
    Gt = F.G(grid)
    if np.any(Gt <= 0):
        bad = float(grid[np.argmax(Gt <= 0)])
        raise MalformedFunctionError(f"G vanishes at t={bad} > 0")
    ratio = grid * F.g(grid) / Gt
    lo, hi = float(ratio.min()), float(ratio.max())
    passed = lo >= F.p_minus * (1 - rtol) and hi <= F.p_plus * (1 + rtol)
    return GrowthCertificate(lo, hi, F.p_minus, F.p_plus, passed, int(grid.size))


def psi(x, p_minus: float, p_plus: float):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 1, x**p_plus, x**p_minus)


def phi(x, p_minus: float, p_plus: float):
    x = np.asarray(x, dtype=float)
    return np.where(x >= 1, x ** (1.0 / p_minus), x ** (1.0 / p_plus))


def envelope(F: YoungFunction, x, which: str):
    if np.any(np.asarray(x) < 0):
        raise ValueError("envelopes are defined on [0, inf)")
    if which == "psi":
        out = psi(x, F.p_minus, F.p_plus)
    elif which == "phi":
        out = phi(x, F.p_minus, F.p_plus)
    else:
        raise ValueError(f"which must be 'psi' or 'phi', got {which!r}")
    return float(out) if np.ndim(out) == 0 else out


def check_G1_G2(F: YoungFunction, a: float, t: float, rtol: float = 1e-10) -> tuple[bool, bool]:
    """Scaling bounds (G1) and the doubling bound (G2) at one point."""
    Gt, Gat = float(F.G(t)), float(F.G(a * t))
    lo = min(a**F.p_minus, a**F.p_plus) * Gt
    hi = max(a**F.p_minus, a**F.p_plus) * Gt
    slack = rtol * max(abs(Gat), abs(hi), 1e-300)
    g1 = lo - slack <= Gat <= hi + slack
    lhs = float(F.G(a + t))
    rhs = F.doubling_constant * (float(F.G(a)) + Gt)
    g2 = lhs <= rhs * (1 + rtol) + 1e-300
    return bool(g1), bool(g2)
