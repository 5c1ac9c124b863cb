"""Deterministic test-function families with analytic metadata."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quad import GridFunction

__all__ = ["CorpusEntry", "FAMILIES", "make", "from_dict", "default_corpus", "graded_nodes"]

FAMILIES = ("powerdecay", "hat", "bump", "powergrowth_cap", "indicator")

X_FIRST = 1e-12


def graded_nodes(x_end: float, n: int, x_first: float = X_FIRST, knots=()) -> np.ndarray:
    """40 geometric nodes up to 1e-2, then n quadratically graded nodes to x_end.

    ``knots`` are inserted exactly (kinks of the sampled function).
    """
    head = np.geomspace(x_first, 1e-2, 40)
    t = np.linspace(0.0, 1.0, n + 1)[1:]
    body = 1e-2 + (x_end - 1e-2) * t**2
    nodes = np.union1d(np.concatenate([head, body]), np.asarray(knots, dtype=float))
    return nodes[(nodes > 0) & (nodes <= x_end)]


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    family: str
    params: dict
    function: GridFunction
    analytic_u0: float | None
    closed_forms: dict = field(default_factory=dict)

    def closed_form(self, quantity: str, p: float, s: float | None = None) -> float | None:
        """Closed-form values available for power G(t) = t**p / p."""
        if self.family == "powerdecay":
            beta = self.params["beta"]
            if quantity == "modular":
                return math.gamma(p * beta + 1) / (p * p ** (p * beta + 1))
            if quantity == "weighted_modular" and s is not None and p * (beta - s) > -1:
                e = p * (beta - s)
                return math.gamma(e + 1) / (p * p ** (e + 1))
            if quantity == "lp_norm":
                return (math.gamma(p * beta + 1) / p ** (p * beta + 1)) ** (1 / p)
        if self.family == "hat":
            L = self.params["L"]
            if quantity == "modular":
                return L / (p * (p + 1))
            if quantity == "lp_norm":
                return (L / (p + 1)) ** (1 / p)
        return None


def _powerdecay(beta: float, n: int) -> tuple[GridFunction, float, dict]:
    if beta < 0:
        raise ValueError(f"powerdecay needs beta >= 0, got {beta}")
    # cut where x**beta e**-x < 1e-18
    x_end = 42.0
    while x_end**beta * math.exp(-x_end) > 1e-18:
        x_end += 1.0
    nodes = graded_nodes(x_end, n)
    left = (0.0, 0.0, 1.0) if beta == 0 else (1.0, beta, 0.0)
    u = GridFunction.from_callable(lambda x: x**beta * np.exp(-x), nodes, left=left,
                                   compact=True, label=f"powerdecay(beta={beta:g})")
    u0 = 1.0 if beta == 0 else 0.0
    return u, u0, {"tail_envelope": f"x^{beta:g} e^-x < 1e-18 beyond {x_end:g}"}


def _hat(L: float, n: int):
    if not L > 0:
        raise ValueError("hat needs L > 0")
    nodes = graded_nodes(L, n, knots=(L / 2, L))
    u = GridFunction.from_callable(lambda x: np.clip(1.0 - np.abs(2.0 * x / L - 1.0), 0, None),
                                   nodes, left=(2.0 / L, 1.0, 0.0), compact=True,
                                   label=f"hat(L={L:g})")
    return u, 0.0, {}


def _bump(center: float, radius: float, n: int):
    if not 0 < radius <= center:
        raise ValueError("bump needs 0 < radius <= center so that u vanishes near 0")
    a, b = center - radius, center + radius

    def f(x):
        z = (x - center) / radius
        out = np.zeros_like(x)
        inside = np.abs(z) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
        return out

    nodes = np.union1d(graded_nodes(a, 8) if a > 0.05 else np.zeros(0),
                       np.linspace(a, b, n + 1)) if a > 0 else np.linspace(0, b, n + 1)[1:]
    u = GridFunction.from_callable(f, nodes, left=(0.0, 1.0, 0.0), compact=True,
                                   label=f"bump(c={center:g},r={radius:g})")
    return u, 0.0, {}


def _cap(M: float, n: int):
    if not M > 0:
        raise ValueError("powergrowth_cap needs M > 0")
    nodes = graded_nodes(M, n, knots=(M,))
    u = GridFunction(nodes, np.minimum(nodes, M), (1.0, 1.0, 0.0), (0.0, 0.0, M),
                     label=f"cap(M={M:g})")
    return u, 0.0, {}


def _indicator(ell: float, n: int):
    """chi_(0, ell) with a 1e-9-wide linear drop after ell."""
    nodes = np.union1d(graded_nodes(ell, n, knots=(ell,)), [ell * (1 + 1e-9)])
    vals = np.where(nodes <= ell, 1.0, 0.0)
    u = GridFunction(nodes, vals, (0.0, 0.0, 1.0), (0.0, 0.0, 0.0), label=f"indicator({ell:g})")
    return u, 1.0, {}


DEFAULT_PARAMS = {
    "powerdecay": {"beta": 1.0},
    "hat": {"L": 2.0},
    "bump": {"center": 1.5, "radius": 1.0},
    "powergrowth_cap": {"M": 1.0},
    "indicator": {"ell": 1.0},
}


def make(family: str, params: dict | None = None, resolution: int = 200) -> CorpusEntry:
    """Build a corpus entry; ``resolution`` is the number of graded body nodes."""
    if family not in FAMILIES:
        raise ValueError(f"unknown corpus family {family!r}; expected one of {FAMILIES}")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")
    prm = dict(DEFAULT_PARAMS[family])
    prm.update(params or {})
    unknown = set(prm) - set(DEFAULT_PARAMS[family])
    if unknown:
        raise ValueError(f"unknown parameters for {family}: {sorted(unknown)}")
    prm = {k: float(v) for k, v in prm.items()}
    if family == "powerdecay":
        u, u0, notes = _powerdecay(prm["beta"], resolution)
    elif family == "hat":
        u, u0, notes = _hat(prm["L"], resolution)
    elif family == "bump":
        u, u0, notes = _bump(prm["center"], prm["radius"], resolution)
    elif family == "powergrowth_cap":
        u, u0, notes = _cap(prm["M"], resolution)
    else:
        u, u0, notes = _indicator(prm["ell"], resolution)
    ident = family + "(" + ",".join(f"{k}={v:g}" for k, v in sorted(prm.items())) + ")"
    entry = CorpusEntry(ident, family, prm, u, u0, {})
    cf = dict(notes)
    if family == "powerdecay" and prm["beta"] == 1.0:
        cf["weighted_modular[p=2,s=0.75]"] = (entry.closed_form("weighted_modular", 2.0, 0.75),
                                              "Gamma integral of x^(2(1-s)) e^(-2x)/2")
    if family in ("powerdecay", "hat"):
        cf["modular[p=2]"] = (entry.closed_form("modular", 2.0), "elementary integral")
    object.__setattr__(entry, "closed_forms", cf)
    return entry


def from_dict(d: dict, resolution: int = 200) -> CorpusEntry:
    d = dict(d)
    family = d.pop("family")
    res = int(d.pop("resolution", resolution))
    d.pop("id", None)
    return make(family, d, res)


def default_corpus(resolution: int = 200) -> list[CorpusEntry]:
    """Entries used by the verification campaigns."""
    return [
        make("powerdecay", {"beta": 0.0}, resolution),
        make("powerdecay", {"beta": 0.6}, resolution),
        make("powerdecay", {"beta": 1.0}, resolution),
        make("hat", {"L": 2.0}, resolution),
        make("bump", {}, resolution),
        make("powergrowth_cap", {"M": 1.0}, resolution),
    ]
