"""Reference computations that share no code with the package."""

import math

import mpmath as mp
import numpy as np


def mp_G(g, t, dps=30):
    """G(t) = int_0^t g by mpmath tanh-sinh quadrature."""
    with mp.workdps(dps):
        return float(mp.quad(g, mp.linspace(0, t, 9)))


def riemann_gagliardo_p(f, fprime_abs, p, s, support, N=2000):
    """int int_{(0,inf)^2} |f(x) - f(y)|^p / |x - y|^(1 + s p) for f supported in [0, support].

    Midpoint tensor sum off the diagonal, the diagonal cells replaced by the
    linearized self-interaction, and the strip y > support integrated along y
    in closed form (midpoint in x).
    """
    h = support / N
    x = (np.arange(N) + 0.5) * h
    fx = f(x)
    total = 0.0
    for i0 in range(0, N, 500):
        xi = x[i0:i0 + 500, None]
        d = np.abs(xi - x[None, :])
        np.fill_diagonal(d[:, i0:i0 + 500], np.inf)
        total += float(np.sum(np.abs(fx[i0:i0 + 500, None] - fx[None, :]) ** p / d ** (1 + s * p))) * h * h
    gam = p * (1 - s) - 1
    cell = 2.0 / ((gam + 1) * (gam + 2))
    total += float(np.sum(fprime_abs(x) ** p)) * h ** (gam + 2) * cell
    # pairs with one point beyond the support, both orderings
    total += 2.0 * float(np.sum(np.abs(fx) ** p * (support - x) ** (-s * p))) * h / (s * p)
    return total


def lp_norm(f, p, a, b, points=()):
    from scipy.integrate import quad
    val, _ = quad(lambda x: abs(f(x)) ** p, a, b, points=list(points) or None, limit=400,
                  epsabs=1e-13, epsrel=1e-12)
    return val ** (1 / p)


def hat(x, L=2.0):
    return np.clip(1.0 - np.abs(2.0 * np.asarray(x) / L - 1.0), 0.0, None)


def hat_slope(x, L=2.0):
    return np.full_like(np.asarray(x, dtype=float), 2.0 / L)


def gamma_weighted(beta, s, p):
    """int_0^inf (x^beta e^-x / x^s)^p / p dx."""
    e = p * (beta - s)
    return math.gamma(e + 1) / (p * p ** (e + 1))
