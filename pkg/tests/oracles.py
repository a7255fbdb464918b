"""Independent reference computations used to freeze and check expected values.

Nothing here calls into the code path it is used to check: projections are
done by quadrature instead of the moment formula, Legendre values come from
numpy's own series evaluator, the isotonic fit is found by enumeration, and
the noise calibration follows the s-parameterisation of Balle & Wang with
scipy's normal CDF and root finder.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.optimize import brentq
from scipy.stats import norm

GL_NODES, GL_WEIGHTS = npleg.leggauss(64)


def gl_integrate(f, a: float, b: float) -> float:
    """64-node Gauss-Legendre on [a, b]."""
    if b <= a:
        return 0.0
    x = 0.5 * (b - a) * GL_NODES + 0.5 * (a + b)
    return float(0.5 * (b - a) * np.dot(GL_WEIGHTS, f(x)))


def ecdf_breaks(data) -> np.ndarray:
    pts = np.unique(np.clip(np.asarray(data, dtype=float), -1, 1))
    return np.unique(np.concatenate([[-1.0], pts, [1.0]]))


def integrate_against_ecdf(data, g) -> float:
    """``integral_{-1}^{1} F(x) g(x) dx`` for the eCDF of ``data``.

    F is constant between consecutive data points, so splitting there makes
    the 64-node rule exact for polynomial ``g`` up to degree 127.
    """
    data = np.asarray(data, dtype=float)
    breaks = ecdf_breaks(data)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        level = np.count_nonzero(data <= a) / data.size
        if level:
            total += level * gl_integrate(g, a, b)
    return total


def legendre_values(k: int, x) -> np.ndarray:
    c = np.zeros(k + 1)
    c[k] = 1.0
    return npleg.legval(np.asarray(x, dtype=float), c)


def basis_values(k: int, x) -> np.ndarray:
    return math.sqrt((2 * k + 1) / 2) * legendre_values(k, x)


def ecdf_projection_coeffs(data, k_order: int) -> np.ndarray:
    return np.array(
        [integrate_against_ecdf(data, lambda x, k=k: basis_values(k, x)) for k in range(k_order + 1)]
    )


def smooth_projection_coeffs(f, k_order: int, panels: int = 32) -> np.ndarray:
    """Projection coefficients of a smooth ``f`` on [-1, 1] by composite GL."""
    edges = np.linspace(-1, 1, panels + 1)
    return np.array(
        [
            sum(gl_integrate(lambda x, k=k: f(x) * basis_values(k, x), a, b) for a, b in zip(edges[:-1], edges[1:]))
            for k in range(k_order + 1)
        ]
    )


def series_values(coeffs, x) -> np.ndarray:
    """``sum_k c_k e_k(x)`` via numpy's Legendre evaluator."""
    coeffs = np.asarray(coeffs, dtype=float)
    scaled = coeffs * np.sqrt((2 * np.arange(coeffs.size) + 1) / 2)
    return npleg.legval(np.asarray(x, dtype=float), scaled)


def brute_force_isotonic(y) -> np.ndarray:
    """Exhaustive search over contiguous block partitions.

    A nondecreasing l2 fit is piecewise constant with block means as values,
    so the optimum is among the 2**(n-1) partitions whose block means are
    nondecreasing. Costs are compared in exact rationals; in floats a large
    block swamps sub-ulp differences between candidates.
    """
    y = [Fraction(float(v)) for v in y]
    n = len(y)
    best, best_cost = None, None
    for cuts in itertools.product((False, True), repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        blocks = [y[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        means = [sum(b) / len(b) for b in blocks]
        if any(m1 > m2 for m1, m2 in zip(means[:-1], means[1:])):
            continue
        cost = sum((v - m) ** 2 for b, m in zip(blocks, means) for v in b)
        if best_cost is None or cost < best_cost:
            best = [float(m) for b, m in zip(blocks, means) for _ in b]
            best_cost = cost
    return np.array(best)


def balle_wang_sigma(epsilon: float, delta: float, sensitivity: float) -> float:
    """Analytic Gaussian sigma via the s-parameterised search (Balle & Wang 2018)."""

    def b_plus(s):
        return norm.cdf(math.sqrt(epsilon * s)) - math.exp(epsilon) * norm.cdf(-math.sqrt(epsilon * (s + 2)))

    def b_minus(s):
        return norm.cdf(-math.sqrt(epsilon * s)) - math.exp(epsilon) * norm.cdf(-math.sqrt(epsilon * (s + 2)))

    delta0 = 0.5 - math.exp(epsilon) * norm.cdf(-math.sqrt(2 * epsilon))
    if delta >= delta0:
        hi = 1.0
        while b_plus(hi) < delta:
            hi *= 2
        s = brentq(lambda s: b_plus(s) - delta, 0, hi, xtol=1e-14, rtol=1e-15)
        a = math.sqrt(1 + s / 2) - math.sqrt(s / 2)
    else:
        hi = 1.0
        while b_minus(hi) > delta:
            hi *= 2
        s = brentq(lambda s: b_minus(s) - delta, 0, hi, xtol=1e-14, rtol=1e-15)
        a = math.sqrt(1 + s / 2) + math.sqrt(s / 2)
    return a * sensitivity / math.sqrt(2 * epsilon)


def phi_condition(sigma: float, sensitivity: float, epsilon: float) -> float:
    """Privacy-curve value with scipy's normal CDF."""
    a = sensitivity / (2 * sigma)
    b = epsilon * sigma / sensitivity
    return float(norm.cdf(a - b) - math.exp(epsilon) * norm.cdf(-a - b))
