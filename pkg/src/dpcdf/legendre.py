"""Legendre basis on [-1, 1] and the closed-form eCDF projection.

The projection of an eCDF ``F`` onto span{e_0..e_K} needs only the data's
power means, because

    integral_{-1}^{1} F(x) x**i dx = (1 - mu_{i+1}) / (i + 1)

for every i >= 0. Expanding ``P_k`` in monomials then gives

    (F | e_k) = alpha_k * sum_i beta_{k,i} * (1 - mu_{i+1})

with ``alpha_k = 2**k sqrt((2k+1)/2)`` and
``beta_{k,i} = C(k, i) C((k+i-1)/2, k) / (i + 1)``. The monomial expansion is
used only for these coefficients; evaluation goes through the recurrence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import MomentVector

#: beyond this order alpha_k ~ 2**k cancellation costs too many digits
MAX_STABLE_ORDER = 16


def legendre_eval(k: int, x):
    """``P_k(x)`` by ``(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    row = _kernels.legendre_table(k, xa)[k]
    return float(row[0]) if np.ndim(x) == 0 else row.reshape(np.shape(x))


def basis_table(kmax: int, x) -> np.ndarray:
    """Matrix with rows ``e_0(x) .. e_kmax(x)`` for a 1-D array ``x``."""
    table = _kernels.legendre_table(kmax, np.atleast_1d(np.asarray(x, dtype=np.float64)))
    norms = np.sqrt((2.0 * np.arange(kmax + 1) + 1.0) / 2.0)
    return table * norms[:, None]


def basis_eval(k: int, x):
    """Orthonormal basis function ``e_k = sqrt((2k+1)/2) P_k``."""
    return math.sqrt((2 * k + 1) / 2.0) * legendre_eval(k, x)


def generalized_binom(top: Fraction, k: int) -> Fraction:
    """``C(top, k)`` for rational ``top`` by the falling-factorial product."""
    num = Fraction(1)
    for j in range(k):
        num *= top - j
    return num / math.factorial(k)


@lru_cache(maxsize=None)
def _beta_exact(k: int, i: int) -> Fraction:
    top = Fraction(k + i - 1, 2)
    return Fraction(math.comb(k, i), i + 1) * generalized_binom(top, k)


def beta_coeff(k: int, i: int) -> float:
    if not 0 <= i <= k:
        raise ValueError(f"need 0 <= i <= k, got k={k}, i={i}")
    return float(_beta_exact(k, i))


def alpha_coeff(k: int) -> float:
    return 2.0**k * math.sqrt((2 * k + 1) / 2.0)


@lru_cache(maxsize=None)
def _coefficient_matrix(k_order: int) -> np.ndarray:
    mat = np.zeros((k_order + 1, k_order + 1))
    for k in range(k_order + 1):
        a = alpha_coeff(k)
        for i in range(k + 1):
            mat[k, i] = a * beta_coeff(k, i)
    mat.setflags(write=False)
    return mat


def coefficient_matrix(k_order: int) -> np.ndarray:
    """Lower-triangular ``A`` with ``c = A @ (1 - mu)``; ``A[k, i] = alpha_k beta_{k,i}``."""
    return _coefficient_matrix(int(k_order))


@dataclass(frozen=True)
class ProjectionCoefficients:
    coeffs: np.ndarray

    @property
    def k_order(self) -> int:
        return self.coeffs.size - 1


def projection_coeffs(mu: MomentVector) -> ProjectionCoefficients:
    """Coefficients ``(F|e_k)``, k = 0..K, from (possibly noisy) moments."""
    k_order = mu.k_order
    if k_order > MAX_STABLE_ORDER:
        warnings.warn(
            f"K={k_order} exceeds {MAX_STABLE_ORDER}; coefficients lose precision in double arithmetic",
            RuntimeWarning,
            stacklevel=2,
        )
    c = coefficient_matrix(k_order) @ (1.0 - mu.moments)
    if not np.all(np.isfinite(c)):
        raise FloatingPointError("non-finite projection coefficients")
    return ProjectionCoefficients(c)


def eval_series(c: ProjectionCoefficients, x):
    """Raw series ``sum_k c_k e_k(x)``; no clamping or monotone repair."""
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = c.coeffs @ basis_table(c.k_order, xa)
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(np.shape(x))
