"""Sensitivities and Gaussian noise calibration.

Neighbouring datasets differ by substituting one record. Noise is calibrated
with the analytic Gaussian condition of Balle & Wang (2018): adding
``N(0, sigma^2 I)`` to a query with l2 sensitivity ``D`` is (eps, delta)-DP iff

    Phi(D/(2 sigma) - eps sigma/D) - e^eps Phi(-D/(2 sigma) - eps sigma/D) <= delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import as_generator
from .errors import EpsilonOutOfRange, InvalidPrivacyParams, NonPositiveN

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        eps, delta = float(self.epsilon), float(self.delta)
        if not (math.isfinite(eps) and eps > 0):
            raise InvalidPrivacyParams(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < delta < 1:
            raise InvalidPrivacyParams(f"delta must lie in (0, 1), got {self.delta}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)

    def split(self, parts: int) -> PrivacyParams:
        """Even share of the budget under sequential composition."""
        return PrivacyParams(self.epsilon / parts, self.delta / parts)


@dataclass(frozen=True)
class NoiseCalibration:
    sigma: float
    sensitivity: float
    params: PrivacyParams | None = None


def moment_sensitivity(k_order: int, n: int, tight: bool = False) -> float:
    """l2 sensitivity of ``(mu_1, ..., mu_{K+1})`` for data in [-1, 1].

    Odd moments can move by ``2/n`` and even ones by ``1/n``. The default
    ``sqrt((5K+8) / (2 n^2))`` is valid for every K; with ``tight=True`` an
    odd K uses the smaller ``sqrt((5K+5) / (2 n^2))``.
    """
    if n < 1:
        raise NonPositiveN(f"n must be >= 1, got {n}")
    if k_order < 0:
        raise ValueError("k_order must be nonnegative")
    numer = 5 * k_order + (5 if tight and k_order % 2 == 1 else 8)
    return math.sqrt(numer / 2.0) / n


def _phi(t: float) -> float:
    # erfc keeps relative accuracy deep in the lower tail
    return 0.5 * math.erfc(-t / _SQRT2)


def privacy_curve(sigma: float, sensitivity: float, epsilon: float) -> float:
    """Smallest delta achieved at ``epsilon`` by Gaussian noise of scale ``sigma``."""
    if sensitivity == 0:
        return 0.0
    if sigma <= 0:
        return 1.0
    a = sensitivity / (2.0 * sigma)
    b = epsilon * sigma / sensitivity
    return _phi(a - b) - math.exp(epsilon) * _phi(-a - b)


def _classical_formula(epsilon: float, delta: float, sensitivity: float) -> float:
    return sensitivity * math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


def classical_gaussian_sigma(params: PrivacyParams, sensitivity: float) -> float:
    """``D sqrt(2 ln(1.25/delta)) / eps``; only valid for eps in (0, 1)."""
    if not 0 < params.epsilon < 1:
        raise EpsilonOutOfRange(f"classical Gaussian mechanism needs eps in (0, 1), got {params.epsilon}")
    if sensitivity < 0:
        raise ValueError("sensitivity must be nonnegative")
    return _classical_formula(params.epsilon, params.delta, sensitivity)


@lru_cache(maxsize=4096)
def _solve_sigma(epsilon: float, delta: float, sensitivity: float, rtol: float) -> float:
    lo = 1e-12 * sensitivity
    hi = 1e6 * _classical_formula(epsilon, delta, sensitivity)
    # curve is decreasing in sigma; bisect on log(sigma)
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi)
        if privacy_curve(mid, sensitivity, epsilon) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_analytic_gaussian(
    params: PrivacyParams, sensitivity: float, rtol: float = 1e-12
) -> NoiseCalibration:
    """Minimal sigma meeting the analytic Gaussian condition.

    The returned value is the upper end of the final bisection bracket, so
    ``privacy_curve(sigma) <= delta`` holds exactly rather than approximately.
    """
    if not isinstance(params, PrivacyParams):
        raise InvalidPrivacyParams("params must be a PrivacyParams instance")
    if not (sensitivity >= 0 and math.isfinite(sensitivity)):
        raise ValueError(f"sensitivity must be finite and >= 0, got {sensitivity}")
    if sensitivity == 0:
        return NoiseCalibration(0.0, 0.0, params)
    sigma = _solve_sigma(params.epsilon, params.delta, float(sensitivity), rtol)
    return NoiseCalibration(sigma, float(sensitivity), params)


def gaussian_perturb(v, calibration: NoiseCalibration, seed) -> np.ndarray:
    """``v + z`` with ``z ~ N(0, sigma^2 I)`` drawn from ``seed`` (RngSeed or Generator)."""
    v = np.asarray(v, dtype=np.float64)
    if calibration.sigma == 0:
        return v.copy()
    z = as_generator(seed).normal(0.0, calibration.sigma, size=v.shape)
    return v + z
