"""Differentially private CDF estimators.

* ``pp_estimate`` -- polynomial projection: one noisy release of the power
  means, then a Legendre series rebuilt from them.
* ``hq_estimate`` -- noisy histogram over uniform bins.
* ``aq_estimate`` -- adaptive quantiles: repeated noisy below/above counts at
  the midpoint of the widest known gap.

All three return a ``CdfEstimate`` on the same uniform grid over the declared
bounds, so results are directly comparable point by point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import _kernels
from .core import (
    MomentVector,
    RawDataset,
    RngSeed,
    as_generator,
    empirical_moments,
    scale_to_unit,
    unit_transform,
)
from .errors import ConfigError, DataError, KTooLarge
from .legendre import MAX_STABLE_ORDER, eval_series, projection_coeffs
from .mechanisms import (
    NoiseCalibration,
    PrivacyParams,
    calibrate_analytic_gaussian,
    gaussian_perturb,
    moment_sensitivity,
)

DEFAULT_GRID = 1000
DEFAULT_K = 6
#: one record moves between two counts under substitution
COUNT_SENSITIVITY = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class CdfEstimate:
    """CDF tabulated on a strictly increasing grid; values nondecreasing in [0, 1]."""

    xs: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = np.array(self.xs, dtype=np.float64).ravel()
        values = np.array(self.values, dtype=np.float64).ravel()
        if xs.size < 2 or xs.size != values.size:
            raise DataError("a CDF grid needs >= 2 points and one value per point")
        if np.any(np.diff(xs) <= 0):
            raise DataError("CDF grid must be strictly increasing")
        if np.any(np.diff(values) < 0) or values.min() < 0 or values.max() > 1:
            raise DataError("CDF values must be nondecreasing and within [0, 1]")
        xs.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        """Linear interpolation between grid points (flat outside the grid)."""
        return np.interp(x, self.xs, self.values)

    def to_csv(self, path) -> None:
        lines = ["x,cdf"] + [f"{x!r},{v!r}" for x, v in zip(self.xs.tolist(), self.values.tolist())]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, meta: dict | None = None) -> CdfEstimate:
        rows = Path(path).read_text().splitlines()[1:]
        pairs = np.array([[float(c) for c in r.split(",")[:2]] for r in rows if r.strip()])
        return cls(pairs[:, 0], pairs[:, 1], dict(meta or {}))


def make_grid(bounds: tuple[float, float], grid_size: int = DEFAULT_GRID) -> np.ndarray:
    if grid_size < 2:
        raise ConfigError(f"grid_size must be >= 2, got {grid_size}")
    lo, hi = bounds
    return np.linspace(lo, hi, grid_size)


# -- post-processing -------------------------------------------------------


def isotonic_project(values) -> np.ndarray:
    """Closest nondecreasing sequence in l2 (pool adjacent violators)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("isotonic_project needs a nonempty sequence")
    return _kernels.pav(values)


def postprocess_cdf(values) -> np.ndarray:
    return np.clip(isotonic_project(values), 0.0, 1.0)


# -- polynomial projection -------------------------------------------------


@dataclass(frozen=True)
class MomentRelease:
    """Outcome of the single private query made by PP.

    ``noise`` is the realised perturbation, kept for verification only; it must
    never leave the data holder.
    """

    moments: MomentVector
    calibration: NoiseCalibration
    noise: np.ndarray


def _check_order(k_order: int) -> None:
    if not 0 <= k_order <= MAX_STABLE_ORDER:
        raise KTooLarge(f"k_order must be in [0, {MAX_STABLE_ORDER}], got {k_order}")


def release_moments(
    data: RawDataset,
    params: PrivacyParams,
    k_order: int,
    seed,
    *,
    sigma_override: float | None = None,
    tight: bool = False,
) -> MomentRelease:
    """Noisy power means of ``data`` scaled to [-1, 1]."""
    _check_order(k_order)
    mu = empirical_moments(scale_to_unit(data), k_order)
    if sigma_override is None:
        sens = moment_sensitivity(k_order, data.n, tight=tight)
        calibration = calibrate_analytic_gaussian(params, sens)
    else:
        calibration = NoiseCalibration(float(sigma_override), float("nan"), params)
    noisy = gaussian_perturb(mu.moments, calibration, seed)
    return MomentRelease(MomentVector(noisy, mu.n), calibration, noisy - mu.moments)


def series_on_grid(moments: MomentVector, bounds: tuple[float, float], grid_size: int = DEFAULT_GRID):
    """Grid and raw (unrepaired) Legendre series for ``moments``."""
    xs = make_grid(bounds, grid_size)
    center, halfwidth = unit_transform(bounds)
    u = np.clip((xs - center) / halfwidth, -1.0, 1.0)
    return xs, eval_series(projection_coeffs(moments), u)


def cdf_from_moments(
    moments: MomentVector,
    bounds: tuple[float, float],
    grid_size: int = DEFAULT_GRID,
    meta: dict | None = None,
) -> CdfEstimate:
    """Post-processing tail of PP: coefficients, series, isotonic repair, clamp."""
    xs, raw = series_on_grid(moments, bounds, grid_size)
    return CdfEstimate(xs, postprocess_cdf(raw), dict(meta or {}))


def pp_estimate(
    data: RawDataset,
    params: PrivacyParams,
    k_order: int = DEFAULT_K,
    grid_size: int = DEFAULT_GRID,
    seed: RngSeed | None = None,
    *,
    sigma_override: float | None = None,
) -> CdfEstimate:
    seed = seed if seed is not None else RngSeed(0)
    release = release_moments(data, params, k_order, seed, sigma_override=sigma_override)
    meta = {
        "method": "pp",
        "epsilon": params.epsilon,
        "delta": params.delta,
        "k_order": k_order,
        "sigma": release.calibration.sigma,
        "queries": 0 if sigma_override is not None else 1,
        "seed": seed.as_list() if isinstance(seed, RngSeed) else None,
    }
    return cdf_from_moments(release.moments, data.bounds, grid_size, meta)


# -- histogram queries -----------------------------------------------------


def bin_edges(bounds: tuple[float, float], bins: int) -> np.ndarray:
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    return np.linspace(bounds[0], bounds[1], bins + 1)


def histogram_counts(data: RawDataset, bins: int) -> np.ndarray:
    counts, _ = np.histogram(data.values, bins=bin_edges(data.bounds, bins))
    return counts.astype(np.float64)


def hq_cdf_from_counts(noisy_counts, bounds: tuple[float, float], xs) -> np.ndarray:
    """Right-continuous step CDF from noisy bin counts.

    Negative counts are zeroed and the rest normalised; the value at ``x`` is
    the mass of all bins whose right edge is ``<= x``. If nothing survives the
    clamp, mass is spread evenly so the output is still a CDF.
    """
    counts = np.maximum(np.asarray(noisy_counts, dtype=np.float64), 0.0)
    total = counts.sum()
    mass = counts / total if total > 0 else np.full(counts.size, 1.0 / counts.size)
    cum = np.concatenate([[0.0], np.cumsum(mass)])
    cum[-1] = 1.0
    right_edges = bin_edges(bounds, counts.size)[1:]
    idx = np.searchsorted(right_edges, xs, side="right")
    return np.minimum(cum[idx], 1.0)


@dataclass(frozen=True)
class HqParams:
    bins: int = 30

    def __post_init__(self):
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")


def hq_estimate(
    data: RawDataset,
    params: PrivacyParams,
    hq: HqParams = HqParams(),
    grid_size: int = DEFAULT_GRID,
    seed: RngSeed | None = None,
    *,
    sigma_override: float | None = None,
) -> CdfEstimate:
    seed = seed if seed is not None else RngSeed(0)
    counts = histogram_counts(data, hq.bins)
    if sigma_override is None:
        calibration = calibrate_analytic_gaussian(params, COUNT_SENSITIVITY)
    else:
        calibration = NoiseCalibration(float(sigma_override), float("nan"), params)
    noisy = gaussian_perturb(counts, calibration, seed)
    xs = make_grid(data.bounds, grid_size)
    meta = {
        "method": "hq",
        "epsilon": params.epsilon,
        "delta": params.delta,
        "bins": hq.bins,
        "sigma": calibration.sigma,
        "queries": 0 if sigma_override is not None else 1,
        "seed": seed.as_list() if isinstance(seed, RngSeed) else None,
    }
    return CdfEstimate(xs, hq_cdf_from_counts(noisy, data.bounds, xs), meta)


# -- adaptive quantiles ----------------------------------------------------


@dataclass(frozen=True)
class AqParams:
    iterations: int = 50

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")


#: maps a candidate split point to (noisy count <= x, noisy count > x)
CountFn = Callable[[float], "tuple[float, float]"]


@dataclass(frozen=True)
class QuantileKnots:
    xs: np.ndarray
    qs: np.ndarray
    fallbacks: int


def adaptive_quantiles(count_fn: CountFn, bounds: tuple[float, float], iterations: int) -> QuantileKnots:
    """Grow the known-quantile map ``{lo: 0, hi: 1}`` by ``iterations`` noisy splits.

    Each round queries the midpoint of the widest gap between known x values.
    When the noisy total is not positive, the midpoint inherits the mean of
    the quantiles of its two bracketing knots. At the end x and q values are
    sorted independently and re-paired, which repairs noise-induced crossings.
    """
    lo, hi = bounds
    known = {lo: 0.0, hi: 1.0}
    order = [lo, hi]
    fallbacks = 0
    for _ in range(iterations):
        gaps = np.diff(order)
        j = int(np.argmax(gaps))
        left, right = order[j], order[j + 1]
        x = 0.5 * (left + right)
        below, above = count_fn(x)
        total = below + above
        if total > 0:
            q = min(max(below / total, 0.0), 1.0)
        else:
            q = 0.5 * (known[left] + known[right])
            fallbacks += 1
        known[x] = q
        order.insert(j + 1, x)
    xs = np.array(order)
    qs = np.sort(np.array([known[x] for x in order]))
    return QuantileKnots(xs, qs, fallbacks)


def aq_estimate(
    data: RawDataset,
    params: PrivacyParams,
    aq: AqParams = AqParams(),
    grid_size: int = DEFAULT_GRID,
    seed: RngSeed | None = None,
    *,
    sigma_override: float | None = None,
) -> CdfEstimate:
    seed = seed if seed is not None else RngSeed(0)
    rng = as_generator(seed)
    ordered = np.sort(data.values)
    n = ordered.size
    per_round = params.split(aq.iterations)
    queries = 0

    def count_fn(x):
        nonlocal queries
        below = float(np.searchsorted(ordered, x, side="right"))
        if sigma_override is None:
            calibration = calibrate_analytic_gaussian(per_round, COUNT_SENSITIVITY)
            queries += 1
        else:
            calibration = NoiseCalibration(float(sigma_override), float("nan"), per_round)
        noisy = gaussian_perturb(np.array([below, n - below]), calibration, rng)
        return float(noisy[0]), float(noisy[1])

    knots = adaptive_quantiles(count_fn, data.bounds, aq.iterations)
    xs = make_grid(data.bounds, grid_size)
    meta = {
        "method": "aq",
        "epsilon": params.epsilon,
        "delta": params.delta,
        "iterations": aq.iterations,
        "queries": queries,
        "per_query_budget": [per_round.epsilon, per_round.delta],
        "noised_counts": "below+above",
        "zero_total_fallbacks": knots.fallbacks,
        "seed": seed.as_list() if isinstance(seed, RngSeed) else None,
    }
    values = np.clip(np.interp(xs, knots.xs, knots.qs), 0.0, 1.0)
    return CdfEstimate(xs, values, meta)
