"""Synthetic data, inverse-transform resampling and boxplot summaries.

Resampling from a released CDF is post-processing and spends no budget, so a
boxplot drawn from the resamples inherits the CDF's privacy guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RawDataset, as_generator
from .estimators import CdfEstimate
from .metrics import DistributionSpec


def sample_distribution(spec: DistributionSpec, n: int, seed, bounds: tuple[float, float] | None = None) -> RawDataset:
    """``n`` i.i.d. draws from ``spec`` clipped to ``bounds`` (default: its declared bounds)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = as_generator(seed)
    p, q = spec.params
    if spec.family == "normal":
        x = rng.normal(p, q, size=n)
    elif spec.family == "lognormal":
        x = rng.lognormal(p, q, size=n)
    elif spec.family == "beta":
        x = rng.beta(p, q, size=n)
    else:
        x = rng.uniform(p, q, size=n)
    lo, hi = bounds if bounds is not None else spec.default_bounds()
    return RawDataset(np.clip(x, lo, hi), (lo, hi))


def quantile_from_cdf(cdf: CdfEstimate, u) -> np.ndarray:
    """Generalised inverse of the piecewise-linear CDF through the grid values.

    For ``u`` inside a rising segment the answer is interpolated; ``u`` at or
    below ``cdf.values[0]`` maps to the lower grid end and ``u`` above the
    last value (mass the estimate left unassigned) to the upper end.
    """
    u = np.asarray(u, dtype=np.float64)
    xs, v = cdf.xs, cdf.values
    j = np.searchsorted(v, u, side="left")
    inner = (j > 0) & (j < v.size)
    out = np.where(j >= v.size, xs[-1], xs[0]).astype(np.float64)
    ji = j[inner]
    v0, v1 = v[ji - 1], v[ji]
    frac = (u[inner] - v0) / (v1 - v0)
    out[inner] = xs[ji - 1] + frac * (xs[ji] - xs[ji - 1])
    return out


def resample_from_cdf(cdf: CdfEstimate, m: int, seed) -> np.ndarray:
    """``m`` inverse-transform draws from ``cdf``.

    A constant CDF puts all mass on one grid end, so every draw lands there.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    u = as_generator(seed).uniform(0.0, 1.0, size=m)
    return quantile_from_cdf(cdf, u)


@dataclass(frozen=True)
class BoxplotSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "min": self.minimum,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.maximum,
            "whiskers": [self.whisker_lo, self.whisker_hi],
            "outliers": list(self.outliers),
        }


def boxplot_stats(samples, whis: float = 1.5) -> BoxplotSummary:
    """Tukey boxplot numbers.

    Quartiles use linear interpolation between order statistics: the p-th
    quantile sits at fractional index ``p * (n - 1)`` of the sorted data.
    Whiskers reach the most extreme samples inside
    ``[q1 - whis * IQR, q3 + whis * IQR]``; anything beyond is an outlier.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x.size == 0:
        raise ValueError("boxplot_stats needs at least one sample")
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75], method="linear")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - whis * iqr, q3 + whis * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = x[(x < lo_fence) | (x > hi_fence)]
    return BoxplotSummary(
        minimum=float(x[0]),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(x[-1]),
        whisker_lo=float(inside[0]),
        whisker_hi=float(inside[-1]),
        outliers=tuple(float(o) for o in outliers),
    )
