"""Reference distributions and distances between tabulated CDFs."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, InvalidParameters
from .estimators import CdfEstimate

_FAMILIES = {"normal": 2, "lognormal": 2, "beta": 2, "uniform": 2}


@dataclass(frozen=True)
class DistributionSpec:
    """``family`` with ``params``:

    normal (mean, sd) | lognormal (logmean, logsd) | beta (a, b) | uniform (lo, hi)
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        family = self.family.lower()
        params = tuple(float(p) for p in self.params)
        if family not in _FAMILIES:
            raise InvalidParameters(f"unknown family {self.family!r}; choose from {sorted(_FAMILIES)}")
        if len(params) != _FAMILIES[family]:
            raise InvalidParameters(f"{family} takes {_FAMILIES[family]} parameters, got {len(params)}")
        p, q = params
        if family in ("normal", "lognormal") and not q > 0:
            raise InvalidParameters(f"{family} scale must be > 0")
        if family == "beta" and not (p > 0 and q > 0):
            raise InvalidParameters("beta shapes must be > 0")
        if family == "uniform" and not p < q:
            raise InvalidParameters("uniform needs lo < hi")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str) -> DistributionSpec:
        """Parse ``"normal(0,1)"``-style strings."""
        m = re.fullmatch(r"\s*([A-Za-z]+)\s*\(([^)]*)\)\s*", text)
        if not m:
            raise InvalidParameters(f"cannot parse distribution {text!r}")
        try:
            params = tuple(float(p) for p in m.group(2).split(","))
        except ValueError:
            raise InvalidParameters(f"cannot parse distribution {text!r}") from None
        return cls(m.group(1), params)

    def __str__(self) -> str:
        return f"{self.family}({','.join(repr(p) for p in self.params)})"

    def default_bounds(self) -> tuple[float, float]:
        """Support used for clipping; mass outside stays below 1e-6."""
        p, q = self.params
        if self.family == "normal":
            return (p - 5 * q, p + 5 * q)
        if self.family == "lognormal":
            return (0.0, math.exp(p + 5 * q))
        if self.family == "beta":
            return (0.0, 1.0)
        return (p, q)


# -- special functions -----------------------------------------------------


def _betacf(a: float, b: float, x: float, max_iter: int = 200, eps: float = 1e-15) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _normal_cdf(z):
    return 0.5 * np.vectorize(math.erfc, otypes=[float])(-np.asarray(z, dtype=np.float64) / math.sqrt(2.0))


def true_cdf(spec: DistributionSpec, x):
    """Closed-form CDF of ``spec`` at scalar or array ``x``."""
    xa = np.asarray(x, dtype=np.float64)
    p, q = spec.params
    if spec.family == "normal":
        out = _normal_cdf((xa - p) / q)
    elif spec.family == "lognormal":
        with np.errstate(divide="ignore"):
            logs = np.log(np.where(xa > 0, xa, 1.0))
        out = np.where(xa > 0, _normal_cdf((logs - p) / q), 0.0)
    elif spec.family == "beta":
        out = np.vectorize(lambda t: regularized_incomplete_beta(p, q, t), otypes=[float])(xa)
    else:
        out = np.clip((xa - p) / (q - p), 0.0, 1.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


# -- distances -------------------------------------------------------------


def _aligned(f1, f2):
    if f1.xs.shape != f2.xs.shape or not np.array_equal(f1.xs, f2.xs):
        raise GridMismatch("CDF estimates are tabulated on different grids")
    return f1.xs, f1.values - f2.values


def ks_distance(f1, f2) -> float:
    _, diff = _aligned(f1, f2)
    return float(np.max(np.abs(diff)))


def emd(f1, f2) -> float:
    """1-Wasserstein distance as the trapezoid integral of ``|F1 - F2|``."""
    xs, diff = _aligned(f1, f2)
    return float(np.trapezoid(np.abs(diff), xs))


def energy_distance(f1, f2) -> float:
    """``sqrt(2 * integral (F1 - F2)^2)``, trapezoid rule."""
    xs, diff = _aligned(f1, f2)
    return float(math.sqrt(2.0 * np.trapezoid(diff**2, xs)))


def all_distances(f1, f2) -> dict[str, float]:
    return {"ks": ks_distance(f1, f2), "emd": emd(f1, f2), "energy": energy_distance(f1, f2)}


def reference_cdf(spec: DistributionSpec, xs):
    """``true_cdf`` tabulated as a ``CdfEstimate`` on ``xs``."""
    return CdfEstimate(xs, np.maximum.accumulate(true_cdf(spec, xs)), {"method": "true", "spec": str(spec)})
