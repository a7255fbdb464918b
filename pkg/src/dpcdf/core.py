"""Datasets, range scaling, empirical CDF/moments and seeded randomness."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DataError, DegenerateBounds, EmptyDataset, OutOfBounds


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RawDataset:
    """Real-valued samples with publicly known bounds ``(lo, hi)``."""

    values: np.ndarray
    bounds: tuple[float, float]

    def __post_init__(self):
        values = _frozen(self.values)
        lo, hi = (float(b) for b in self.bounds)
        if values.size == 0:
            raise EmptyDataset("dataset has no values")
        if not np.isfinite(lo) or not np.isfinite(hi) or lo >= hi:
            raise DegenerateBounds(f"bounds must satisfy lo < hi, got ({lo}, {hi})")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains non-finite values")
        if values.min() < lo or values.max() > hi:
            raise OutOfBounds(
                f"values span [{values.min()}, {values.max()}], outside declared bounds ({lo}, {hi})"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bounds", (lo, hi))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def split(self, parts: int) -> list[RawDataset]:
        """Contiguous near-equal chunks sharing this dataset's bounds."""
        return [RawDataset(chunk, self.bounds) for chunk in np.array_split(self.values, parts)]


@dataclass(frozen=True)
class ScaledDataset:
    values: np.ndarray
    center: float
    halfwidth: float

    @property
    def n(self) -> int:
        return int(self.values.size)

    def unscale(self, u):
        """Map points in [-1, 1] back to the original units."""
        return np.asarray(u, dtype=np.float64) * self.halfwidth + self.center


def unit_transform(bounds: tuple[float, float]) -> tuple[float, float]:
    """``(center, halfwidth)`` of the affine map sending ``bounds`` onto [-1, 1]."""
    lo, hi = bounds
    return (lo + hi) / 2.0, (hi - lo) / 2.0


def scale_to_unit(raw: RawDataset) -> ScaledDataset:
    center, halfwidth = unit_transform(raw.bounds)
    # clip only absorbs rounding at the endpoints
    u = np.clip((raw.values - center) / halfwidth, -1.0, 1.0)
    return ScaledDataset(_frozen(u), center, halfwidth)


def empirical_cdf_eval(data: ScaledDataset, x):
    """Right-continuous eCDF ``#{x_n <= x} / N``; ``x`` may be scalar or array."""
    ordered = np.sort(data.values)
    counts = np.searchsorted(ordered, x, side="right")
    result = counts / ordered.size
    return float(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class MomentVector:
    """Power means ``mu_1 .. mu_{K+1}`` of ``n`` samples in [-1, 1]."""

    moments: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "moments", _frozen(self.moments))
        object.__setattr__(self, "n", int(self.n))
        if self.moments.size == 0:
            raise ValueError("a moment vector needs at least one moment")

    @property
    def k_order(self) -> int:
        return self.moments.size - 1


def empirical_moments(data: ScaledDataset, k_order: int) -> MomentVector:
    if data.n == 0:
        raise EmptyDataset("cannot take moments of an empty dataset")
    if k_order < 0:
        raise ValueError("k_order must be nonnegative")
    mu = _kernels.power_moments(data.values, k_order + 1)
    return MomentVector(mu, data.n)


@dataclass(frozen=True)
class RngSeed:
    """Addressable random stream: same ``(master_seed, stream_index)``, same draws."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(ss))

    def spawn(self, *keys: int) -> RngSeed:
        """Deterministically derive a child stream from integer keys."""
        ss = np.random.SeedSequence([self.stream_index, *keys])
        return RngSeed(self.master_seed, int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1)))

    def as_list(self) -> list[int]:
        return [int(self.master_seed), int(self.stream_index)]


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    raise TypeError(f"expected RngSeed or numpy Generator, got {type(seed).__name__}")


def read_values_csv(path, header: bool = False) -> np.ndarray:
    """Read a single-column CSV of reals; ``header`` skips the first row."""
    text = Path(path).read_text().splitlines()
    if header:
        text = text[1:]
    values = []
    for lineno, line in enumerate(text, start=2 if header else 1):
        cell = line.split(",")[0].strip()
        if not cell:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            raise DataError(f"{path}:{lineno}: not a number: {cell!r}") from None
    if not values:
        raise EmptyDataset(f"{path}: no values")
    return np.array(values)


def write_values_csv(path, values, header: str | None = "value") -> None:
    lines = [header] if header else []
    lines.extend(repr(float(v)) for v in values)
    Path(path).write_text("\n".join(lines) + "\n")
