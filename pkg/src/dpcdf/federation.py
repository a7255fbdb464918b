"""Decentralised aggregation and streaming updates of noisy moments.

Every site (or batch) releases its own noisy moment vector once. The server
only forms count-weighted averages, so it never touches raw records and an
update never revisits old data. Site sample counts are treated as public
metadata: the weighting needs them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .core import MomentVector, RawDataset, RngSeed, as_generator
from .errors import DataError, EmptyContributionList, MismatchedOrder
from .estimators import (
    COUNT_SENSITIVITY,
    DEFAULT_GRID,
    AqParams,
    CdfEstimate,
    HqParams,
    adaptive_quantiles,
    cdf_from_moments,
    histogram_counts,
    hq_cdf_from_counts,
    make_grid,
    release_moments,
)
from .mechanisms import NoiseCalibration, PrivacyParams, calibrate_analytic_gaussian, gaussian_perturb


@dataclass(frozen=True)
class SiteContribution:
    """The single message a site sends: its count and noisy moments."""

    n_site: int
    noisy_moments: MomentVector
    params: PrivacyParams

    @property
    def k_order(self) -> int:
        return self.noisy_moments.k_order

    def to_dict(self) -> dict:
        return {
            "n_site": self.n_site,
            "k_order": self.k_order,
            "epsilon": self.params.epsilon,
            "delta": self.params.delta,
            "moments": self.noisy_moments.moments.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> SiteContribution:
        try:
            moments = MomentVector(d["moments"], int(d["n_site"]))
            params = PrivacyParams(d["epsilon"], d["delta"])
            k_order = int(d["k_order"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed site contribution: {exc}") from None
        if moments.k_order != k_order:
            raise MismatchedOrder(f"k_order={k_order} but {moments.moments.size} moments given")
        return cls(int(d["n_site"]), moments, params)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> SiteContribution:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MomentState:
    """Running pooled noisy moments; empty until the first batch arrives."""

    n_total: int = 0
    moments: MomentVector | None = None

    def __post_init__(self):
        if (self.n_total == 0) != (self.moments is None):
            raise ValueError("n_total must be 0 exactly when no moments are held")

    @property
    def empty(self) -> bool:
        return self.moments is None

    def to_dict(self) -> dict:
        return {
            "n_total": self.n_total,
            "k_order": None if self.empty else self.moments.k_order,
            "moments": None if self.empty else self.moments.moments.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> MomentState:
        if not d.get("moments"):
            return cls()
        return cls(int(d["n_total"]), MomentVector(d["moments"], int(d["n_total"])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> MomentState:
        return cls.from_dict(json.loads(text))


def site_contribution(
    data: RawDataset,
    params: PrivacyParams,
    k_order: int,
    seed,
    *,
    sigma_override: float | None = None,
) -> SiteContribution:
    """Local release; sensitivity uses the site's own count."""
    release = release_moments(data, params, k_order, seed, sigma_override=sigma_override)
    return SiteContribution(data.n, release.moments, params)


def _merge(n_a: int, mu_a: np.ndarray, n_b: int, mu_b: np.ndarray) -> np.ndarray:
    return (n_a * mu_a + n_b * mu_b) / (n_a + n_b)


def aggregate(contributions: Sequence[SiteContribution]) -> MomentState:
    contributions = list(contributions)
    if not contributions:
        raise EmptyContributionList("nothing to aggregate")
    orders = {c.k_order for c in contributions}
    if len(orders) != 1:
        raise MismatchedOrder(f"contributions disagree on k_order: {sorted(orders)}")
    counts = np.array([c.n_site for c in contributions], dtype=np.float64)
    stacked = np.stack([c.noisy_moments.moments for c in contributions])
    n_total = int(counts.sum())
    mu = counts @ stacked / counts.sum()
    return MomentState(n_total, MomentVector(mu, n_total))


def update(state: MomentState, batch: SiteContribution) -> MomentState:
    """Fold one new batch into the running state; returns a new state."""
    if state.empty:
        return MomentState(batch.n_site, MomentVector(batch.noisy_moments.moments, batch.n_site))
    if state.moments.k_order != batch.k_order:
        raise MismatchedOrder(f"state has K={state.moments.k_order}, batch has K={batch.k_order}")
    n_total = state.n_total + batch.n_site
    mu = _merge(state.n_total, state.moments.moments, batch.n_site, batch.noisy_moments.moments)
    return MomentState(n_total, MomentVector(mu, n_total))


def update_all(state: MomentState, batches: Sequence[SiteContribution]) -> MomentState:
    return reduce(update, batches, state)


def state_cdf(
    state: MomentState, bounds: tuple[float, float], grid_size: int = DEFAULT_GRID, meta: dict | None = None
) -> CdfEstimate:
    if state.empty:
        raise DataError("no data has been folded into this state yet")
    return cdf_from_moments(state.moments, bounds, grid_size, meta)


# -- baselines in the decentralised setting --------------------------------


def federated_hq(
    sites: Sequence[RawDataset],
    params: PrivacyParams,
    hq: HqParams = HqParams(),
    grid_size: int = DEFAULT_GRID,
    seed: RngSeed = RngSeed(0),
    *,
    sigma_override: float | None = None,
) -> CdfEstimate:
    """Each site sends one noisy histogram; the server sums them."""
    bounds = sites[0].bounds
    total = np.zeros(hq.bins)
    for s, site in enumerate(sites):
        if sigma_override is None:
            calibration = calibrate_analytic_gaussian(params, COUNT_SENSITIVITY)
        else:
            calibration = NoiseCalibration(float(sigma_override), float("nan"), params)
        total += gaussian_perturb(histogram_counts(site, hq.bins), calibration, seed.spawn(s))
    xs = make_grid(bounds, grid_size)
    meta = {"method": "hq", "sites": len(sites), "rounds": 1, "epsilon": params.epsilon, "delta": params.delta}
    return CdfEstimate(xs, hq_cdf_from_counts(total, bounds, xs), meta)


def federated_aq(
    sites: Sequence[RawDataset],
    params: PrivacyParams,
    aq: AqParams = AqParams(),
    grid_size: int = DEFAULT_GRID,
    seed: RngSeed = RngSeed(0),
    *,
    sigma_override: float | None = None,
) -> CdfEstimate:
    """Every round the server broadcasts a candidate and sums noisy site counts.

    This needs ``iterations`` round trips, against a single message per site
    for PP and HQ.
    """
    bounds = sites[0].bounds
    per_round = params.split(aq.iterations)
    ordered = [np.sort(site.values) for site in sites]
    rngs = [as_generator(seed.spawn(s)) for s in range(len(sites))]

    def count_fn(x):
        below = above = 0.0
        for values, rng in zip(ordered, rngs):
            if sigma_override is None:
                calibration = calibrate_analytic_gaussian(per_round, COUNT_SENSITIVITY)
            else:
                calibration = NoiseCalibration(float(sigma_override), float("nan"), per_round)
            b = float(np.searchsorted(values, x, side="right"))
            noisy = gaussian_perturb(np.array([b, values.size - b]), calibration, rng)
            below += noisy[0]
            above += noisy[1]
        return below, above

    knots = adaptive_quantiles(count_fn, bounds, aq.iterations)
    xs = make_grid(bounds, grid_size)
    meta = {
        "method": "aq",
        "sites": len(sites),
        "rounds": aq.iterations,
        "epsilon": params.epsilon,
        "delta": params.delta,
        "zero_total_fallbacks": knots.fallbacks,
    }
    return CdfEstimate(xs, np.clip(np.interp(xs, knots.xs, knots.qs), 0.0, 1.0), meta)
