"""Benchmark orchestration: paired PP/HQ/AQ runs across privacy levels.

For every (epsilon, run) pair one dataset is drawn and all methods see that
same dataset, so per-run comparisons are paired. Streams are addressed by
``RngSeed(master_seed).spawn(eps_index, run, role)``; nothing depends on
wall-clock time unless timing is switched on explicitly.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import RawDataset, RngSeed
from .errors import ConfigInvalid, DpCdfError
from .estimators import (
    DEFAULT_GRID,
    AqParams,
    CdfEstimate,
    HqParams,
    aq_estimate,
    hq_estimate,
    make_grid,
    pp_estimate,
)
from .federation import (
    MomentState,
    aggregate,
    federated_aq,
    federated_hq,
    site_contribution,
    state_cdf,
    update,
)
from .mechanisms import PrivacyParams
from .metrics import DistributionSpec, all_distances, reference_cdf
from .sampling import sample_distribution

log = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.05, 0.1, 0.25, 0.5, 1.0)
METHODS = ("aq", "hq", "pp")
MODES = ("single", "federated", "streaming")
RESULT_FIELDS = ("method", "epsilon", "run", "ks", "emd", "energy", "wall_time_ms")

_ROLE_DATA, _ROLE_PP, _ROLE_HQ, _ROLE_AQ = range(4)


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: DistributionSpec = DistributionSpec("normal", (0.0, 1.0))
    n: int = 10_000
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    delta_rule: str | float = "n^(-3/2)"
    k_order: int = 6
    hq_bins: int = 30
    aq_iterations: int = 50
    runs: int = 50
    grid_size: int = DEFAULT_GRID
    master_seed: int = 0
    mode: str = "single"
    sites: int = 10
    batches: int = 10
    record_timing: bool = False
    methods: tuple[str, ...] = field(default=METHODS)

    def __post_init__(self):
        problems = []
        if self.runs < 1:
            problems.append("runs must be >= 1")
        if self.n < 1:
            problems.append("n must be >= 1")
        if not self.epsilons or any(not e > 0 for e in self.epsilons):
            problems.append("epsilons must be a nonempty list of positive numbers")
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}")
        if self.mode == "federated" and not 1 <= self.sites <= self.n:
            problems.append("sites must be in [1, n]")
        if self.mode == "streaming" and not 1 <= self.batches <= self.n:
            problems.append("batches must be in [1, n]")
        if not set(self.methods) <= set(METHODS) or not self.methods:
            problems.append(f"methods must be a nonempty subset of {METHODS}")
        if self.grid_size < 2:
            problems.append("grid_size must be >= 2")
        if self.master_seed < 0:
            problems.append("master_seed must be nonnegative")
        if isinstance(self.delta_rule, str):
            if self.delta_rule.replace(" ", "") != "n^(-3/2)":
                problems.append('delta_rule must be "n^(-3/2)" or a number in (0, 1)')
        elif not 0 < float(self.delta_rule) < 1:
            problems.append("fixed delta must lie in (0, 1)")
        if problems:
            raise ConfigInvalid("; ".join(problems))

    @property
    def delta(self) -> float:
        if isinstance(self.delta_rule, str):
            return float(self.n) ** -1.5
        return float(self.delta_rule)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        try:
            if "distribution" in d:
                dist = d["distribution"]
                if isinstance(dist, str):
                    d["distribution"] = DistributionSpec.parse(dist)
                else:
                    d["distribution"] = DistributionSpec(dist["family"], tuple(dist["params"]))
            for key in ("epsilons", "methods"):
                if key in d:
                    d[key] = tuple(d[key])
            return cls(**d)
        except ConfigInvalid:
            raise
        except (DpCdfError, KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"invalid config: {exc}") from None

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigInvalid("config must be a JSON object")
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["distribution"] = str(self.distribution)
        d["epsilons"] = list(self.epsilons)
        d["methods"] = list(self.methods)
        return d


@dataclass(frozen=True)
class ResultRow:
    method: str
    epsilon: float
    run: int
    ks: float
    emd: float
    energy: float
    wall_time_ms: float = 0.0


def _single(data, params, cfg, seeds):
    yield "pp", lambda: pp_estimate(data, params, cfg.k_order, cfg.grid_size, seeds["pp"])
    yield "hq", lambda: hq_estimate(data, params, HqParams(cfg.hq_bins), cfg.grid_size, seeds["hq"])
    yield "aq", lambda: aq_estimate(data, params, AqParams(cfg.aq_iterations), cfg.grid_size, seeds["aq"])


def _federated(data, params, cfg, seeds):
    sites = data.split(cfg.sites)

    def pp():
        contribs = [site_contribution(s, params, cfg.k_order, seeds["pp"].spawn(i)) for i, s in enumerate(sites)]
        meta = {"method": "pp", "sites": len(sites), "rounds": 1}
        return state_cdf(aggregate(contribs), data.bounds, cfg.grid_size, meta)

    yield "pp", pp
    yield "hq", lambda: federated_hq(sites, params, HqParams(cfg.hq_bins), cfg.grid_size, seeds["hq"])
    yield "aq", lambda: federated_aq(sites, params, AqParams(cfg.aq_iterations), cfg.grid_size, seeds["aq"])


def _streaming(data, params, cfg, seeds):
    """PP folds each batch in at full budget (disjoint records); HQ and AQ
    recompute on the cumulative data every round, so each round gets
    ``budget / batches`` and only the final round's release is scored."""
    batches = data.split(cfg.batches)
    rebudget = params.split(cfg.batches)

    def pp():
        state = MomentState()
        for i, b in enumerate(batches):
            state = update(state, site_contribution(b, params, cfg.k_order, seeds["pp"].spawn(i)))
        return state_cdf(state, data.bounds, cfg.grid_size, {"method": "pp", "rounds": len(batches)})

    last = len(batches) - 1
    yield "pp", pp
    yield "hq", lambda: hq_estimate(data, rebudget, HqParams(cfg.hq_bins), cfg.grid_size, seeds["hq"].spawn(last))
    yield "aq", lambda: aq_estimate(
        data, rebudget, AqParams(cfg.aq_iterations), cfg.grid_size, seeds["aq"].spawn(last)
    )


_MODE_RUNNERS = {"single": _single, "federated": _federated, "streaming": _streaming}


def run_benchmark(config: ExperimentConfig, progress: bool = False) -> list[ResultRow]:
    """Score every requested method at every (epsilon, run) against the true CDF."""
    root = RngSeed(config.master_seed)
    bounds = config.distribution.default_bounds()
    truth = reference_cdf(config.distribution, make_grid(bounds, config.grid_size))
    runner = _MODE_RUNNERS[config.mode]
    rows: list[ResultRow] = []
    for ei, eps in enumerate(config.epsilons):
        params = PrivacyParams(eps, config.delta)
        for run in range(config.runs):
            data = sample_distribution(config.distribution, config.n, root.spawn(ei, run, _ROLE_DATA), bounds)
            seeds = {
                "pp": root.spawn(ei, run, _ROLE_PP),
                "hq": root.spawn(ei, run, _ROLE_HQ),
                "aq": root.spawn(ei, run, _ROLE_AQ),
            }
            for method, estimate in runner(data, params, config, seeds):
                if method not in config.methods:
                    continue
                t0 = time.perf_counter()
                est: CdfEstimate = estimate()
                elapsed = (time.perf_counter() - t0) * 1e3 if config.record_timing else 0.0
                d = all_distances(est, truth)
                rows.append(ResultRow(method, float(eps), run, d["ks"], d["emd"], d["energy"], elapsed))
            if progress:
                log.info("eps=%g run %d/%d done", eps, run + 1, config.runs)
    return sort_rows(rows)


def sort_rows(rows: Sequence[ResultRow]) -> list[ResultRow]:
    return sorted(rows, key=lambda r: (r.method, r.epsilon, r.run))


def emit_results(rows: Sequence[ResultRow], path) -> None:
    if not rows:
        raise ValueError("no result rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_FIELDS)
        for r in sort_rows(rows):
            writer.writerow([r.method, repr(r.epsilon), r.run, repr(r.ks), repr(r.emd), repr(r.energy), repr(r.wall_time_ms)])


def read_results(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            ResultRow(
                row["method"],
                float(row["epsilon"]),
                int(row["run"]),
                float(row["ks"]),
                float(row["emd"]),
                float(row["energy"]),
                float(row["wall_time_ms"]),
            )
            for row in reader
        ]


def summarize(rows: Sequence[ResultRow]) -> dict[tuple[str, float], dict[str, float]]:
    """Median of each distance per (method, epsilon)."""
    groups: dict[tuple[str, float], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.method, r.epsilon), []).append(r)
    return {
        key: {m: float(np.median([getattr(r, m) for r in rs])) for m in ("ks", "emd", "energy")}
        for key, rs in sorted(groups.items())
    }


def paired_dataset(config: ExperimentConfig, eps_index: int, run: int) -> RawDataset:
    """The dataset every method sees at ``(eps_index, run)``."""
    return sample_distribution(
        config.distribution,
        config.n,
        RngSeed(config.master_seed).spawn(eps_index, run, _ROLE_DATA),
        config.distribution.default_bounds(),
    )
