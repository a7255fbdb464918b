"""Command line entry point: ``dpcdf <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import RawDataset, RngSeed, read_values_csv, write_values_csv
from .errors import ConfigError, DataError, DpCdfError
from .estimators import AqParams, HqParams, aq_estimate, hq_estimate, pp_estimate
from .federation import MomentState, SiteContribution, aggregate, site_contribution, state_cdf, update
from .harness import ExperimentConfig, emit_results, run_benchmark
from .mechanisms import PrivacyParams
from .metrics import DistributionSpec
from .sampling import boxplot_stats, resample_from_cdf, sample_distribution

log = logging.getLogger("dpcdf")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _bounds(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must look like LO,HI, got {text!r}") from None
    return lo, hi


def _dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _params(args, n: int) -> PrivacyParams:
    delta = args.delta if args.delta is not None else float(n) ** -1.5
    return PrivacyParams(args.epsilon, delta)


def _load(args) -> RawDataset:
    return RawDataset(read_values_csv(args.input, header=args.header), args.bounds)


def _add_privacy(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=None, help="default: N^(-3/2)")
    p.add_argument("--bounds", type=_bounds, required=True, metavar="LO,HI")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=1000)


def cmd_sample(args) -> int:
    spec = DistributionSpec.parse(args.dist)
    data = sample_distribution(spec, args.n, RngSeed(args.seed), args.bounds)
    write_values_csv(args.output, data.values, header="value" if args.header else None)
    return EXIT_OK


def cmd_estimate(args) -> int:
    data = _load(args)
    params = _params(args, data.n)
    seed = RngSeed(args.seed)
    if args.method == "pp":
        est = pp_estimate(data, params, args.k, args.grid, seed)
    elif args.method == "hq":
        est = hq_estimate(data, params, HqParams(args.bins), args.grid, seed)
    else:
        est = aq_estimate(data, params, AqParams(args.iterations), args.grid, seed)
    est.to_csv(args.output)
    if args.meta:
        _dump_json(est.meta, args.meta)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.timing:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "record_timing": True})
    emit_results(run_benchmark(cfg, progress=args.verbose), args.output)
    return EXIT_OK


def cmd_federated(args) -> int:
    contribs = []
    for i, path in enumerate(args.sites):
        if str(path).endswith(".json"):
            contribs.append(SiteContribution.from_json(Path(path).read_text()))
            continue
        data = RawDataset(read_values_csv(path, header=args.header), args.bounds)
        if args.epsilon is None:
            raise ConfigError(f"--epsilon is required to release moments for {path}")
        params = PrivacyParams(args.epsilon, args.delta if args.delta is not None else float(data.n) ** -1.5)
        contrib = site_contribution(data, params, args.k, RngSeed(args.seed).spawn(i))
        contribs.append(contrib)
        if args.emit_contributions:
            out = Path(args.emit_contributions)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"site_{i:03d}.json").write_text(contrib.to_json() + "\n")
    state = aggregate(contribs)
    state_cdf(state, args.bounds, args.grid, {"method": "pp", "sites": len(contribs)}).to_csv(args.output)
    if args.state_out:
        _dump_json(state.to_dict(), args.state_out)
    return EXIT_OK


def cmd_update(args) -> int:
    state_path = Path(args.state)
    state = MomentState.from_json(state_path.read_text()) if state_path.exists() else MomentState()
    data = RawDataset(read_values_csv(args.batch, header=args.header), args.bounds)
    params = _params(args, data.n)
    batch = site_contribution(data, params, args.k, RngSeed(args.seed))
    new_state = update(state, batch)
    _dump_json(new_state.to_dict(), args.state_out)
    state_cdf(new_state, args.bounds, args.grid, {"method": "pp"}).to_csv(args.output)
    return EXIT_OK


def cmd_boxplot(args) -> int:
    data = _load(args)
    if args.no_privacy:
        samples = data.values
    else:
        params = _params(args, data.n)
        cdf = pp_estimate(data, params, args.k, args.grid, RngSeed(args.seed))
        m = args.samples if args.samples else data.n
        samples = resample_from_cdf(cdf, m, RngSeed(args.seed).spawn(1))
    _dump_json(boxplot_stats(samples).to_dict(), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpcdf", description="Differentially private CDF estimation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="write a synthetic single-column CSV")
    p.add_argument("--dist", required=True, help='e.g. "normal(0,1)", "beta(0.5,0.5)"')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bounds", type=_bounds, default=None, metavar="LO,HI")
    p.add_argument("--header", action="store_true", help="write a 'value' header row")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="private CDF of a CSV column")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true", help="input has a header row")
    p.add_argument("--method", choices=("pp", "hq", "aq"), default="pp")
    _add_privacy(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--output", required=True)
    p.add_argument("--meta", default=None, help="optional JSON file for run metadata")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("benchmark", help="run an experiment grid from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--timing", action="store_true", help="record wall time (output no longer reproducible)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("federated", help="aggregate per-site CSVs or JSON contributions")
    p.add_argument("--sites", nargs="+", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--bounds", type=_bounds, required=True, metavar="LO,HI")
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--output", required=True)
    p.add_argument("--state-out", default=None)
    p.add_argument("--emit-contributions", default=None, metavar="DIR")
    p.set_defaults(func=cmd_federated)

    p = sub.add_parser("update", help="fold a new batch into a moment state")
    p.add_argument("--state", required=True, help="state JSON; a missing file means an empty state")
    p.add_argument("--batch", required=True)
    p.add_argument("--header", action="store_true")
    _add_privacy(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--state-out", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("boxplot", help="boxplot summary from PP resamples")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    _add_privacy(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--samples", type=int, default=None, help="resample count (default: N)")
    p.add_argument("--no-privacy", action="store_true", help="summarise the raw input instead")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_boxplot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"dpcdf: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"dpcdf: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DpCdfError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"dpcdf: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
