"""Command-line entry point.

Subcommands cover each stage (simulate, detect, distmat, transitivity,
eigen, cluster, p-sweep) plus ``run`` for the whole pipeline.  Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .changepoint import DetectorConfig, batch_detect, sequential_detect
from .cluster import cut_dendrogram, hierarchical_cluster, spectral_cluster
from .errors import BreakdistError, DataError, NumericalError, UsageError
from .io_utils import (
    dump_json,
    fmt_num,
    load_changepoint_sets,
    load_csv,
    load_distance_matrix,
    log_returns,
    read_config,
    save_changepoint_sets,
    save_distance_matrix,
)
from .matrix import build_distance_matrix, eigen_report, transitivity_audit
from .metrics import parse_metric
from .pipeline import PipelineConfig, run_pipeline
from .sets import ChangePointSet
from .simulate import generate, p_sweep, scenario_spec

_SCENARIO_ALIASES = {
    "none": "none",
    "no-outliers": "none",
    "nooutliers": "none",
    "1": "none",
    "moderate": "moderate",
    "2": "moderate",
    "extreme": "extreme",
    "3": "extreme",
}


class _Parser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting, so main() owns the exit code."""

    def error(self, message):
        raise UsageError(message)


def _scenario_kind(text: str) -> str:
    key = text.strip().lower()
    if key not in _SCENARIO_ALIASES:
        raise UsageError(
            f"unknown scenario {text!r}; choose no-outliers, moderate or extreme"
        )
    return _SCENARIO_ALIASES[key]


def _metric_arg(name: str, p=None):
    """parse_metric, but bad flag values count as usage errors here."""
    try:
        return parse_metric(name, p)
    except DataError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _detector_from(ns) -> DetectorConfig:
    return DetectorConfig(
        statistic=ns.statistic,
        alpha=ns.alpha,
        arl0=ns.arl0,
        min_segment=ns.min_segment,
        mc_replicates=ns.mc_replicates,
        rng_seed=ns.detector_seed,
        cache_dir=ns.cache_dir,
    )


def _add_detector_flags(p: argparse.ArgumentParser, sentinel: bool = False) -> None:
    d = (lambda v: None) if sentinel else (lambda v: v)
    p.add_argument("--statistic", default=d("mw"),
                   help="mann-whitney or kolmogorov-smirnov (default mann-whitney)")
    p.add_argument("--alpha", type=float, default=None,
                   help="per-test level; exclusive with --arl0")
    p.add_argument("--arl0", type=float, default=None,
                   help="average run length under the null; exclusive with --alpha")
    p.add_argument("--min-segment", type=int, default=d(20), dest="min_segment")
    p.add_argument("--mc-replicates", type=int, default=d(5000), dest="mc_replicates",
                   help="Monte-Carlo replicates for threshold calibration")
    p.add_argument("--detector-seed", type=int, default=d(0), dest="detector_seed")
    p.add_argument("--cache-dir", default=None, dest="cache_dir",
                   help="where threshold tables are cached")


def _add_scenario_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-series", type=int, default=None, dest="n_series")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--mean-spacing", type=int, default=None, dest="mean_spacing")
    p.add_argument("--min-spacing", type=int, default=None, dest="min_spacing")
    p.add_argument("--outlier-rate", type=float, default=None, dest="outlier_rate")
    p.add_argument("--outlier-magnitude", type=int, default=None,
                   dest="outlier_magnitude")


def _scenario_from(ns):
    overrides = {
        key: getattr(ns, key)
        for key in ("n_series", "horizon", "mean_spacing", "min_spacing",
                    "outlier_rate", "outlier_magnitude")
        if getattr(ns, key) is not None
    }
    return scenario_spec(_scenario_kind(ns.scenario), ns.seed, **overrides)


def _normalized_points(sets):
    """Indices as fractions of each set's own span (last index + 1)."""
    return [s.points.astype(float) / float(s.points[-1] + 1) for s in sets]


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_simulate(ns) -> int:
    coll = generate(_scenario_from(ns))
    save_changepoint_sets(ns.out, coll.sets)
    if ns.truth:
        lines = ["label,cluster"]
        lines += [f"{s.label},{c}" for s, c in zip(coll.sets, coll.truth.labels)]
        Path(ns.truth).write_text("\n".join(lines) + "\n", encoding="utf-8")
    sys.stdout.write(f"wrote {len(coll.sets)} change-point sets to {ns.out}\n")
    return 0


def cmd_detect(ns) -> int:
    cfg = _detector_from(ns)
    series = load_csv(ns.input)
    if ns.transform == "log_returns":
        series = [log_returns(s) for s in series]
    sets = []
    for s in series:
        if ns.mode == "batch":
            hit = batch_detect(s, cfg)
            if hit is None:
                sys.stdout.write(f"{s.label}: no change\n")
                continue
            sys.stdout.write(
                f"{s.label}: change at {hit.change_point} "
                f"(D={fmt_num(hit.statistic)}, h={fmt_num(hit.threshold)})\n"
            )
            sets.append(ChangePointSet([hit.change_point], label=s.label))
        else:
            res = sequential_detect(s, cfg)
            pts = res.change_points.tolist()
            sys.stdout.write(f"{s.label}: {len(pts)} change(s) {pts}\n")
            if pts:
                sets.append(ChangePointSet(res.change_points, label=s.label))
    save_changepoint_sets(ns.out, sets)
    sys.stdout.write(f"wrote {len(sets)} change-point sets to {ns.out}\n")
    return 0


def cmd_distmat(ns) -> int:
    metric = _metric_arg(ns.metric, ns.p)
    sets = load_changepoint_sets(ns.input)
    if ns.normalize:
        D = build_distance_matrix(
            _normalized_points(sets), metric, labels=[s.label for s in sets]
        )
    else:
        D = build_distance_matrix(sets, metric)
    save_distance_matrix(ns.out, D)
    sys.stdout.write(f"wrote {D.n}x{D.n} {metric.label} matrix to {ns.out}\n")
    return 0


def cmd_transitivity(ns) -> int:
    D = load_distance_matrix(ns.input)
    _emit(dump_json(transitivity_audit(D).to_json_dict()), ns.out)
    return 0


def cmd_eigen(ns) -> int:
    D = load_distance_matrix(ns.input)
    _emit(dump_json(eigen_report(D, ns.epsilon).to_json_dict()), ns.out)
    return 0


def cmd_cluster(ns) -> int:
    D = load_distance_matrix(ns.input)
    if ns.method == "spectral":
        assign = spectral_cluster(D, ns.k if ns.k is not None else 2, seed=ns.seed)
    else:
        dendro = hierarchical_cluster(D, linkage=ns.linkage)
        if ns.k is None:
            _emit(dendro.newick() + "\n", ns.out)
            return 0
        assign = cut_dendrogram(dendro, ns.k)
    lines = ["label,cluster"]
    lines += [f"{lab},{c}" for lab, c in zip(D.labels, assign.labels)]
    _emit("\n".join(lines) + "\n", ns.out)
    return 0


def cmd_run(ns) -> int:
    file_cfg = read_config(ns.config) if ns.config else {}

    def pick(flag, key, conv, default):
        if flag is not None:
            return flag
        if key in file_cfg:
            raw = file_cfg[key]
            if conv is bool:
                if raw.lower() not in ("true", "false"):
                    raise DataError(f"config key {key!r} must be true or false")
                return raw.lower() == "true"
            try:
                return conv(raw)
            except ValueError as exc:
                raise DataError(f"config key {key!r}: {exc}") from exc
        return default

    input_path = pick(ns.input, "input", str, None)
    out_dir = pick(ns.out_dir, "out_dir", str, None)
    if input_path is None:
        raise UsageError("an input file is required (--input or config key input)")
    if out_dir is None:
        raise UsageError("an output directory is required (--out-dir or config key out_dir)")

    detector = DetectorConfig(
        statistic=pick(ns.statistic, "statistic", str, "mw"),
        alpha=pick(ns.alpha, "alpha", float, None),
        arl0=pick(ns.arl0, "arl0", float, None),
        min_segment=pick(ns.min_segment, "min_segment", int, 20),
        mc_replicates=pick(ns.mc_replicates, "mc_replicates", int, 5000),
        rng_seed=pick(ns.detector_seed, "detector_seed", int, 0),
        cache_dir=pick(ns.cache_dir, "cache_dir", str, None),
    )
    metric = _metric_arg(
        pick(ns.metric, "metric", str, "mj1"),
        pick(ns.p, "p", float, None),
    )
    cfg = PipelineConfig(
        input=input_path,
        out_dir=out_dir,
        input_format=pick(ns.input_format, "input_format", str, "series"),
        transform=pick(ns.transform, "transform", str, "none"),
        detector=detector,
        metric=metric,
        k=pick(ns.k, "k", int, None),
        epsilon=pick(ns.epsilon, "epsilon", float, None),
        normalize=pick(ns.normalize, "normalize", bool, False),
        seed=pick(ns.seed, "seed", int, 0),
    )
    report = run_pipeline(cfg)
    sys.stdout.write(f"run complete: {len(report.artifacts)} artifacts in {report.out_dir}\n")
    for name in report.artifacts:
        sys.stdout.write(f"  {name}\n")
    if report.skipped:
        sys.stdout.write(f"skipped (no changes found): {', '.join(report.skipped)}\n")
    return 0


def cmd_p_sweep(ns) -> int:
    try:
        p_values = [float(tok) for tok in ns.p.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--p expects a comma-separated list of numbers, got {ns.p!r}")
    coll = generate(_scenario_from(ns))
    rows = p_sweep(coll, p_values, alpha=ns.alpha, seed=ns.seed)
    lines = ["p,fail_fraction,mean_fail_ratio,cluster_accuracy,transitivity_ok"]
    for r in rows:
        mfr = "" if r.mean_fail_ratio is None else fmt_num(r.mean_fail_ratio)
        lines.append(
            f"{fmt_num(r.p)},{fmt_num(r.fail_fraction)},{mfr},"
            f"{fmt_num(r.cluster_accuracy)},{str(r.transitivity_ok).lower()}"
        )
    _emit("\n".join(lines) + "\n", ns.out)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="breakdist",
                     description="Distances between change-point sets: "
                                 "detection, audits, clustering.")
    parser.add_argument("--version", action="version", version=f"breakdist {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True, metavar="COMMAND")

    p = sub.add_parser("simulate", help="generate a labeled scenario collection")
    p.add_argument("--scenario", required=True,
                   help="no-outliers, moderate or extreme (1/2/3 also accepted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="change-point-set CSV to write")
    p.add_argument("--truth", default=None, help="optional CSV of true cluster labels")
    _add_scenario_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="find change points in a series CSV")
    p.add_argument("--input", required=True, help="series CSV (header of labels)")
    p.add_argument("--transform", choices=("none", "log_returns"), default="none")
    p.add_argument("--mode", choices=("batch", "sequential"), default="sequential",
                   help="batch: at most one change per series; sequential: all changes")
    p.add_argument("--out", required=True, help="change-point-set CSV to write")
    _add_detector_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("distmat", help="pairwise distances between change-point sets")
    p.add_argument("--input", required=True, help="change-point-set CSV")
    p.add_argument("--metric", default="mj1",
                   help="hausdorff, mh1, mh2, mh3, wasserstein, or mj with p "
                        "(compact labels such as mj1, mj0.5, mjinf work)")
    p.add_argument("--p", type=float, default=None, help="exponent when --metric mj")
    p.add_argument("--normalize", action="store_true",
                   help="divide indices by each set's span before measuring")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("transitivity", help="triangle-inequality audit of a matrix")
    p.add_argument("--input", required=True, help="distance-matrix CSV")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_transitivity)

    p = sub.add_parser("eigen", help="eigenvalue summary of a matrix")
    p.add_argument("--input", required=True, help="distance-matrix CSV")
    p.add_argument("--epsilon", type=float, default=None,
                   help="similarity threshold (default: 5%% of the operator norm)")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("cluster", help="cluster series from a distance matrix")
    p.add_argument("--input", required=True, help="distance-matrix CSV")
    p.add_argument("--method", choices=("spectral", "hierarchical"), default="spectral")
    p.add_argument("--k", type=int, default=None,
                   help="cluster count (default 2 for spectral; omit for a "
                        "hierarchical tree)")
    p.add_argument("--linkage", choices=("single", "complete", "average"),
                   default="average")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("run", help="full pipeline: detect, measure, audit, cluster")
    p.add_argument("--config", default=None,
                   help="key=value file; flags given here override it")
    p.add_argument("--input", default=None)
    p.add_argument("--input-format", choices=("series", "sets"), default=None,
                   dest="input_format")
    p.add_argument("--transform", choices=("none", "log_returns"), default=None)
    p.add_argument("--metric", default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.add_argument("--seed", type=int, default=None)
    _add_detector_flags(p, sentinel=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("p-sweep", help="transitivity and recovery across MJ exponents")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", default="0.5,1,2,7",
                   help="comma-separated exponents (default 0.5,1,2,7)")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="fail-fraction level for the transitivity_ok column")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    _add_scenario_overrides(p)
    p.set_defaults(func=cmd_p_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        return ns.func(ns)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except DataError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 3
    except BreakdistError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
