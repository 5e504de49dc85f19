"""The full run: ingest series or sets, detect changes, build the distance
matrix, audit it, cluster it, and write every artifact to one directory.

Outputs are deterministic for a fixed config: no timestamps, sorted JSON
keys, fixed-order reductions.  Running the same config twice produces
byte-identical files.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .backend import backend_name
from .changepoint import DetectorConfig, sequential_detect
from .cluster import (
    ClusterAssignment,
    Dendrogram,
    hierarchical_cluster,
    spectral_cluster,
)
from .errors import BreakdistError, DataError
from .io_utils import (
    dump_json,
    load_changepoint_sets,
    load_csv,
    log_returns,
    save_changepoint_sets,
    save_distance_matrix,
)
from .matrix import (
    DistanceMatrix,
    EigenReport,
    TransitivityReport,
    build_distance_matrix,
    eigen_report,
    transitivity_audit,
)
from .metrics import MetricSpec
from .sets import ChangePointSet

INPUT_FORMATS = ("series", "sets")
TRANSFORMS = ("none", "log_returns")

# fallback cluster count when the config leaves k unset: split into two
# groups, the weakest assumption that still produces a partition
DEFAULT_K = 2


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one run needs; hashable into the provenance record."""

    input: str
    out_dir: str
    input_format: str = "series"
    transform: str = "none"
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    metric: MetricSpec = field(default_factory=lambda: MetricSpec("mj", 1.0))
    k: Optional[int] = None
    epsilon: Optional[float] = None
    normalize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.input_format not in INPUT_FORMATS:
            raise DataError(f"input_format must be one of {INPUT_FORMATS}")
        if self.transform not in TRANSFORMS:
            raise DataError(f"transform must be one of {TRANSFORMS}")
        if self.k is not None and self.k < 1:
            raise DataError("k must be positive")
        if self.epsilon is not None and self.epsilon < 0:
            raise DataError("epsilon must be non-negative")

    def canonical_text(self) -> str:
        """Stable key=value rendering used for the provenance hash."""
        det = self.detector
        pairs = [
            ("input", self.input),
            ("input_format", self.input_format),
            ("transform", self.transform),
            ("metric", self.metric.label),
            ("k", "" if self.k is None else str(self.k)),
            ("epsilon", "" if self.epsilon is None else f"{self.epsilon:.12g}"),
            ("normalize", str(self.normalize).lower()),
            ("seed", str(self.seed)),
            ("detector.statistic", det.statistic),
            ("detector.alpha", "" if det.alpha is None else f"{det.alpha:.12g}"),
            ("detector.arl0", "" if det.arl0 is None else f"{det.arl0:.12g}"),
            ("detector.min_segment", str(det.min_segment)),
            ("detector.mc_replicates", str(det.mc_replicates)),
            ("detector.rng_seed", str(det.rng_seed)),
        ]
        return "".join(f"{k}={v}\n" for k, v in pairs)


@dataclass
class RunReport:
    """In-memory mirror of everything run_pipeline wrote to disk."""

    detections: list[dict]
    skipped: list[str]
    distance_matrix: DistanceMatrix
    transitivity: Optional[TransitivityReport]
    eigen: EigenReport
    clusters: ClusterAssignment
    dendrogram: Dendrogram
    provenance: dict
    out_dir: Path
    artifacts: list[str]


def _provenance(cfg: PipelineConfig) -> dict:
    digest = hashlib.sha256(cfg.canonical_text().encode("utf-8")).hexdigest()
    return {
        "config_sha256": digest,
        "seed": cfg.seed,
        "version": __version__,
        "backend": backend_name(),
    }


class _Stage:
    """Context manager that prefixes errors with the failing stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None:
            return False
        if isinstance(exc, BreakdistError):
            raise type(exc)(f"{self.name} stage failed: {exc}") from exc
        if isinstance(exc, OSError):
            raise DataError(f"{self.name} stage failed: {exc}") from exc
        return False


def _ingest(cfg: PipelineConfig):
    """Returns (sets, detections, skipped) regardless of input format."""
    if cfg.input_format == "sets":
        sets = load_changepoint_sets(cfg.input)
        detections = [
            {
                "label": s.label,
                "n_changes": len(s),
                "change_points": [int(p) for p in s.points],
                "status": "loaded",
            }
            for s in sets
        ]
        scales = [float(s.points[-1] + 1) for s in sets]
        return sets, detections, [], scales

    series = load_csv(cfg.input)
    if cfg.transform == "log_returns":
        series = [log_returns(s) for s in series]
    sets: list[ChangePointSet] = []
    detections = []
    skipped = []
    scales = []
    for s in series:
        res = sequential_detect(s, cfg.detector)
        entry = {
            "label": s.label,
            "n_changes": int(res.change_points.size),
            "change_points": res.change_points.tolist(),
            "statistics": res.statistics.tolist(),
            "thresholds": res.thresholds.tolist(),
            "status": res.status,
        }
        detections.append(entry)
        if res.change_points.size == 0:
            skipped.append(s.label)
            continue
        sets.append(ChangePointSet(res.change_points, label=s.label))
        scales.append(float(len(s)))
    return sets, detections, skipped, scales


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    """Execute every stage and write the artifact files.

    Any failure removes the files this run already wrote, then re-raises
    with the stage name prepended.
    """
    with _Stage("ingest"):
        sets, detections, skipped, scales = _ingest(cfg)
        if len(sets) < 2:
            raise DataError(
                f"only {len(sets)} series produced change points; "
                "need at least 2 for a distance matrix"
            )

    with _Stage("distances"):
        if cfg.normalize:
            points = [s.points.astype(np.float64) / scale for s, scale in zip(sets, scales)]
            labels = [s.label for s in sets]
            D = build_distance_matrix(points, cfg.metric, labels=labels)
        else:
            D = build_distance_matrix(sets, cfg.metric)

    with _Stage("transitivity"):
        # the audit itself rejects n < 3 (no triples exist); a two-series
        # run still produces every other artifact
        audit = transitivity_audit(D) if D.n >= 3 else None

    with _Stage("eigen"):
        eig = eigen_report(D, cfg.epsilon)

    with _Stage("cluster"):
        k = cfg.k if cfg.k is not None else DEFAULT_K
        if k > D.n:
            raise DataError(f"k={k} exceeds the {D.n} series available")
        assign = spectral_cluster(D, k, seed=cfg.seed)
        dendro = hierarchical_cluster(D)

    provenance = _provenance(cfg)
    out_dir = Path(cfg.out_dir)
    created_dir = not out_dir.exists()
    written: list[Path] = []
    try:
        with _Stage("write"):
            out_dir.mkdir(parents=True, exist_ok=True)
            artifacts = _write_artifacts(
                out_dir, written, cfg, sets, detections, skipped, D, audit, eig,
                assign, dendro, provenance,
            )
    except BaseException:
        for p in written:
            try:
                p.unlink()
            except OSError:
                pass
        if created_dir:
            try:
                out_dir.rmdir()
            except OSError:
                pass
        raise

    return RunReport(
        detections=detections,
        skipped=skipped,
        distance_matrix=D,
        transitivity=audit,
        eigen=eig,
        clusters=assign,
        dendrogram=dendro,
        provenance=provenance,
        out_dir=out_dir,
        artifacts=artifacts,
    )


def _write_artifacts(out_dir, written, cfg, sets, detections, skipped, D, audit,
                     eig, assign, dendro, provenance) -> list[str]:
    def target(name: str) -> Path:
        p = out_dir / name
        written.append(p)
        return p

    names = []

    name = "changepoints.csv"
    save_changepoint_sets(target(name), sets)
    names.append(name)

    name = f"distmat_{cfg.metric.label}.csv"
    save_distance_matrix(target(name), D)
    names.append(name)

    if audit is not None:
        audit_dict = audit.to_json_dict()
    else:
        audit_dict = {
            "n": D.n,
            "triples": 0,
            "counts": {"blue": 0, "yellow": 0, "red": 0},
            "fail_fraction": None,
            "mean_fail_ratio": None,
            "max_fail_ratio": None,
            "note": "audit needs at least 3 series",
        }
    name = "transitivity.json"
    target(name).write_text(dump_json(audit_dict), encoding="utf-8")
    names.append(name)

    name = "eigen.json"
    target(name).write_text(dump_json(eig.to_json_dict()), encoding="utf-8")
    names.append(name)

    name = "clusters.csv"
    lines = ["label,cluster"]
    lines += [f"{lab},{c}" for lab, c in zip(D.labels, assign.labels)]
    target(name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    names.append(name)

    name = "dendrogram.newick"
    target(name).write_text(dendro.newick() + "\n", encoding="utf-8")
    names.append(name)

    name = "dendrogram.json"
    target(name).write_text(dump_json(dendro.to_json_dict()), encoding="utf-8")
    names.append(name)

    report = {
        "provenance": provenance,
        "config": {
            line.split("=", 1)[0]: line.split("=", 1)[1]
            for line in cfg.canonical_text().splitlines()
        },
        "n_series": len(detections),
        "n_sets": len(sets),
        "skipped": skipped,
        "detection": detections,
        "metric": cfg.metric.label,
        "transitivity": audit_dict,
        "eigen": eig.to_json_dict(),
        "clusters": {lab: int(c) for lab, c in zip(D.labels, assign.labels)},
        "artifacts": sorted(names + ["report.json"]),
    }
    name = "report.json"
    target(name).write_text(dump_json(report), encoding="utf-8")
    names.append(name)
    return sorted(names)
