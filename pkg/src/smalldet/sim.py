"""Monte-Carlo label-assignment study: who gets positives, by object size?

Each trial scatters uniformly random ground-truth boxes over a synthetic
image, tiles the image with dense priors, runs one or more assigners, and
attributes every positive prior to the size bin of its assigned box. The
bins follow the small-object benchmark convention: extremely small (0-12
px), relatively small (12-20 px), generally small (20-32 px), and larger.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assign import (
    DEFAULT_CHUNK,
    TWO_STAGE_CONFIG,
    AssignConfig,
    AssignResult,
    MclaWeights,
    mcla_assign,
    one_stage_maxiou,
    two_stage_maxiou,
)
from .geometry import Box
from .priors import PriorSet, generate_priors, one_stage_spec, two_stage_spec

__all__ = [
    "SimConfig",
    "SizeBins",
    "AssignerDef",
    "AssignerStats",
    "SimReport",
    "PRIOR_SCHEMES",
    "SIM_ONE_STAGE_CONFIG",
    "SIM_TWO_STAGE_CONFIG",
    "SIM_MCLA_CONFIG",
    "default_assigners",
    "make_assigner",
    "sample_gts",
    "gt_size",
    "gt_sizes",
    "run_simulation",
    "report_to_json",
    "report_from_json",
    "report_to_csv",
]

PRIOR_SCHEMES: dict[str, Callable[[int, int], object]] = {
    "one_stage": one_stage_spec,
    "two_stage": two_stage_spec,
}

# Study configurations. The reference protocols count threshold positives
# only: with per-box rescue enabled, a tiny box fully contained in several
# equal-area anchors ties them all bit-exactly and every tie is "rescued",
# flooding the small bins with low-quality matches no detector trains on
# well. The multi-criteria strategy keeps the proposal-stage rescue (its
# whole point is granting small boxes their best match) with the positive
# threshold calibrated on the combined-score scale, whose distribution is
# compressed relative to raw overlap by the center-offset criterion.
SIM_ONE_STAGE_CONFIG = AssignConfig(pos_thr=0.5, neg_thr=0.4,
                                    match_low_quality=False)
SIM_TWO_STAGE_CONFIG = TWO_STAGE_CONFIG
SIM_MCLA_CONFIG = AssignConfig(pos_thr=0.545, neg_thr=0.3,
                               match_low_quality=True, min_pos_quality=0.3)


@dataclass(frozen=True)
class SimConfig:
    """Synthetic-study parameters; defaults give the desk-scale experiment.

    Sizes are geometric-mean extents drawn uniformly from ``size_range``,
    aspects uniformly from ``aspect_range``; boxes are shrunk (aspect kept)
    if a side would exceed ``max_dim``, and centers keep every box fully
    inside the image. Trial ``t`` uses random seed ``seed + t``.
    """

    image_h: int = 800
    image_w: int = 800
    n_gts: int = 2000
    max_dim: float = 64.0
    seed: int = 0
    trials: int = 5
    aspect_range: tuple[float, float] = (0.5, 2.0)
    size_range: tuple[float, float] = (2.0, 64.0)

    def __post_init__(self):
        if self.image_h < 1 or self.image_w < 1:
            raise ValueError("image dimensions must be positive")
        if self.n_gts < 1 or self.trials < 1:
            raise ValueError("n_gts and trials must be >= 1")
        if self.max_dim <= 0 or self.max_dim > min(self.image_h, self.image_w):
            raise ValueError(
                f"max_dim {self.max_dim} must fit inside the "
                f"{self.image_h}x{self.image_w} image"
            )
        lo, hi = self.size_range
        if not (0 < lo < hi):
            raise ValueError(f"size_range must satisfy 0 < lo < hi, got {self.size_range}")
        if hi > self.max_dim:
            raise ValueError(f"size_range upper bound {hi} exceeds max_dim {self.max_dim}")
        alo, ahi = self.aspect_range
        if not (0 < alo <= ahi):
            raise ValueError(f"aspect_range must satisfy 0 < lo <= hi, got {self.aspect_range}")

    def to_dict(self) -> dict:
        return {
            "image_h": self.image_h,
            "image_w": self.image_w,
            "n_gts": self.n_gts,
            "max_dim": self.max_dim,
            "seed": self.seed,
            "trials": self.trials,
            "aspect_range": list(self.aspect_range),
            "size_range": list(self.size_range),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        kwargs = dict(data)
        for key in ("aspect_range", "size_range"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class SizeBins:
    """Half-open size bins ``(edge_{k-1}, edge_k]`` keyed by benchmark labels."""

    edges: tuple[float, ...] = (12.0, 20.0, 32.0)
    labels: tuple[str, ...] = ("eS", "rS", "gS", "larger")

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError(f"bin edges must be strictly increasing, got {self.edges}")
        if len(self.labels) != len(self.edges) + 1:
            raise ValueError("need exactly one more label than edges")

    def __len__(self) -> int:
        return len(self.labels)

    def bin_of(self, sizes) -> np.ndarray:
        """Bin index per size; an edge value falls in the lower bin."""
        return np.searchsorted(self.edges, np.asarray(sizes, dtype=np.float64),
                               side="left")


@dataclass(frozen=True)
class AssignerDef:
    """A named assignment strategy bound to its prior scheme and config."""

    name: str
    prior_scheme: str
    config: AssignConfig
    weights: MclaWeights | None = None  # None -> plain best-overlap

    def assign(self, gts_xyxy: np.ndarray, priors_xyxy: np.ndarray,
               chunk: int = DEFAULT_CHUNK) -> AssignResult:
        if self.weights is None:
            if self.prior_scheme == "one_stage":
                return one_stage_maxiou(gts_xyxy, priors_xyxy, self.config, chunk)
            return two_stage_maxiou(gts_xyxy, priors_xyxy, self.config, chunk)
        return mcla_assign(gts_xyxy, priors_xyxy, self.weights, self.config, chunk)

    def config_dict(self) -> dict:
        out = {
            "pos_thr": self.config.pos_thr,
            "neg_thr": self.config.neg_thr,
            "match_low_quality": self.config.match_low_quality,
            "min_pos_quality": self.config.min_pos_quality,
        }
        if self.weights is not None:
            out["weights"] = {
                "lambda_iou": self.weights.lambda_iou,
                "lambda_poc": self.weights.lambda_poc,
                "lambda_scc": self.weights.lambda_scc,
                "c_poc": self.weights.c_poc,
                "c_scc": self.weights.c_scc,
            }
        return out


def make_assigner(name: str, weights: MclaWeights | None = None,
                  config: AssignConfig | None = None) -> AssignerDef:
    """Build one of the three named study strategies, with optional overrides."""
    if name == "one_stage_maxiou":
        return AssignerDef(name, "one_stage", config or SIM_ONE_STAGE_CONFIG)
    if name == "two_stage_maxiou":
        return AssignerDef(name, "two_stage", config or SIM_TWO_STAGE_CONFIG)
    if name == "mcla":
        return AssignerDef(name, "two_stage", config or SIM_MCLA_CONFIG,
                           weights or MclaWeights())
    raise ValueError(
        f"unknown assigner {name!r}; expected one_stage_maxiou, "
        "two_stage_maxiou or mcla"
    )


def default_assigners() -> tuple[AssignerDef, ...]:
    """The three strategies compared by the study, with canonical configs."""
    return (
        make_assigner("one_stage_maxiou"),
        make_assigner("two_stage_maxiou"),
        make_assigner("mcla"),
    )


def sample_gts(cfg: SimConfig, seed: int) -> np.ndarray:
    """Draw ``cfg.n_gts`` random boxes as an ``(n, 4)`` corner array.

    Deterministic per seed: equal seeds give bit-identical boxes.
    """
    rng = np.random.default_rng(seed)
    size = rng.uniform(cfg.size_range[0], cfg.size_range[1], cfg.n_gts)
    aspect = rng.uniform(cfg.aspect_range[0], cfg.aspect_range[1], cfg.n_gts)
    root = np.sqrt(aspect)
    w = size * root
    h = size / root
    shrink = np.minimum(1.0, cfg.max_dim / np.maximum(w, h))
    w = w * shrink
    h = h * shrink
    cx = rng.uniform(w / 2.0, cfg.image_w - w / 2.0)
    cy = rng.uniform(h / 2.0, cfg.image_h - h / 2.0)
    return np.stack([cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0], axis=1)


def gt_size(box) -> float:
    """Single-number size of a box: the geometric mean of its extents."""
    if isinstance(box, Box):
        w, h = box.width, box.height
    else:
        x1, y1, x2, y2 = (float(v) for v in box)
        w, h = x2 - x1, y2 - y1
    return float(np.sqrt(w * h))


def gt_sizes(xyxy: np.ndarray) -> np.ndarray:
    """Vectorized :func:`gt_size` over an ``(n, 4)`` corner array."""
    arr = np.asarray(xyxy, dtype=np.float64)
    return np.sqrt((arr[:, 2] - arr[:, 0]) * (arr[:, 3] - arr[:, 1]))


@dataclass
class AssignerStats:
    """Aggregated per-bin outcome for one assigner."""

    name: str
    prior_scheme: str
    prior_count: int
    config: dict
    gt_count_per_bin: list[int]
    positives_per_bin: list[int]
    total_positives: int
    share_pct_per_bin: list[float]
    mean_positives_per_gt_per_bin: list[float]
    positives_per_bin_by_unit: list[list[int]]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "prior_scheme": self.prior_scheme,
            "prior_count": self.prior_count,
            "config": self.config,
            "gt_count_per_bin": self.gt_count_per_bin,
            "positives_per_bin": self.positives_per_bin,
            "total_positives": self.total_positives,
            "share_pct_per_bin": self.share_pct_per_bin,
            "mean_positives_per_gt_per_bin": self.mean_positives_per_gt_per_bin,
            "positives_per_bin_by_unit": self.positives_per_bin_by_unit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssignerStats":
        return cls(**data)


@dataclass
class SimReport:
    """Full study outcome plus the metadata needed to reproduce it."""

    kind: str  # "simulation" or "dataset"
    unit: str  # what one entry of positives_per_bin_by_unit covers
    config: dict
    seeds: list[int]
    bin_edges: list[float]
    bin_labels: list[str]
    priors_clipped: bool
    assigners: list[AssignerStats] = field(default_factory=list)

    def assigner(self, name: str) -> AssignerStats:
        for stats in self.assigners:
            if stats.name == name:
                return stats
        raise KeyError(f"no assigner named {name!r} in report")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "unit": self.unit,
            "config": self.config,
            "seeds": self.seeds,
            "bin_edges": self.bin_edges,
            "bin_labels": self.bin_labels,
            "priors_clipped": self.priors_clipped,
            "assigners": [a.to_dict() for a in self.assigners],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimReport":
        kwargs = dict(data)
        kwargs["assigners"] = [AssignerStats.from_dict(a) for a in data["assigners"]]
        return cls(**kwargs)


def aggregate_stats(adef: AssignerDef, prior_count: int, nbins: int,
                    gt_counts_by_unit: Sequence[np.ndarray],
                    positives_by_unit: Sequence[np.ndarray]) -> AssignerStats:
    """Fold per-unit integer counts into totals, shares, and per-gt means."""
    gt_total = np.sum(gt_counts_by_unit, axis=0, dtype=np.int64)
    pos_total = np.sum(positives_by_unit, axis=0, dtype=np.int64)
    total = int(pos_total.sum())
    shares = [
        (100.0 * int(p) / total) if total > 0 else 0.0 for p in pos_total
    ]
    means = [
        (int(p) / int(g)) if g > 0 else 0.0 for p, g in zip(pos_total, gt_total)
    ]
    return AssignerStats(
        name=adef.name,
        prior_scheme=adef.prior_scheme,
        prior_count=prior_count,
        config=adef.config_dict(),
        gt_count_per_bin=[int(g) for g in gt_total],
        positives_per_bin=[int(p) for p in pos_total],
        total_positives=total,
        share_pct_per_bin=shares,
        mean_positives_per_gt_per_bin=means,
        positives_per_bin_by_unit=[[int(p) for p in u] for u in positives_by_unit],
    )


def bin_positive_counts(result: AssignResult, gt_bins: np.ndarray,
                        nbins: int) -> np.ndarray:
    """Count positives per size bin of their assigned ground truth."""
    pos_labels = result.labels[result.labels >= 0]
    return np.bincount(gt_bins[pos_labels], minlength=nbins).astype(np.int64)


def run_simulation(cfg: SimConfig,
                   assigners: Sequence[AssignerDef] | None = None,
                   bins: SizeBins | None = None,
                   jobs: int = 1,
                   chunk: int = DEFAULT_CHUNK) -> SimReport:
    """Run every trial for every assigner and aggregate per-bin statistics.

    Trials are independent; ``jobs`` caps the worker threads used to run
    them. Counts are integers summed in seed order, so the report is
    byte-identical for any ``jobs`` value.
    """
    assigners = tuple(assigners) if assigners is not None else default_assigners()
    bins = bins or SizeBins()
    nbins = len(bins)
    priors: dict[str, PriorSet] = {}
    for adef in assigners:
        if adef.prior_scheme not in PRIOR_SCHEMES:
            raise ValueError(f"unknown prior scheme {adef.prior_scheme!r}")
        if adef.prior_scheme not in priors:
            spec = PRIOR_SCHEMES[adef.prior_scheme](cfg.image_h, cfg.image_w)
            priors[adef.prior_scheme] = generate_priors(spec)
    seeds = [cfg.seed + t for t in range(cfg.trials)]

    def one_trial(seed: int) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        gts = sample_gts(cfg, seed)
        gt_bins = bins.bin_of(gt_sizes(gts))
        gt_counts = np.bincount(gt_bins, minlength=nbins).astype(np.int64)
        per_assigner = {}
        for adef in assigners:
            result = adef.assign(gts, priors[adef.prior_scheme].boxes, chunk)
            per_assigner[adef.name] = bin_positive_counts(result, gt_bins, nbins)
        return gt_counts, per_assigner

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trial_results = list(pool.map(one_trial, seeds))
    else:
        trial_results = [one_trial(s) for s in seeds]

    stats = []
    for adef in assigners:
        stats.append(
            aggregate_stats(
                adef,
                prior_count=len(priors[adef.prior_scheme]),
                nbins=nbins,
                gt_counts_by_unit=[r[0] for r in trial_results],
                positives_by_unit=[r[1][adef.name] for r in trial_results],
            )
        )
    return SimReport(
        kind="simulation",
        unit="trial",
        config=cfg.to_dict(),
        seeds=seeds,
        bin_edges=list(bins.edges),
        bin_labels=list(bins.labels),
        priors_clipped=False,
        assigners=stats,
    )


def report_to_json(report: SimReport) -> str:
    """Serialize losslessly with stable field order (byte-reproducible)."""
    return json.dumps(report.to_dict(), indent=2) + "\n"


def report_from_json(text: str) -> SimReport:
    return SimReport.from_dict(json.loads(text))


def report_to_csv(report: SimReport) -> str:
    """One row per (assigner, bin); floats via repr for exact round-trips."""
    lines = ["assigner,bin,gt_count,positives,share_pct,mean_positives_per_gt"]
    for stats in report.assigners:
        for k, label in enumerate(report.bin_labels):
            lines.append(
                ",".join(
                    [
                        stats.name,
                        label,
                        str(stats.gt_count_per_bin[k]),
                        str(stats.positives_per_bin[k]),
                        repr(stats.share_pct_per_bin[k]),
                        repr(stats.mean_positives_per_gt_per_bin[k]),
                    ]
                )
            )
    return "\n".join(lines) + "\n"
