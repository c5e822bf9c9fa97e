"""COCO-format annotation ingestion and real-dataset assignment statistics.

Only the fields the statistics need are retained: image dimensions,
box annotations (converted from ``x, y, w, h`` to corner form), and
category names. Crowd annotations are excluded from ground-truth sets,
matching common evaluation practice; exclusions are logged.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .assign import DEFAULT_CHUNK
from .priors import generate_priors
from .sim import (
    PRIOR_SCHEMES,
    AssignerDef,
    SimReport,
    SizeBins,
    aggregate_stats,
    bin_positive_counts,
    gt_sizes,
)

__all__ = [
    "CocoFormatError",
    "CocoValidationError",
    "ImageInfo",
    "Annotation",
    "Category",
    "Dataset",
    "load_coco",
    "dataset_assignment_stats",
]

logger = logging.getLogger(__name__)


class CocoFormatError(ValueError):
    """The file is not parseable as a COCO annotation document."""


class CocoValidationError(ValueError):
    """The document parses but violates the annotation contract."""


@dataclass(frozen=True)
class ImageInfo:
    id: int
    width: int
    height: int
    file_name: str


@dataclass(frozen=True)
class Annotation:
    id: int
    image_id: int
    bbox: tuple[float, float, float, float]  # x, y, w, h
    category_id: int
    iscrowd: int = 0


@dataclass(frozen=True)
class Category:
    id: int
    name: str


@dataclass
class Dataset:
    images: list[ImageInfo] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)
    categories: list[Category] = field(default_factory=list)

    def boxes_for_image(self, image_id: int, include_crowd: bool = False) -> np.ndarray:
        """Corner-form boxes of one image, crowd annotations excluded."""
        rows = [
            (a.bbox[0], a.bbox[1], a.bbox[0] + a.bbox[2], a.bbox[1] + a.bbox[3])
            for a in self.annotations
            if a.image_id == image_id and (include_crowd or not a.iscrowd)
        ]
        return np.asarray(rows, dtype=np.float64).reshape(len(rows), 4)


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise CocoValidationError(f"{context} is missing required key {key!r}")
    return mapping[key]


def load_coco(path) -> Dataset:
    """Parse a COCO-style annotation file into a :class:`Dataset`.

    Raises :class:`CocoFormatError` for unparseable JSON (with the byte
    offset of the failure) and :class:`CocoValidationError` for structural
    problems: missing top-level keys, annotations referencing unknown
    images, or negative box extents.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CocoFormatError(
            f"{path}: invalid JSON at byte offset {exc.pos}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise CocoValidationError(f"{path}: top level must be a JSON object")
    for key in ("images", "annotations", "categories"):
        _require(doc, key, f"{path}")

    images = []
    for rec in doc["images"]:
        images.append(
            ImageInfo(
                id=int(_require(rec, "id", "image record")),
                width=int(_require(rec, "width", "image record")),
                height=int(_require(rec, "height", "image record")),
                file_name=str(rec.get("file_name", "")),
            )
        )
    image_ids = {im.id for im in images}

    annotations = []
    dangling = []
    bad_bbox = []
    n_crowd = 0
    for rec in doc["annotations"]:
        ann_id = int(_require(rec, "id", "annotation record"))
        image_id = int(_require(rec, "image_id", "annotation record"))
        bbox = _require(rec, "bbox", f"annotation {ann_id}")
        if len(bbox) != 4:
            raise CocoValidationError(
                f"annotation {ann_id}: bbox must have 4 entries, got {len(bbox)}"
            )
        x, y, w, h = (float(v) for v in bbox)
        if w < 0 or h < 0:
            bad_bbox.append(ann_id)
        if image_id not in image_ids:
            dangling.append(ann_id)
        iscrowd = int(rec.get("iscrowd", 0))
        n_crowd += 1 if iscrowd else 0
        annotations.append(
            Annotation(
                id=ann_id,
                image_id=image_id,
                bbox=(x, y, w, h),
                category_id=int(rec.get("category_id", 0)),
                iscrowd=iscrowd,
            )
        )
    if dangling:
        raise CocoValidationError(
            f"{path}: annotations reference missing images: ids {sorted(dangling)}"
        )
    if bad_bbox:
        raise CocoValidationError(
            f"{path}: annotations with negative extents: ids {sorted(bad_bbox)}"
        )
    if n_crowd:
        logger.info("excluding %d crowd annotations from ground-truth sets", n_crowd)

    categories = [
        Category(id=int(_require(rec, "id", "category record")),
                 name=str(rec.get("name", "")))
        for rec in doc["categories"]
    ]
    return Dataset(images=images, annotations=annotations, categories=categories)


def dataset_assignment_stats(ds: Dataset,
                             assigner: AssignerDef,
                             bins: SizeBins | None = None,
                             jobs: int = 1,
                             chunk: int = DEFAULT_CHUNK,
                             source: str = "") -> SimReport:
    """Per-bin positive statistics for one assigner over a real dataset.

    Priors are generated per image at its annotated resolution using the
    assigner's prior scheme. Images contribute independent integer counts,
    so statistics are additive over any partition of the dataset.
    """
    bins = bins or SizeBins()
    nbins = len(bins)
    if assigner.prior_scheme not in PRIOR_SCHEMES:
        raise ValueError(f"unknown prior scheme {assigner.prior_scheme!r}")
    spec_builder = PRIOR_SCHEMES[assigner.prior_scheme]
    prior_cache: dict[tuple[int, int], np.ndarray] = {}

    def priors_for(height: int, width: int) -> np.ndarray:
        key = (height, width)
        if key not in prior_cache:
            prior_cache[key] = generate_priors(spec_builder(height, width)).boxes
        return prior_cache[key]

    def one_image(image: ImageInfo) -> tuple[np.ndarray, np.ndarray]:
        gts = ds.boxes_for_image(image.id)
        if gts.shape[0] == 0:
            zeros = np.zeros(nbins, dtype=np.int64)
            return zeros, zeros
        gt_bins = bins.bin_of(gt_sizes(gts))
        gt_counts = np.bincount(gt_bins, minlength=nbins).astype(np.int64)
        result = assigner.assign(gts, priors_for(image.height, image.width), chunk)
        return gt_counts, bin_positive_counts(result, gt_bins, nbins)

    if jobs > 1:
        # Warm the cache serially: the worker closures share it.
        for image in ds.images:
            priors_for(image.height, image.width)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_image = list(pool.map(one_image, ds.images))
    else:
        per_image = [one_image(im) for im in ds.images]

    prior_count = sum(
        priors_for(im.height, im.width).shape[0] for im in ds.images
    ) if ds.images else 0
    stats = aggregate_stats(
        assigner,
        prior_count=prior_count,
        nbins=nbins,
        gt_counts_by_unit=[r[0] for r in per_image] or [np.zeros(nbins, dtype=np.int64)],
        positives_by_unit=[r[1] for r in per_image] or [np.zeros(nbins, dtype=np.int64)],
    )
    return SimReport(
        kind="dataset",
        unit="image",
        config={
            "source": source,
            "images": len(ds.images),
            "annotations": len(ds.annotations),
        },
        seeds=[],
        bin_edges=list(bins.edges),
        bin_labels=list(bins.labels),
        priors_clipped=False,
        assigners=[stats],
    )
