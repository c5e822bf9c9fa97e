"""Dense prior (anchor) generation over a multi-level feature pyramid.

Anchors are laid out at feature-cell centers, ``stride * (index + 0.5)``,
and are intentionally not clipped to the image so per-level counts stay
analytic: ``ceil(H/stride) * ceil(W/stride) * len(scales) * len(ratios)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LevelSpec",
    "PyramidSpec",
    "PriorSet",
    "generate_priors",
    "one_stage_spec",
    "two_stage_spec",
    "pyramid_spec_to_dict",
    "pyramid_spec_from_dict",
]


@dataclass(frozen=True)
class LevelSpec:
    """One pyramid level: cell stride, base anchor size, and shape grid."""

    stride: float
    base_size: float
    scales: tuple[float, ...]
    ratios: tuple[float, ...]

    def __post_init__(self):
        if self.stride <= 0 or self.base_size <= 0:
            raise ValueError("stride and base_size must be positive")
        if not self.scales or not self.ratios:
            raise ValueError("scales and ratios must be non-empty")
        if any(s <= 0 for s in self.scales) or any(r <= 0 for r in self.ratios):
            raise ValueError("scales and ratios must be positive")


@dataclass(frozen=True)
class PyramidSpec:
    """Image dimensions plus an ordered list of pyramid levels."""

    image_h: int
    image_w: int
    levels: tuple[LevelSpec, ...]

    def __post_init__(self):
        if self.image_h <= 0 or self.image_w <= 0:
            raise ValueError(
                f"image must be non-empty, got {self.image_h}x{self.image_w}"
            )
        if len(self.levels) < 1:
            raise ValueError("at least one pyramid level is required")
        strides = [lv.stride for lv in self.levels]
        if any(b <= a for a, b in zip(strides, strides[1:])):
            raise ValueError(f"strides must be strictly increasing, got {strides}")

    @property
    def anchors_per_location(self) -> tuple[int, ...]:
        return tuple(len(lv.scales) * len(lv.ratios) for lv in self.levels)


@dataclass(frozen=True)
class PriorSet:
    """Flat prior boxes in corner form plus the pyramid level of each box."""

    boxes: np.ndarray  # (n, 4) float64, xyxy
    level_index: np.ndarray  # (n,) int64

    def __len__(self) -> int:
        return self.boxes.shape[0]


def _anchor_shapes(level: LevelSpec) -> np.ndarray:
    """(w, h) per anchor kind, scale-major then ratio, w/h = ratio."""
    shapes = np.empty((len(level.scales) * len(level.ratios), 2), dtype=np.float64)
    k = 0
    for s in level.scales:
        side = level.base_size * s
        for r in level.ratios:
            root = math.sqrt(r)
            shapes[k, 0] = side * root
            shapes[k, 1] = side / root
            k += 1
    return shapes


def generate_priors(spec: PyramidSpec) -> PriorSet:
    """Tile every pyramid level with its anchor shapes.

    Ordering is deterministic: level-major, then row-major over cells
    (y outer, x inner), then scale-major/ratio-minor over anchor kinds.
    """
    per_level = []
    level_ids = []
    for li, level in enumerate(spec.levels):
        ny = math.ceil(spec.image_h / level.stride)
        nx = math.ceil(spec.image_w / level.stride)
        cy = level.stride * (np.arange(ny, dtype=np.float64) + 0.5)
        cx = level.stride * (np.arange(nx, dtype=np.float64) + 0.5)
        centers = np.empty((ny * nx, 2), dtype=np.float64)
        centers[:, 0] = np.repeat(cy, nx)  # y, row-major
        centers[:, 1] = np.tile(cx, ny)
        shapes = _anchor_shapes(level)
        half = shapes / 2.0
        boxes = np.empty((ny * nx, shapes.shape[0], 4), dtype=np.float64)
        boxes[..., 0] = centers[:, None, 1] - half[None, :, 0]
        boxes[..., 1] = centers[:, None, 0] - half[None, :, 1]
        boxes[..., 2] = centers[:, None, 1] + half[None, :, 0]
        boxes[..., 3] = centers[:, None, 0] + half[None, :, 1]
        boxes = boxes.reshape(-1, 4)
        per_level.append(boxes)
        level_ids.append(np.full(boxes.shape[0], li, dtype=np.int64))
    return PriorSet(np.concatenate(per_level), np.concatenate(level_ids))


def one_stage_spec(image_h: int, image_w: int) -> PyramidSpec:
    """Canonical dense one-stage pyramid: strides 8..128, 9 anchors per cell.

    Base size is 4x the stride with three sub-octave scales and three
    aspect ratios, mirroring the standard focal-loss detector layout.
    """
    scales = (1.0, 2.0 ** (1.0 / 3.0), 2.0 ** (2.0 / 3.0))
    ratios = (0.5, 1.0, 2.0)
    levels = tuple(
        LevelSpec(stride=float(s), base_size=4.0 * s, scales=scales, ratios=ratios)
        for s in (8, 16, 32, 64, 128)
    )
    return PyramidSpec(image_h=image_h, image_w=image_w, levels=levels)


def two_stage_spec(image_h: int, image_w: int) -> PyramidSpec:
    """Canonical region-proposal pyramid: strides 4..64, 3 anchors per cell.

    Single scale of 8x the stride with three aspect ratios, mirroring the
    standard two-stage RPN layout.
    """
    levels = tuple(
        LevelSpec(stride=float(s), base_size=float(s), scales=(8.0,), ratios=(0.5, 1.0, 2.0))
        for s in (4, 8, 16, 32, 64)
    )
    return PyramidSpec(image_h=image_h, image_w=image_w, levels=levels)


def pyramid_spec_to_dict(spec: PyramidSpec) -> dict:
    return {
        "image_h": spec.image_h,
        "image_w": spec.image_w,
        "levels": [
            {
                "stride": lv.stride,
                "base_size": lv.base_size,
                "scales": list(lv.scales),
                "ratios": list(lv.ratios),
            }
            for lv in spec.levels
        ],
    }


def pyramid_spec_from_dict(data: dict) -> PyramidSpec:
    try:
        levels = tuple(
            LevelSpec(
                stride=float(lv["stride"]),
                base_size=float(lv["base_size"]),
                scales=tuple(float(s) for s in lv["scales"]),
                ratios=tuple(float(r) for r in lv["ratios"]),
            )
            for lv in data["levels"]
        )
        return PyramidSpec(
            image_h=int(data["image_h"]), image_w=int(data["image_w"]), levels=levels
        )
    except KeyError as exc:
        raise ValueError(f"pyramid spec is missing key {exc}") from exc
