"""Axis-aligned box geometry: IoU, center/size conversion, analytic IoU curves.

Boxes live in continuous pixel coordinates as ``(x1, y1, x2, y2)`` corners.
Degenerate (zero-area) boxes are legal inputs everywhere and score an IoU of
0 against anything, so samplers and assigners never have to special-case them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Box",
    "CenterSize",
    "as_xyxy",
    "xyxy_to_cxcywh",
    "cxcywh_to_xyxy",
    "iou",
    "iou_matrix",
    "iou_under_shift",
    "iou_contained",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in corner form, ``x2 >= x1`` and ``y2 >= y1``."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"box coordinates must be finite, got {coords}")
        if self.x2 < self.x1 or self.y2 < self.y1:
            raise ValueError(f"box corners out of order: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def to_center_size(self) -> "CenterSize":
        return CenterSize(
            (self.x1 + self.x2) / 2.0,
            (self.y1 + self.y2) / 2.0,
            self.x2 - self.x1,
            self.y2 - self.y1,
        )


@dataclass(frozen=True)
class CenterSize:
    """Center/extent form of a box: ``(cx, cy, w, h)`` with ``w, h >= 0``."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"center/size values must be finite, got {vals}")
        if self.w < 0 or self.h < 0:
            raise ValueError(f"negative extent: {vals}")

    def to_box(self) -> Box:
        return Box(
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )


def as_xyxy(boxes) -> np.ndarray:
    """Normalize a box collection to an ``(n, 4)`` float64 corner array.

    Accepts an ``(n, 4)`` array-like of corners or any iterable of
    :class:`Box`. Validates finiteness and corner ordering.
    """
    if isinstance(boxes, np.ndarray) or (
        isinstance(boxes, Sequence) and not any(isinstance(b, Box) for b in boxes)
    ):
        arr = np.asarray(boxes, dtype=np.float64)
        if arr.size == 0:
            return arr.reshape(0, 4)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(f"expected an (n, 4) box array, got shape {arr.shape}")
    elif isinstance(boxes, Iterable):
        rows = [
            (b.x1, b.y1, b.x2, b.y2) if isinstance(b, Box) else tuple(b)
            for b in boxes
        ]
        arr = np.asarray(rows, dtype=np.float64).reshape(len(rows), 4)
    else:
        raise TypeError(f"cannot interpret {type(boxes).__name__} as boxes")
    if not np.isfinite(arr).all():
        raise ValueError("box coordinates must be finite")
    if (arr[:, 2] < arr[:, 0]).any() or (arr[:, 3] < arr[:, 1]).any():
        raise ValueError("box corners out of order (x2 < x1 or y2 < y1)")
    return arr.astype(np.float64, copy=True)


def xyxy_to_cxcywh(xyxy: np.ndarray) -> np.ndarray:
    """Corner array -> ``(cx, cy, w, h)`` array, column order fixed."""
    xyxy = np.asarray(xyxy, dtype=np.float64)
    out = np.empty_like(xyxy)
    out[..., 0] = (xyxy[..., 0] + xyxy[..., 2]) / 2.0
    out[..., 1] = (xyxy[..., 1] + xyxy[..., 3]) / 2.0
    out[..., 2] = xyxy[..., 2] - xyxy[..., 0]
    out[..., 3] = xyxy[..., 3] - xyxy[..., 1]
    return out


def cxcywh_to_xyxy(cs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`xyxy_to_cxcywh`."""
    cs = np.asarray(cs, dtype=np.float64)
    out = np.empty_like(cs)
    out[..., 0] = cs[..., 0] - cs[..., 2] / 2.0
    out[..., 1] = cs[..., 1] - cs[..., 3] / 2.0
    out[..., 2] = cs[..., 0] + cs[..., 2] / 2.0
    out[..., 3] = cs[..., 1] + cs[..., 3] / 2.0
    return out


def _corners(box) -> tuple[float, float, float, float]:
    if isinstance(box, Box):
        return box.x1, box.y1, box.x2, box.y2
    x1, y1, x2, y2 = (float(v) for v in box)
    if not all(math.isfinite(v) for v in (x1, y1, x2, y2)):
        raise ValueError(f"box coordinates must be finite, got {(x1, y1, x2, y2)}")
    if x2 < x1 or y2 < y1:
        raise ValueError(f"box corners out of order: {(x1, y1, x2, y2)}")
    return x1, y1, x2, y2


def iou(a, b) -> float:
    """Intersection over union of two boxes, in [0, 1].

    Returns 0 when the boxes are disjoint, and also when both the
    intersection and the union vanish (degenerate boxes).
    """
    ax1, ay1, ax2, ay2 = _corners(a)
    bx1, by1, bx2, by2 = _corners(b)
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    inter = max(iw, 0.0) * max(ih, 0.0)
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def iou_matrix(gts, proposals) -> np.ndarray:
    """Pairwise IoU between two box sets as an ``(m, n)`` matrix.

    Entry ``(i, j)`` is ``iou(gts[i], proposals[j])``. Empty inputs yield a
    shape-correct empty matrix, which downstream assigners read as
    "all proposals negative".
    """
    g = as_xyxy(gts)
    p = as_xyxy(proposals)
    return _iou_block(g, p)


def _iou_block(g: np.ndarray, p: np.ndarray) -> np.ndarray:
    # Arithmetic mirrors scalar iou() exactly so entries match it bit-for-bit.
    if g.shape[0] == 0 or p.shape[0] == 0:
        return np.zeros((g.shape[0], p.shape[0]), dtype=np.float64)
    lt = np.maximum(g[:, None, :2], p[None, :, :2])
    rb = np.minimum(g[:, None, 2:], p[None, :, 2:])
    wh = rb - lt
    np.clip(wh, 0.0, None, out=wh)
    inter = wh[..., 0] * wh[..., 1]
    area_g = (g[:, 2] - g[:, 0]) * (g[:, 3] - g[:, 1])
    area_p = (p[:, 2] - p[:, 0]) * (p[:, 3] - p[:, 1])
    union = area_g[:, None] + area_p[None, :] - inter
    out = np.divide(inter, union, out=np.zeros_like(inter), where=union > 0.0)
    return out


def iou_under_shift(n: float, d: float) -> float:
    """IoU of two n-by-n squares offset by d along one axis.

    Built from actual boxes rather than the closed form ``(n - d)/(n + d)``,
    so the closed form can serve as an independent check. Falls to 0 once
    ``d > n``. Illustrates how the same absolute offset costs small boxes
    far more overlap than large ones.
    """
    if n <= 0:
        raise ValueError(f"square side must be positive, got {n}")
    if d < 0:
        raise ValueError(f"shift must be non-negative, got {d}")
    return iou(Box(0.0, 0.0, n, n), Box(d, 0.0, n + d, n))


def iou_contained(n_p: float, n_g: float) -> float:
    """IoU of an n_p square centered inside an n_g square, ``n_p <= n_g``.

    Equals the area ratio ``n_p**2 / n_g**2`` analytically; computed via box
    construction so the ratio is an independent check. Shows that a proposal
    fully inside a box still cannot reach a competitive IoU when much smaller.
    """
    if n_p <= 0:
        raise ValueError(f"inner side must be positive, got {n_p}")
    if n_p > n_g:
        raise ValueError(f"inner side {n_p} exceeds outer side {n_g}")
    off = (n_g - n_p) / 2.0
    return iou(Box(0.0, 0.0, n_g, n_g), Box(off, off, off + n_p, off + n_p))
