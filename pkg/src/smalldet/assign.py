"""Label assigners: best-overlap thresholding and multi-criteria scoring.

Plain IoU thresholding (the MaxIoU protocol) judges a proposal by overlap
alone, which collapses for small ground-truth boxes: tiny center offsets or
contained-but-smaller proposals crater the score. The multi-criteria (MCLA)
score blends three unit-interval criteria instead:

* overlap       -- pairwise IoU,
* center offset -- ``1 / (1 + sqrt(c_poc * E1_norm))`` where ``E1`` is the
  center distance matrix, min-max normalized over the whole matrix,
* shape match   -- ``1 / (1 + sqrt(c_scc * E2))`` where ``E2`` is the squared
  width/height difference,

combined as a normalized weighted sum ``sum(lambda_i * S_i) / sum(lambda_i)``.

Labels are encoded per proposal as ``-1`` (negative), ``-2`` (ignored) or a
ground-truth row index (positive).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .geometry import as_xyxy, xyxy_to_cxcywh

__all__ = [
    "NEGATIVE",
    "IGNORED",
    "MclaWeights",
    "AssignConfig",
    "AssignResult",
    "ONE_STAGE_CONFIG",
    "TWO_STAGE_CONFIG",
    "center_mse_matrix",
    "shape_mse_matrix",
    "minmax_normalize",
    "mcla_scores",
    "criterion_matrix",
    "assign_max_quality",
    "one_stage_maxiou",
    "two_stage_maxiou",
    "mcla_assign",
    "scores_to_csv",
]

NEGATIVE = -1
IGNORED = -2

# Column-chunk width for the streaming assigners: 2000 rows x 512 columns
# of float64 keeps every working block cache-resident.
DEFAULT_CHUNK = 512


@dataclass(frozen=True)
class MclaWeights:
    """Criterion weights and the two non-linear mapping factors.

    The combined score is invariant to a common positive rescaling of the
    lambdas, and the mapping factors mostly trade off against the lambdas,
    so only the ratios matter in practice.
    """

    lambda_iou: float = 1.0
    lambda_poc: float = 3.0
    lambda_scc: float = 1.0
    c_poc: float = 20.0
    c_scc: float = 0.25

    def __post_init__(self):
        lams = (self.lambda_iou, self.lambda_poc, self.lambda_scc)
        if any(l < 0 for l in lams):
            raise ValueError(f"criterion weights must be non-negative, got {lams}")
        if sum(lams) <= 0:
            raise ValueError("at least one criterion weight must be positive")
        if self.c_poc <= 0 or self.c_scc <= 0:
            raise ValueError("mapping factors must be positive")


@dataclass(frozen=True)
class AssignConfig:
    """Thresholding protocol shared by every assigner here.

    A proposal whose best score falls below ``neg_thr`` is negative, between
    the thresholds it is ignored, at or above ``pos_thr`` it is positive to
    its best row. With ``match_low_quality`` each ground truth additionally
    claims the proposal(s) attaining its row maximum, provided that maximum
    reaches ``min_pos_quality``; rows are swept in ascending order, so when
    several rows claim the same proposal the highest row index keeps it.
    """

    pos_thr: float
    neg_thr: float
    match_low_quality: bool = True
    min_pos_quality: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.neg_thr <= self.pos_thr <= 1.0):
            raise ValueError(
                f"need 0 <= neg_thr <= pos_thr <= 1, got "
                f"neg={self.neg_thr}, pos={self.pos_thr}"
            )
        if not (0.0 <= self.min_pos_quality <= 1.0):
            raise ValueError(f"min_pos_quality must be in [0, 1], got {self.min_pos_quality}")


# Canonical configurations of the two reference protocols. The one-stage
# thresholds follow the dense focal-loss detector (0.5/0.4 with per-box
# rescue); the two-stage thresholds follow the detection-head convention,
# where anything under 0.5 is a plain negative and no rescue applies.
ONE_STAGE_CONFIG = AssignConfig(pos_thr=0.5, neg_thr=0.4, match_low_quality=True,
                                min_pos_quality=0.0)
TWO_STAGE_CONFIG = AssignConfig(pos_thr=0.5, neg_thr=0.5, match_low_quality=False,
                                min_pos_quality=0.5)


@dataclass(frozen=True)
class AssignResult:
    """Per-proposal labels plus each proposal's best score."""

    labels: np.ndarray  # (n,) int64: -1 negative, -2 ignored, >=0 gt index
    max_quality: np.ndarray  # (n,) float64

    @property
    def num_positives(self) -> int:
        return int((self.labels >= 0).sum())


def center_mse_matrix(gts_cs, proposals_cs) -> np.ndarray:
    """Pairwise Euclidean distance between box centers, in pixels.

    Both arguments are center/size matrices with ``(cx, cy, w, h)`` rows
    (see :func:`smalldet.geometry.xyxy_to_cxcywh`).
    """
    return _center_dist_block(_as_cs_matrix(gts_cs), _as_cs_matrix(proposals_cs))


def shape_mse_matrix(gts_cs, proposals_cs) -> np.ndarray:
    """Pairwise squared width/height mismatch ``(wg-wp)**2 + (hg-hp)**2``.

    Unlike the center criterion this is the *squared* norm, and it is
    translation invariant by construction. Inputs are center/size matrices.
    """
    return _shape_sqdiff_block(_as_cs_matrix(gts_cs), _as_cs_matrix(proposals_cs))


def minmax_normalize(e: np.ndarray) -> np.ndarray:
    """Map a matrix onto [0, 1] via ``(x - min) / (max - min)``.

    A constant matrix maps to all zeros so that a lone pair is not
    penalized by its own normalization.
    """
    e = np.asarray(e, dtype=np.float64)
    if e.size == 0:
        return e.copy()
    if not np.isfinite(e).all():
        raise ValueError("cannot normalize a matrix with non-finite entries")
    lo = e.min()
    span = e.max() - lo
    if span == 0.0:
        return np.zeros_like(e)
    return (e - lo) / span


def mcla_scores(gts, proposals, weights: MclaWeights | None = None) -> np.ndarray:
    """Combined multi-criteria score matrix, shape ``(m, n)``, entries in [0, 1].

    Materializes the full matrix; for very large proposal sets prefer
    :func:`mcla_assign`, which streams over proposal chunks.
    """
    weights = weights or MclaWeights()
    g_xyxy = as_xyxy(gts)
    p_xyxy = as_xyxy(proposals)
    if g_xyxy.shape[0] == 0 or p_xyxy.shape[0] == 0:
        return np.zeros((g_xyxy.shape[0], p_xyxy.shape[0]), dtype=np.float64)
    g_cs = xyxy_to_cxcywh(g_xyxy)
    p_cs = xyxy_to_cxcywh(p_xyxy)
    e1 = _center_dist_block(g_cs, p_cs)
    lo = e1.min()
    span = e1.max() - lo
    return _combined_block(g_xyxy, g_cs, p_xyxy, p_cs, lo, span, weights)


def criterion_matrix(gts, proposals, criterion: str,
                     weights: MclaWeights | None = None) -> np.ndarray:
    """Score matrix for a single criterion or the combined score.

    ``criterion`` is one of ``iou`` (overlap), ``poc`` (center offset),
    ``scc`` (shape match) or ``mcla`` (weighted combination).
    """
    from .geometry import _iou_block

    weights = weights or MclaWeights()
    g_xyxy = as_xyxy(gts)
    p_xyxy = as_xyxy(proposals)
    if criterion == "mcla":
        return mcla_scores(g_xyxy, p_xyxy, weights)
    if g_xyxy.shape[0] == 0 or p_xyxy.shape[0] == 0:
        return np.zeros((g_xyxy.shape[0], p_xyxy.shape[0]), dtype=np.float64)
    if criterion == "iou":
        return _iou_block(g_xyxy, p_xyxy)
    g_cs = xyxy_to_cxcywh(g_xyxy)
    p_cs = xyxy_to_cxcywh(p_xyxy)
    if criterion == "poc":
        e1n = minmax_normalize(_center_dist_block(g_cs, p_cs))
        return _poc_block(e1n, weights.c_poc)
    if criterion == "scc":
        return _scc_block(_shape_sqdiff_block(g_cs, p_cs), weights.c_scc)
    raise ValueError(f"unknown criterion {criterion!r}; expected iou/poc/scc/mcla")


def assign_max_quality(scores: np.ndarray, cfg: AssignConfig) -> AssignResult:
    """Apply the thresholding protocol to a dense score matrix.

    Ties at a proposal's best row break toward the lowest row index. The
    low-quality rescue marks every proposal attaining a row's maximum, in
    ascending row order (later rows override earlier claims).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"expected a 2-D score matrix, got shape {scores.shape}")
    m, n = scores.shape
    if m == 0 or n == 0:
        return AssignResult(
            labels=np.full(n, NEGATIVE, dtype=np.int64),
            max_quality=np.zeros(n, dtype=np.float64),
        )
    q = scores.max(axis=0)
    best = scores.argmax(axis=0)
    labels = np.where(q < cfg.neg_thr, NEGATIVE, IGNORED).astype(np.int64)
    pos = q >= cfg.pos_thr
    labels[pos] = best[pos]
    if cfg.match_low_quality:
        row_max = scores.max(axis=1)
        _apply_rescue(labels, scores, row_max, cfg.min_pos_quality, col_offset=0)
    return AssignResult(labels=labels, max_quality=q)


def _apply_rescue(labels, score_block, row_max, min_pos_quality, col_offset):
    """Rescue pass over one block of columns; mutates ``labels`` in place."""
    m = score_block.shape[0]
    eligible = row_max >= min_pos_quality
    if not eligible.any():
        return
    tie = (score_block == row_max[:, None]) & eligible[:, None]
    hit = tie.any(axis=0)
    if not hit.any():
        return
    # Highest row index wins, matching an ascending sweep with overrides.
    winner = (m - 1) - np.argmax(tie[::-1, :], axis=0)
    cols = np.nonzero(hit)[0]
    labels[col_offset + cols] = winner[cols]


def one_stage_maxiou(gts, proposals, cfg: AssignConfig = ONE_STAGE_CONFIG,
                     chunk: int = DEFAULT_CHUNK) -> AssignResult:
    """Best-overlap assignment with the canonical one-stage thresholds."""
    return _maxiou_assign_streamed(as_xyxy(gts), as_xyxy(proposals), cfg, chunk)


def two_stage_maxiou(gts, proposals, cfg: AssignConfig = TWO_STAGE_CONFIG,
                     chunk: int = DEFAULT_CHUNK) -> AssignResult:
    """Best-overlap assignment with the canonical two-stage thresholds."""
    return _maxiou_assign_streamed(as_xyxy(gts), as_xyxy(proposals), cfg, chunk)


def mcla_assign(gts, proposals, weights: MclaWeights | None = None,
                cfg: AssignConfig = TWO_STAGE_CONFIG,
                chunk: int = DEFAULT_CHUNK) -> AssignResult:
    """Multi-criteria scores followed by the thresholding protocol.

    Thresholds apply to the combined score, including the low-quality
    rescue. With weights ``(1, 0, 0)`` the labels coincide exactly with
    best-overlap assignment under the same config.
    """
    weights = weights or MclaWeights()
    g_xyxy = as_xyxy(gts)
    p_xyxy = as_xyxy(proposals)
    if g_xyxy.shape[0] == 0 or p_xyxy.shape[0] == 0:
        return assign_max_quality(
            np.zeros((g_xyxy.shape[0], p_xyxy.shape[0])), cfg
        )
    g_cs = xyxy_to_cxcywh(g_xyxy)
    p_cs = xyxy_to_cxcywh(p_xyxy)
    scorer = _MclaScorer(g_xyxy, g_cs, p_xyxy, p_cs, weights,
                         min(chunk, max(1, p_xyxy.shape[0])))
    return _assign_streamed(scorer, g_xyxy.shape[0], p_xyxy.shape[0], cfg, chunk)


# ---------------------------------------------------------------------------
# Block kernels. The streamed path reuses preallocated buffers but performs
# the same operations in the same order as the full-matrix path, so outputs
# are bit-identical regardless of chunking.

def _as_cs_matrix(cs) -> np.ndarray:
    arr = np.asarray(cs, dtype=np.float64)
    if arr.size == 0:
        return arr.reshape(0, 4)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"expected an (n, 4) center/size matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("center/size entries must be finite")
    if (arr[:, 2:] < 0).any():
        raise ValueError("box extents must be non-negative")
    return arr


def _center_dist_block(g_cs: np.ndarray, p_cs: np.ndarray) -> np.ndarray:
    dx = g_cs[:, None, 0] - p_cs[None, :, 0]
    dy = g_cs[:, None, 1] - p_cs[None, :, 1]
    return np.sqrt(dx * dx + dy * dy)


def _shape_sqdiff_block(g_cs: np.ndarray, p_cs: np.ndarray) -> np.ndarray:
    dw = g_cs[:, None, 2] - p_cs[None, :, 2]
    dh = g_cs[:, None, 3] - p_cs[None, :, 3]
    return dw * dw + dh * dh


def _poc_block(e1n: np.ndarray, c_poc: float) -> np.ndarray:
    return 1.0 / (1.0 + np.sqrt(c_poc * e1n))


def _scc_block(e2: np.ndarray, c_scc: float) -> np.ndarray:
    return 1.0 / (1.0 + np.sqrt(c_scc * e2))


def _combined_block(g_xyxy, g_cs, p_xyxy, p_cs, e1_lo, e1_span,
                    weights: MclaWeights) -> np.ndarray:
    from .geometry import _iou_block

    e1 = _center_dist_block(g_cs, p_cs)
    if e1_span == 0.0:
        e1n = np.zeros_like(e1)
    else:
        e1n = (e1 - e1_lo) / e1_span
    s_iou = _iou_block(g_xyxy, p_xyxy)
    s_poc = _poc_block(e1n, weights.c_poc)
    s_scc = _scc_block(_shape_sqdiff_block(g_cs, p_cs), weights.c_scc)
    total = weights.lambda_iou + weights.lambda_poc + weights.lambda_scc
    return (
        weights.lambda_iou * s_iou
        + weights.lambda_poc * s_poc
        + weights.lambda_scc * s_scc
    ) / total


class _IouScorer:
    """Streaming IoU scorer with reusable block buffers.

    Operation order mirrors :func:`smalldet.geometry._iou_block` exactly,
    so a streamed block equals the corresponding full-matrix slice bit
    for bit.
    """

    def __init__(self, g_xyxy: np.ndarray, p_xyxy: np.ndarray, chunk: int):
        self.g = g_xyxy
        self.p = p_xyxy
        m = g_xyxy.shape[0]
        self.area_g = (g_xyxy[:, 2] - g_xyxy[:, 0]) * (g_xyxy[:, 3] - g_xyxy[:, 1])
        self.area_p = (p_xyxy[:, 2] - p_xyxy[:, 0]) * (p_xyxy[:, 3] - p_xyxy[:, 1])
        self._bufs = [np.empty((m, chunk)) for _ in range(3)]
        self._mask = np.empty((m, chunk), dtype=bool)

    def score_into(self, j0: int, j1: int, rows: np.ndarray | None = None):
        if rows is None:
            g, area_g = self.g, self.area_g
            o, t, u = (b[:, : j1 - j0] for b in self._bufs)
            w = self._mask[:, : j1 - j0]
        else:
            g, area_g = self.g[rows], self.area_g[rows]
            o, t, u = (np.empty((len(rows), j1 - j0)) for _ in range(3))
            w = np.empty((len(rows), j1 - j0), dtype=bool)
        p = self.p[j0:j1]
        gc = lambda k: g[:, k][:, None]
        pc = lambda k: p[:, k][None, :]
        np.minimum(gc(2), pc(2), out=o)
        np.maximum(gc(0), pc(0), out=t)
        np.subtract(o, t, out=o)
        np.clip(o, 0.0, None, out=o)
        np.minimum(gc(3), pc(3), out=t)
        np.maximum(gc(1), pc(1), out=u)
        np.subtract(t, u, out=t)
        np.clip(t, 0.0, None, out=t)
        np.multiply(o, t, out=o)  # inter
        np.add(area_g[:, None], self.area_p[j0:j1][None, :], out=t)
        np.subtract(t, o, out=t)  # union
        np.greater(t, 0.0, out=w)
        np.divide(o, t, out=o, where=w)
        o[~w] = 0.0
        return o


class _MclaScorer:
    """Streaming combined-criteria scorer with reusable block buffers.

    Uses the exact global min/span of the center-distance matrix (min/max
    reductions are exact, hence chunk-independent) and mirrors the
    operation order of :func:`_combined_block`.
    """

    def __init__(self, g_xyxy, g_cs, p_xyxy, p_cs, weights: MclaWeights,
                 chunk: int):
        self.g_cs = g_cs
        self.p_cs = p_cs
        self.weights = weights
        self.iou = _IouScorer(g_xyxy, p_xyxy, chunk)
        m = g_xyxy.shape[0]
        self._bufs = [np.empty((m, chunk)) for _ in range(3)]
        self.e1_lo, self.e1_span = self._e1_range(chunk)

    def _e1_dist_into(self, j0, j1, t, u, g_cs):
        p = self.p_cs[j0:j1]
        np.subtract(g_cs[:, 0][:, None], p[:, 0][None, :], out=t)
        np.multiply(t, t, out=t)
        np.subtract(g_cs[:, 1][:, None], p[:, 1][None, :], out=u)
        np.multiply(u, u, out=u)
        np.add(t, u, out=t)
        np.sqrt(t, out=t)
        return t

    def _e1_range(self, chunk):
        lo, hi = np.inf, -np.inf
        n = self.p_cs.shape[0]
        for j0 in range(0, n, chunk):
            j1 = min(j0 + chunk, n)
            t, u = (b[:, : j1 - j0] for b in self._bufs[:2])
            e1 = self._e1_dist_into(j0, j1, t, u, self.g_cs)
            lo = min(lo, e1.min())
            hi = max(hi, e1.max())
        return lo, hi - lo

    def score_into(self, j0: int, j1: int, rows: np.ndarray | None = None):
        m = self.g_cs.shape[0] if rows is None else len(rows)
        if rows is None:
            g_cs = self.g_cs
            t, u, v = (b[:, : j1 - j0] for b in self._bufs)
        else:
            g_cs = self.g_cs[rows]
            t, u, v = (np.empty((m, j1 - j0)) for _ in range(3))
        w = self.weights
        p_cs = self.p_cs[j0:j1]
        # E1 -> normalized -> center-offset criterion, accumulated into t.
        self._e1_dist_into(j0, j1, t, u, g_cs)
        if self.e1_span == 0.0:
            t[:] = 0.0
        else:
            np.subtract(t, self.e1_lo, out=t)
            np.divide(t, self.e1_span, out=t)
        np.multiply(t, w.c_poc, out=t)
        np.sqrt(t, out=t)
        np.add(t, 1.0, out=t)
        np.divide(1.0, t, out=t)
        np.multiply(t, w.lambda_poc, out=t)
        # Shape criterion into u.
        np.subtract(g_cs[:, 2][:, None], p_cs[:, 2][None, :], out=u)
        np.multiply(u, u, out=u)
        np.subtract(g_cs[:, 3][:, None], p_cs[:, 3][None, :], out=v)
        np.multiply(v, v, out=v)
        np.add(u, v, out=u)
        np.multiply(u, w.c_scc, out=u)
        np.sqrt(u, out=u)
        np.add(u, 1.0, out=u)
        np.divide(1.0, u, out=u)
        np.multiply(u, w.lambda_scc, out=u)
        # Overlap criterion, then the weighted sum with the same grouping
        # as the dense kernel: ((iou + poc) + scc) / total.
        s_iou = self.iou.score_into(j0, j1, rows)
        np.multiply(s_iou, w.lambda_iou, out=s_iou)
        np.add(s_iou, t, out=s_iou)
        np.add(s_iou, u, out=s_iou)
        np.divide(s_iou, w.lambda_iou + w.lambda_poc + w.lambda_scc, out=s_iou)
        return s_iou


def _maxiou_assign_streamed(g_xyxy, p_xyxy, cfg, chunk):
    if g_xyxy.shape[0] == 0 or p_xyxy.shape[0] == 0:
        return _empty_assign(p_xyxy.shape[0])
    scorer = _IouScorer(g_xyxy, p_xyxy, min(chunk, max(1, p_xyxy.shape[0])))
    return _assign_streamed(scorer, g_xyxy.shape[0], p_xyxy.shape[0], cfg, chunk)


def _empty_assign(n: int) -> AssignResult:
    return AssignResult(
        labels=np.full(n, NEGATIVE, dtype=np.int64),
        max_quality=np.zeros(n, dtype=np.float64),
    )


def _assign_streamed(scorer, m: int, n: int, cfg: AssignConfig,
                     chunk: int) -> AssignResult:
    """Thresholding protocol over proposal-column chunks.

    Produces bit-identical results to :func:`assign_max_quality` on the
    full matrix: columnwise reductions are chunk-local, the rescue pass
    reuses exact global row maxima, and score blocks repeat the dense
    kernels' arithmetic. The rescue pass only rescores rows whose global
    maximum was attained inside the chunk, which cannot change the tie
    sets it finds.
    """
    chunk = min(chunk, max(1, n))
    labels = np.empty(n, dtype=np.int64)
    q = np.empty(n, dtype=np.float64)
    starts = list(range(0, n, chunk))
    need_rescue = cfg.match_low_quality
    chunk_row_max = np.empty((len(starts), m)) if need_rescue else None
    for ci, j0 in enumerate(starts):
        j1 = min(j0 + chunk, n)
        blk = scorer.score_into(j0, j1)
        qc = blk.max(axis=0)
        bc = blk.argmax(axis=0)
        lc = np.where(qc < cfg.neg_thr, NEGATIVE, IGNORED).astype(np.int64)
        pos = qc >= cfg.pos_thr
        lc[pos] = bc[pos]
        labels[j0:j1] = lc
        q[j0:j1] = qc
        if need_rescue:
            chunk_row_max[ci] = blk.max(axis=1)
    if need_rescue:
        row_max = chunk_row_max.max(axis=0)
        eligible = row_max >= cfg.min_pos_quality
        for ci, j0 in enumerate(starts):
            rows = np.nonzero(eligible & (chunk_row_max[ci] == row_max))[0]
            if rows.size == 0:
                continue
            j1 = min(j0 + chunk, n)
            blk = scorer.score_into(j0, j1, rows=rows)
            tie = blk == row_max[rows, None]
            hit = tie.any(axis=0)
            if not hit.any():
                continue
            # Highest row index wins, matching an ascending sweep with
            # overrides; rows is sorted so the last tied entry wins.
            winner_local = (rows.size - 1) - np.argmax(tie[::-1, :], axis=0)
            cols = np.nonzero(hit)[0]
            labels[j0 + cols] = rows[winner_local[cols]]
    return AssignResult(labels=labels, max_quality=q)


def scores_to_csv(scores: np.ndarray) -> str:
    """Serialize a score matrix row-major with a header of proposal indices.

    Floats use ``repr`` so values round-trip exactly through the file.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"expected a 2-D score matrix, got shape {scores.shape}")
    buf = io.StringIO()
    buf.write(",".join(str(j) for j in range(scores.shape[1])))
    buf.write("\n")
    for row in scores:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()
