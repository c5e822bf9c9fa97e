"""Independent scalar-loop oracles used by the unit and acceptance suites.

Deliberately written with plain Python arithmetic and loops so they share
no code path with the vectorized library implementations.
"""

import math

import numpy as np


def random_boxes(rng, n, span=200.0, max_size=60.0):
    lo = rng.uniform(0.0, span, (n, 2))
    wh = rng.uniform(0.1, max_size, (n, 2))
    return np.hstack([lo, lo + wh])


def scalar_iou(a, b):
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    inter = max(0.0, ix2 - ix1) * max(0.0, iy2 - iy1)
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def scalar_mcla_scores(gts, proposals, weights):
    """Loop transcription of the multi-criteria scoring procedure."""

    def center_size(b):
        return ((b[0] + b[2]) / 2, (b[1] + b[3]) / 2, b[2] - b[0], b[3] - b[1])

    g_cs = [center_size(b) for b in gts]
    p_cs = [center_size(b) for b in proposals]
    m, n = len(g_cs), len(p_cs)
    e1 = [
        [
            math.sqrt((g[0] - p[0]) ** 2 + (g[1] - p[1]) ** 2)
            for p in p_cs
        ]
        for g in g_cs
    ]
    flat = [v for row in e1 for v in row]
    lo, hi = min(flat), max(flat)
    span = hi - lo
    total = weights.lambda_iou + weights.lambda_poc + weights.lambda_scc
    scores = [[0.0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            e1n = 0.0 if span == 0 else (e1[i][j] - lo) / span
            poc = 1.0 / (1.0 + math.sqrt(weights.c_poc * e1n))
            e2 = (g_cs[i][2] - p_cs[j][2]) ** 2 + (g_cs[i][3] - p_cs[j][3]) ** 2
            scc = 1.0 / (1.0 + math.sqrt(weights.c_scc * e2))
            s_iou = scalar_iou(gts[i], proposals[j])
            scores[i][j] = (
                weights.lambda_iou * s_iou
                + weights.lambda_poc * poc
                + weights.lambda_scc * scc
            ) / total
    return np.asarray(scores)


def brute_force_assign(scores, cfg):
    """Loop transcription of the thresholding protocol, labels only."""
    scores = np.asarray(scores, dtype=float)
    m, n = scores.shape
    labels = []
    for j in range(n):
        if m == 0:
            labels.append(-1)
            continue
        col = [float(scores[i, j]) for i in range(m)]
        q = max(col)
        if q < cfg.neg_thr:
            labels.append(-1)
        elif q < cfg.pos_thr:
            labels.append(-2)
        else:
            labels.append(col.index(q))
    if cfg.match_low_quality and m and n:
        for i in range(m):
            row = [float(scores[i, j]) for j in range(n)]
            r = max(row)
            if r >= cfg.min_pos_quality:
                for j in range(n):
                    if row[j] == r:
                        labels[j] = i
    return np.asarray(labels, dtype=np.int64)
