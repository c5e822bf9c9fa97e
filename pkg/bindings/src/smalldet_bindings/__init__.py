"""Array-interface bindings to the smalldet assigners and spectral ops.

Exactly four entry points, meant for training-loop integration: box sets
cross the boundary as contiguous ``(n, 4)`` row-major arrays in corner
form, feature tensors as ``(h, w, c)`` row-major arrays of any real
dtype. Every call returns freshly allocated arrays (value semantics) and
produces results numerically identical to the library API it delegates
to: assignment labels bit-exact, spectral outputs bit-exact in float64.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

import smalldet
from smalldet.assign import (
    ONE_STAGE_CONFIG,
    TWO_STAGE_CONFIG,
    AssignConfig,
    MclaWeights,
    mcla_assign,
    mcla_scores,
    one_stage_maxiou,
    two_stage_maxiou,
)
from smalldet.freq import HfpConfig, fd_split, hfp_purify

__all__ = ["py_mcla_scores", "py_assign", "py_hfp_purify", "py_fd_split"]

__version__ = "0.1.0"

STRATEGIES = ("one_stage_maxiou", "two_stage_maxiou", "mcla")


def _check_boxes(name: str, arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 4:
        raise ValueError(
            f"{name} must be an (n, 4) box array, got shape {np.asarray(arr).shape}"
        )
    return out


def _check_tensor(name: str, arr) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out.ndim not in (2, 3) or out.size == 0:
        raise ValueError(
            f"{name} must be a non-empty (h, w) or (h, w, c) tensor, "
            f"got shape {np.asarray(arr).shape}"
        )
    return out


def _weights_from(weights) -> MclaWeights:
    if weights is None:
        return MclaWeights()
    if isinstance(weights, MclaWeights):
        return weights
    if isinstance(weights, Mapping):
        return MclaWeights(**dict(weights))
    raise TypeError(f"weights must be a mapping or MclaWeights, got {type(weights).__name__}")


def _config_from(config, default: AssignConfig) -> AssignConfig:
    if config is None:
        return default
    if isinstance(config, AssignConfig):
        return config
    if isinstance(config, Mapping):
        merged = {
            "pos_thr": default.pos_thr,
            "neg_thr": default.neg_thr,
            "match_low_quality": default.match_low_quality,
            "min_pos_quality": default.min_pos_quality,
        }
        extra = {k: v for k, v in config.items() if k != "weights"}
        unknown = set(extra) - set(merged)
        if unknown:
            raise ValueError(f"unknown assign config keys: {sorted(unknown)}")
        merged.update(extra)
        return AssignConfig(**merged)
    raise TypeError(f"config must be a mapping or AssignConfig, got {type(config).__name__}")


def py_mcla_scores(gts, proposals, weights=None) -> np.ndarray:
    """Combined multi-criteria score matrix for two box arrays.

    ``weights`` may be a mapping with any of ``lambda_iou``, ``lambda_poc``,
    ``lambda_scc``, ``c_poc``, ``c_scc``. Returns a new (m, n) float64 array.
    """
    g = _check_boxes("gts", gts)
    p = _check_boxes("proposals", proposals)
    return mcla_scores(g, p, _weights_from(weights))


def py_assign(gts, proposals, strategy: str, config=None) -> np.ndarray:
    """Assignment labels under a named strategy.

    ``strategy`` is one of ``one_stage_maxiou``, ``two_stage_maxiou`` or
    ``mcla``. ``config`` may override ``pos_thr``, ``neg_thr``,
    ``match_low_quality``, ``min_pos_quality``, and (for mcla) ``weights``.
    Returns a new int64 array: -1 negative, -2 ignored, >= 0 the matched
    box's row index.
    """
    g = _check_boxes("gts", gts)
    p = _check_boxes("proposals", proposals)
    if strategy == "one_stage_maxiou":
        result = one_stage_maxiou(g, p, _config_from(config, ONE_STAGE_CONFIG))
    elif strategy == "two_stage_maxiou":
        result = two_stage_maxiou(g, p, _config_from(config, TWO_STAGE_CONFIG))
    elif strategy == "mcla":
        weights = None
        if isinstance(config, Mapping) and "weights" in config:
            weights = _weights_from(config["weights"])
        result = mcla_assign(g, p, weights, _config_from(config, TWO_STAGE_CONFIG))
    else:
        raise ValueError(
            f"unknown strategy {strategy!r}; expected one of {STRATEGIES}"
        )
    return result.labels.copy()


def py_hfp_purify(tensor, level: int, relay_level: int = 2,
                  intensity: float = 0.05,
                  residual_weight: float = 0.3) -> np.ndarray:
    """Residual highpass purification of one pyramid level's features."""
    x = _check_tensor("tensor", tensor)
    cfg = HfpConfig(relay_level=relay_level, intensity=intensity,
                    residual_weight=residual_weight)
    return hfp_purify(x, level, cfg)


def py_fd_split(tensor, d_l: float = 0.85,
                d_h: float = 0.10) -> tuple[np.ndarray, np.ndarray]:
    """Low/high frequency split of a pooled feature tensor."""
    x = _check_tensor("tensor", tensor)
    return fd_split(x, d_l, d_h)
