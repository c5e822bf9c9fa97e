"""Centered 2-D FFT filtering: level-adaptive purification and band splits.

Spectra are DC-centered: the zero-frequency bin of an ``H x W`` map sits at
``(H//2, W//2)``. Masks are binary squares around that center, symmetric
under point reflection, so filtering a real tensor returns a real tensor.
The forward transform is unnormalized; the inverse carries the ``1/(H*W)``
factor (numpy's default convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HfpConfig",
    "fft2_centered",
    "ifft2_centered",
    "build_hfp_mask",
    "hfp_purify",
    "purify_with_mask",
    "build_band_mask",
    "fd_split",
]

IMAG_TOL = 1e-5


@dataclass(frozen=True)
class HfpConfig:
    """Purifier knobs: relay level, filtering intensity, residual weight.

    Purification runs only on pyramid levels below ``relay_level``; the
    removed low-frequency block shrinks linearly as the level approaches it.
    """

    relay_level: int = 2
    intensity: float = 0.05
    residual_weight: float = 0.3

    def __post_init__(self):
        if self.relay_level < 0 or int(self.relay_level) != self.relay_level:
            raise ValueError(f"relay_level must be a non-negative integer, got {self.relay_level}")
        if not (0.0 <= self.intensity <= 1.0):
            raise ValueError(f"intensity must be in [0, 1], got {self.intensity}")
        if self.residual_weight < 0:
            raise ValueError(f"residual_weight must be non-negative, got {self.residual_weight}")


def _check_tensor(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim not in (2, 3):
        raise ValueError(f"expected an (H, W) or (H, W, C) tensor, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("tensor dimensions must all be >= 1")
    if not np.isfinite(arr).all():
        raise ValueError("tensor values must be finite")
    return arr


def fft2_centered(x) -> np.ndarray:
    """Per-channel 2-D DFT of a spatial tensor, DC bin moved to the center."""
    arr = _check_tensor(x)
    return np.fft.fftshift(np.fft.fft2(arr, axes=(0, 1)), axes=(0, 1))


def ifft2_centered(s, imag_tol: float = IMAG_TOL) -> np.ndarray:
    """Inverse of :func:`fft2_centered`, returning the real part.

    The imaginary residue must stay below ``imag_tol`` (max-abs); anything
    larger signals an asymmetric mask upstream and raises instead of being
    silently discarded.
    """
    arr = np.asarray(s)
    if arr.ndim not in (2, 3) or arr.size == 0:
        raise ValueError(f"expected a non-empty (H, W[, C]) spectrum, got shape {arr.shape}")
    out = np.fft.ifft2(np.fft.ifftshift(arr, axes=(0, 1)), axes=(0, 1))
    resid = float(np.abs(out.imag).max())
    if resid > imag_tol:
        raise ValueError(
            f"imaginary residue {resid:.3e} exceeds {imag_tol:.1e}; "
            "filter mask is not point-symmetric about the DC center"
        )
    return np.ascontiguousarray(out.real)


def _center_square(h: int, w: int, frac: float) -> np.ndarray:
    """Boolean block ``|i - h//2| <= frac*h/2 and |j - w//2| <= frac*w/2``."""
    ii = np.abs(np.arange(h) - h // 2)[:, None]
    jj = np.abs(np.arange(w) - w // 2)[None, :]
    return (ii <= frac * h / 2.0) & (jj <= frac * w / 2.0)


def build_hfp_mask(h: int, w: int, level: int, cfg: HfpConfig) -> np.ndarray:
    """Adaptive highpass mask for one pyramid level.

    The removed fraction of the spectral half-extent is
    ``intensity * (relay_level - level) / relay_level``: strongest at level
    0, shrinking to nothing at the relay level. The cutoff is fractional,
    so a given intensity removes the same share of the spectrum at every
    resolution. At fraction 0 only the single DC bin is zeroed (the block
    bounds are inclusive).
    """
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    if level >= cfg.relay_level:
        raise ValueError(
            f"purification applies only below the relay level: "
            f"level {level} >= relay_level {cfg.relay_level}"
        )
    k = cfg.intensity * (cfg.relay_level - level) / cfg.relay_level
    mask = np.ones((h, w), dtype=np.float64)
    mask[_center_square(h, w, k)] = 0.0
    return mask


def purify_with_mask(x, mask: np.ndarray, residual_weight: float) -> np.ndarray:
    """Residual purification: ``ifft(mask * fft(x)) * weight + x``."""
    arr = _check_tensor(x).astype(np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != arr.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match tensor {arr.shape[:2]}")
    spec = fft2_centered(arr)
    m = mask if arr.ndim == 2 else mask[:, :, None]
    filtered = ifft2_centered(m * spec)
    return filtered * residual_weight + arr


def hfp_purify(x, level: int, cfg: HfpConfig | None = None) -> np.ndarray:
    """Purify one pyramid level's features with its adaptive highpass mask."""
    cfg = cfg or HfpConfig()
    arr = _check_tensor(x)
    mask = build_hfp_mask(arr.shape[0], arr.shape[1], level, cfg)
    return purify_with_mask(arr, mask, cfg.residual_weight)


def build_band_mask(h: int, w: int, cutoff: float, kind: str) -> np.ndarray:
    """Binary lowpass/highpass mask with a fractional square cutoff.

    ``lowpass`` keeps the central square ``|i - h//2| <= cutoff*h/2`` (and
    likewise in j); ``highpass`` keeps the complement. The two masks
    partition the spectrum for any cutoff.
    """
    if not (0.0 <= cutoff <= 1.0):
        raise ValueError(f"cutoff must be in [0, 1], got {cutoff}")
    inside = _center_square(h, w, cutoff)
    if kind == "lowpass":
        return inside.astype(np.float64)
    if kind == "highpass":
        return (~inside).astype(np.float64)
    raise ValueError(f"kind must be 'lowpass' or 'highpass', got {kind!r}")


def fd_split(f_roi, d_l: float = 0.85, d_h: float = 0.10) -> tuple[np.ndarray, np.ndarray]:
    """Split a feature tensor into lowpass and highpass components.

    Returns ``(low, high)`` with the input's shape: the low branch keeps
    spectral content within the ``d_l`` square, the high branch keeps
    content outside the ``d_h`` square. The semantic-heavy low component
    suits classification-style consumers, the contour-heavy high component
    regression-style ones.
    """
    arr = _check_tensor(f_roi).astype(np.float64)
    h, w = arr.shape[:2]
    spec = fft2_centered(arr)
    low_mask = build_band_mask(h, w, d_l, "lowpass")
    high_mask = build_band_mask(h, w, d_h, "highpass")
    if arr.ndim == 3:
        low_mask = low_mask[:, :, None]
        high_mask = high_mask[:, :, None]
    low = ifft2_centered(low_mask * spec)
    high = ifft2_centered(high_mask * spec)
    return low, high
