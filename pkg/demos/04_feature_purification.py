"""Residual highpass purification on a synthetic feature map.

The map mixes a smooth low-frequency "semantic wash" with two small
sharp blobs standing in for small-object evidence. Purification removes
the central low-frequency block of the spectrum and adds the filtered
map back as a weighted residual, sharpening the blobs' relative
prominence without discarding the original signal.
"""

import numpy as np

from smalldet import HfpConfig, build_hfp_mask, hfp_purify

rng = np.random.default_rng(0)
h = w = 64
yy, xx = np.mgrid[0:h, 0:w]

# Smooth background: two broad gradients plus gentle noise.
background = (
    1.5 * np.sin(2 * np.pi * yy / h) + 1.0 * np.cos(2 * np.pi * xx / w)
    + 0.05 * rng.normal(size=(h, w))
)

# Small objects: tight Gaussian bumps a few pixels wide.
def bump(cy, cx, amp=2.0, sigma=1.5):
    return amp * np.exp(-(((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma**2)))

objects = bump(18, 44) + bump(47, 12)
feature = background + objects

cfg = HfpConfig(relay_level=2, intensity=0.05, residual_weight=0.3)
purified = hfp_purify(feature, level=0, cfg=cfg)

mask = build_hfp_mask(h, w, 0, cfg)
removed = int((mask == 0).sum())
print(f"mask removes a {removed}-bin low-frequency block "
      f"({removed / mask.size:.2%} of the spectrum)")

def object_contrast(fmap):
    """Peak object response relative to the background's spread."""
    peak = max(abs(fmap[18, 44]), abs(fmap[47, 12]))
    return peak / fmap.std()

print(f"object contrast before purification: {object_contrast(feature):.2f}")
print(f"object contrast after  purification: {object_contrast(purified):.2f}")

residual = purified - feature
print(f"residual branch energy: {float((residual ** 2).sum()):.2f} "
      f"(weight {cfg.residual_weight})")

# The filtered branch holds almost none of the background's energy.
flat_bg = hfp_purify(background, level=0, cfg=cfg) - background
flat_obj = hfp_purify(objects, level=0, cfg=cfg) - objects
print(f"energy kept from background: "
      f"{float((flat_bg ** 2).sum() / (background ** 2).sum()):.4f}")
print(f"energy kept from objects:    "
      f"{float((flat_obj ** 2).sum() / (objects ** 2).sum()):.4f}")
