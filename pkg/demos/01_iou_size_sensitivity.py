"""Why overlap alone mistreats small boxes: two analytic experiments.

Experiment 1 (deviation): slide a perfectly sized square proposal off its
target by a fixed number of pixels and watch the IoU collapse as the
target shrinks. Experiment 2 (size): center a smaller proposal inside its
target; even full containment cannot buy a competitive score.
"""

import numpy as np

from smalldet import iou_contained, iou_under_shift

print("Deviation issue: IoU of two n x n squares offset by d pixels")
print(f"{'n (px)':>8} | " + " ".join(f"d={d:<4}" for d in (0, 1, 2, 4, 8)))
for n in (8, 16, 32, 64, 128):
    row = [iou_under_shift(n, d) for d in (0, 1, 2, 4, 8)]
    print(f"{n:>8} | " + " ".join(f"{v:.3f}" for v in row))

print()
print("A 2-pixel miss costs an 8 px object", end=" ")
print(f"{1 - iou_under_shift(8, 2):.0%} of its score, a 128 px object only "
      f"{1 - iou_under_shift(128, 2):.0%}.")

print()
print("Size issue: proposal of side n_p centered inside a box of side n_g")
print(f"{'n_g (px)':>8} | " + " ".join(f"n_p={p:<3}" for p in (4, 8, 16, 32)))
for n_g in (8, 16, 32, 64):
    row = [iou_contained(min(p, n_g), n_g) for p in (4, 8, 16, 32)]
    print(f"{n_g:>8} | " + "  ".join(f"{v:.3f}" for v in row))

print()
print("With a 0.5 positive threshold, a contained proposal needs at least")
side = np.sqrt(0.5)
print(f"{side:.0%} of the target's side length (IoU = (n_p/n_g)^2 >= 0.5).")
