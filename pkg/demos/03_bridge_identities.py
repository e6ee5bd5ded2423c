"""Two exact identities for Gaussian bridges, checked by simulation.

Kac: the weighted expected maximum of a Gaussian bridge equals a weighted
sum of positive parts, and for Gaussian steps it has a closed form.

Cyclic shifts: among the n even rotations of a bridge of length 2n, exactly
one first drops to 0 at the very end. This turns stopped expectations into
plain bridge averages.
"""
import math

import numpy as np

from gtail import walks
from gtail.mc import stream

cfg = walks.WalkConfig(increment_variance=1.0, seed=2)
print(" n   MC lhs            closed form   z")
for n in (2, 3, 5, 8):
    est = walks.kac_lhs(n, cfg, 400_000)
    exact = walks.kac_closed_form(n)
    print(f"{n:2d}   {est.mean:.5f} +- {est.stderr:.5f}   {exact:.5f}     {est.z_score(exact):5.2f}")
print(f"     (n = 2 is 1/(4 pi) = {1 / (4 * math.pi):.5f})")

path = walks.walk_bridges(stream(0, "demo-shift", 0), 5, 8, 0.5)
hits = walks.cyclic_shift_hits(path)
print("\nwhich of the 4 rotations of five random bridges of length 8 qualify:")
print(hits.astype(int))
print("row sums:", hits.sum(axis=1))

print("\np_n(L) two ways (direct stopping vs rotated bridge average):")
wc = walks.WalkConfig(seed=3)
for n, L in ((2, 1.0), (4, 0.5), (5, 2.0)):
    d = walks.p_n_direct(n, L, wc, 100_000)
    s = walks.p_n_shifted(n, L, wc, 100_000)
    print(f"n={n} L={L}: {d.mean:.5f} vs {s.mean:.5f}  (z = {d.z_score(s):.2f})")
