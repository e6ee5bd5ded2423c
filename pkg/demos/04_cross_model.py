"""Ginibre edge versus annihilating Brownian motions, at laptop size.

The largest real eigenvalue of an N x N real Ginibre matrix, shifted by
sqrt(N), and the rightmost survivor of annihilating Brownian motions started
from a dense packing of the half line, rescaled by sqrt(4t), share a limiting
law. For a few thousand samples the two are indistinguishable, and both track
the predicted tail slope. Takes about a minute.
"""
import numpy as np

from gtail import abm, ginibre, kappa, predict, tails

count = 3000
g = ginibre.sample_ginibre(128, seed=0, count=count, method="edge").lambda_max_shifted
a = abm.simulate_many(abm.AbmConfig(seed=0), count).rightmost_rescaled

stat, p = tails.two_sample_ks(g, a)
print(f"KS distance {stat:.4f}, p-value {p:.3f}")

grid = np.linspace(0.0, 1.5, 7)
cg, ca = tails.tail_curve(g, grid), tails.tail_curve(a, grid)
print(f"\n{'L':>5} {'ginibre':>16} {'abm':>16} {'predicted':>10}")
for i, L in enumerate(grid):
    print(f"{L:5.2f} {cg.empirical_log_prob[i]:8.3f} +- {cg.stderr[i]:.3f} "
          f"{ca.empirical_log_prob[i]:8.3f} +- {ca.stderr[i]:.3f} {predict(L).predicted_log_prob:10.3f}")

for name, x in (("ginibre", g), ("abm", a)):
    fit = tails.fit_tail_slope(tails.tail_curve(x, np.linspace(0.5, 1.5, 11)))
    print(f"{name} slope on [0.5, 1.5]: {fit.slope:.3f} +- {fit.slope_stderr:.3f}  (-kappa = {-kappa():.3f})")
