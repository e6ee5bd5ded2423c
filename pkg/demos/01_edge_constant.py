"""How the edge constant is pinned down.

The series behind C_e converges like n^(-3/2), so a plain partial sum is off
in the fourth digit even after 10^5 terms. Two tail closures fix that: a
fitted c n^(-3/2) model and the full endpoint expansion. They should agree
with each other long before the raw sum settles.
"""
import math

from gtail import c_bulk, c_edge, kappa, predict

print(f"{'cutoff':>8} {'raw':>14} {'tail fit':>14} {'asymptotic':>14}")
for cutoff in (100, 1000, 10_000, 100_000):
    row = [c_edge(cutoff, t).value for t in ("raw", "tail_corrected", "asymptotic")]
    print(f"{cutoff:>8} " + " ".join(f"{v:>14.10f}" for v in row))

ce = c_edge().value
print(f"\nexp(C_e) = {math.exp(ce):.6f}")
print(f"C_b - C_e = {c_bulk().value - ce:.15f}   (log 2 / 2 = {0.5 * math.log(2):.15f})")
print(f"kappa = {kappa():.10f}")

# The predicted left tail is a straight line in L.
print("\n   L   log P(lambda_max < -L) predicted")
for L in (0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"{L:4.1f}   {predict(L).predicted_log_prob:9.5f}")
