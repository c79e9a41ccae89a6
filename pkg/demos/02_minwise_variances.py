"""
How much the 3-cell MLE gains over the standard estimator
=========================================================

The standard estimator uses only P(z1 = z2). The maximum likelihood estimator
uses all three outcomes z1 = z2, z1 < z2, z1 > z2. Its advantage is largest
when the sets differ in size and the smaller set is mostly contained in the
larger one.
"""
import numpy as np

from minwise_mle import PairGroundTruth
from minwise_mle.analysis import eq_to_mle_variance_ratio
from minwise_mle.minwise import three_cell_probs, variance_mle3, variance_simple

gt = PairGroundTruth(4, 2, 1)
print("three-cell probabilities of (f1, f2, a) = (4, 2, 1):", three_cell_probs(gt))

# unit-k variances of every estimator at one point
gt = PairGroundTruth(1.0, 0.2, 0.19)
for which in ("eq", "lt", "gt"):
    print(f"Var({which:>2}) = {variance_simple(gt, 1, which):.5f}")
print(f"Var(mle) = {variance_mle3(gt, 1):.5f}")
print(f"ratio Var(eq) / Var(mle) at f2/f1 = 0.2, T = 0.95: {eq_to_mle_variance_ratio(0.2, 0.95):.4f}")

# a small table of the ratio over size ratio and containment
print("\nVar(eq) / Var(mle)")
containments = [0.1, 0.5, 0.9, 0.99]
print("f2/f1  " + "".join(f"T={t:<7}" for t in containments))
for q in (0.05, 0.2, 0.5, 1.0):
    print(f"{q:<6} " + "".join(f"{eq_to_mle_variance_ratio(q, t):<9.3f}" for t in containments))

# when f1 > f2, counting "the small set's minimum came first" beats the reverse
q = np.linspace(0.1, 0.9, 5)
print("\nVar(gt) / Var(lt) at T = 0.5:", [round(variance_simple(PairGroundTruth(1, x, x / 2), 1, "gt") /
                                           variance_simple(PairGroundTruth(1, x, x / 2), 1, "lt"), 4) for x in q])
