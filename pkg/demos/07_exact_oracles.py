"""
Exact reference computations
============================

For tiny universes every permutation can be enumerated; for moderate ones the
joint law of the two minimums is available in rational arithmetic. Both agree
with the three-cell probabilities a/U, (f1-a)/U, (f2-a)/U.
"""
import math

import numpy as np

from minwise_mle import oracle
from minwise_mle.minwise import three_cell_probs

s1, s2 = {0, 1, 2}, {2, 3}
counts = oracle.enumerate_min_pairs(6, s1, s2)
print("permutation counts of (z1, z2) for D = 6:\n", counts)
total = math.factorial(6)
print("eq, lt, gt by enumeration:",
      [int(np.trace(counts)), int(np.triu(counts, 1).sum()), int(np.tril(counts, -1).sum())], "of", total)
print("eq, lt, gt from formula  :", three_cell_probs((3, 2, 1)))

dist = oracle.JointMinDistribution(40, 12, 8, 5)
print("\nD = 40, (f1, f2, a) = (12, 8, 5): three cells", dist.three_cell())

# exact sampling of the minimums for a huge universe
z1, z2 = oracle.sample_permutation_minima(10**12, 3 * 10**8, 10**8, 5 * 10**7, 100_000, np.random.default_rng(0))
print("\nsampled eq fraction:", np.mean(z1 == z2), " expected:", 5e7 / (3e8 + 1e8 - 5e7))
