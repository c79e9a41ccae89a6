"""
Cell probabilities of b-bit minwise hashing
===========================================

Keeping only the lowest b bits of each minimum turns the comparison into a
2^b x 2^b contingency table. Here the closed-form cell probabilities are
checked against a brute-force fold of the large-universe joint law of the two
minimums, and the summary probabilities are shown approaching the 3-cell
values as b grows.
"""
import numpy as np

from minwise_mle import bbit, oracle

rates = (0.5, 0.25, 0.2)  # r1 = f1/D, r2 = f2/D, s = a/D
table = bbit.cell_matrix(2, rates)
np.set_printoptions(precision=5, suppress=True)
print("b = 2 contingency table:\n", table)
print("sums to", table.sum())

folded = oracle.bbit_matrix_by_summation(2, rates)
print("max difference to the residue-summation oracle:", np.abs(table - folded).max())

# as b grows the b-bit comparison becomes the plain comparison of minimums
r1, r2, s = rates
u = r1 + r2 - s
print("\n  b    P_eq      P_lt      P_gt")
for b in (1, 2, 4, 8, 16, 32):
    print(f"{b:3d}  " + "  ".join(f"{p:.6f}" for p in bbit.summary_probs(b, rates)))
print("lim  " + "  ".join(f"{p:.6f}" for p in (s / u, (r1 - s) / u, (r2 - s) / u)))

# grouping schemes coarsen the full table
for tag in bbit.SCHEMES:
    scheme = bbit.GroupingScheme(tag, 2)
    print(f"{tag:>5}: {scheme.m:2d} cells", np.round(bbit.grouped_probs(scheme, rates), 4))
