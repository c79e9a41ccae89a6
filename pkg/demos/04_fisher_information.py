"""
Fisher information of the b-bit grouping schemes
================================================

Each grouping scheme is a multinomial model in the single parameter s. The
generic solver maximises its likelihood; the Fisher information says how much
each coarsening of the full table costs.
"""
import numpy as np

from minwise_mle import bbit
from minwise_mle.mle import bbit_model, scheme_informations, solve_mle

b, r1, r2, s = 8, 0.8, 0.16, 0.144
info = scheme_informations(b, r1, r2, s)
print(f"b={b}, r1={r1}, r2={r2}, s={s}")
for tag, value in info.items():
    print(f"  {tag:>5}: I = {value:12.2f}   Var ratio vs full = {info['full'] / value:7.3f}")

# estimate s from a simulated table with k = 500 samples
rng = np.random.default_rng(1)
k = 500
probs = bbit.cell_matrix(b, (r1, r2, s)).ravel()
counts = rng.multinomial(k, probs).reshape(2**b, 2**b)
for tag in ("full", "three", "eq"):
    scheme = bbit.GroupingScheme(tag, b)
    grouped = bbit.group_matrix(counts, tag)
    sol = solve_mle(bbit_model(scheme, r1, r2), grouped)
    print(f"{tag:>5}: s_hat = {sol.theta_hat:.4f} +- {sol.se:.4f}")
