"""
Variance-ratio grids
====================

Ratios of leading-order variances over a grid of size ratio r2/r1 and
containment s/r2, written as CSV. Plain minwise hashing uses b = 0.
"""
import io

import numpy as np

from minwise_mle.analysis import VarianceGridSpec, variance_ratio_grid, write_csv

spec = VarianceGridSpec.with_resolution(0, 1.0, resolution=6, comparisons=[("eq", "mle"), ("gt", "lt")])
rows = variance_ratio_grid(spec)
print(write_csv(rows[:8], spec.columns), "...")

spec = VarianceGridSpec.with_resolution(4, 0.8, resolution=20)
rows = [r for r in variance_ratio_grid(spec) if r["status"] == "ok"]
eq_full = np.array([r["eq/full"] for r in rows])
print(f"b=4, r1=0.8: {len(rows)} feasible points, Var(eq)/Var(full) ranges {eq_full.min():.2f} .. {eq_full.max():.2f}")
buf = io.StringIO()
write_csv(rows, spec.columns, buf)
print(len(buf.getvalue().splitlines()) - 1, "CSV rows")
