"""
Sketching two sets and estimating their overlap
===============================================

Build k = 2000 seeded min-hashes of two overlapping sets, write them to disk
in the binary sketch format, read them back and estimate the intersection
with the standard estimator and with the 3-cell maximum likelihood estimator.
"""
import tempfile
from pathlib import Path

from minwise_mle import HashFamily, SetRecord, compare_minwise, sketch_minwise
from minwise_mle.minwise import estimate_mle3, estimate_simple
from minwise_mle.sketchfile import read_sketch, write_sketch

# two sets of very different sizes: |S1| = 20000, |S2| = 2000, |S1 & S2| = 1800
s1 = SetRecord.from_iterable("big", range(0, 20000))
s2 = SetRecord.from_iterable("small", range(18200, 20200))

family = HashFamily(seed=7, k=2000)
out = Path(tempfile.mkdtemp())
for rec in (s1, s2):
    write_sketch(out / f"{rec.id}.mhs", sketch_minwise(rec, family))
    print("wrote", out / f"{rec.id}.mhs", (out / f"{rec.id}.mhs").stat().st_size, "bytes")

sk1, sk2 = read_sketch(out / "big.mhs"), read_sketch(out / "small.mhs")
counts = compare_minwise(sk1, sk2)
print("cell counts (eq, lt, gt):", counts.k_eq, counts.k_lt, counts.k_gt)

# the standard estimator only looks at k_eq; the MLE also uses which minimum was smaller
standard = estimate_simple(counts, sk1.f, sk2.f, "eq")
mle = estimate_mle3(counts, sk1.f, sk2.f)
print(f"true intersection          : 1800")
print(f"standard estimate +- se    : {standard.a_hat:8.1f} +- {standard.se:.1f}")
print(f"maximum likelihood +- se   : {mle.a_hat:8.1f} +- {mle.se:.1f}")
