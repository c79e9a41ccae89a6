"""Command-line interface: ``minwise-mle {sketch,estimate,grid,simulate,stats}``.

Tabular output is CSV with floats printed to 17 significant digits. Any
input or domain error exits with status 2 and a single ``error:`` line.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, bbit, minwise
from .core import DEFAULT_UNIVERSE, ValidationError, validate_ground_truth
from .corpus import FORMATS, read_corpus
from .hashing import BBitSketch, HashFamily, MinwiseSketch, compare_bbit, compare_minwise, sketch_minwise, truncate_to_bbit
from .mle import bbit_model, solve_mle
from .sketchfile import read_sketch, write_sketch

ESTIMATORS = ("standard", "mle") + tuple(analysis.BBIT_ESTIMATORS)
ESTIMATE_COLUMNS = ["a_hat", "resemblance", "containment", "se", "estimator", "k", "b",
                    "f1", "f2", "at_boundary"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _universe(text: str) -> int:
    value = int(text, 0)
    if not 1 <= value <= DEFAULT_UNIVERSE:
        raise argparse.ArgumentTypeError(f"universe must be in [1, 2**64], got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _output(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# sketch ----------------------------------------------------------------------

def cmd_sketch(args) -> int:
    records = read_corpus(args.input, args.format, args.universe)
    family = HashFamily(args.seed, args.k, universe=args.universe)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for rec in records:
        sketch = sketch_minwise(rec, family)
        if args.b is not None:
            sketch = truncate_to_bbit(sketch, args.b)
        path = write_sketch(out_dir / f"{rec.id}.mhs", sketch)
        print(path)
    return 0


# estimate --------------------------------------------------------------------

def _estimate_full(s1: MinwiseSketch, s2: MinwiseSketch, estimator: str) -> dict:
    counts = compare_minwise(s1, s2)
    if estimator == "standard":
        res = minwise.estimate_simple(counts, s1.f, s2.f, "eq")
    else:
        res = minwise.estimate_mle3(counts, s1.f, s2.f)
    return {"a_hat": res.a_hat, "se": res.se, "at_boundary": res.at_boundary}


def _estimate_bbit(s1: BBitSketch, s2: BBitSketch, estimator: str, universe: int) -> dict:
    scheme = bbit.GroupingScheme(analysis.BBIT_ESTIMATORS[estimator], s1.b)
    D = float(universe)
    if s1.f > universe or s2.f > universe:
        raise ValidationError(f"set sizes exceed the universe size {universe}")
    table = compare_bbit(s1, s2)
    sol = solve_mle(bbit_model(scheme, s1.f / D, s2.f / D), bbit.grouped_counts(table, scheme))
    return {"a_hat": sol.theta_hat * D, "se": sol.se * D, "at_boundary": sol.at_boundary}


def cmd_estimate(args) -> int:
    s1, s2 = read_sketch(args.a), read_sketch(args.b)
    if type(s1) is not type(s2):
        raise ValidationError("cannot compare a full sketch with a b-bit sketch")
    is_bbit = isinstance(s1, BBitSketch)
    if args.estimator.startswith("bbit-") != is_bbit:
        need = "b-bit" if args.estimator.startswith("bbit-") else "full (64-bit)"
        raise ValidationError(f"estimator {args.estimator!r} needs {need} sketches")
    if is_bbit:
        row = _estimate_bbit(s1, s2, args.estimator, args.universe)
    else:
        row = _estimate_full(s1, s2, args.estimator)
    a_hat = row["a_hat"]
    row.update(
        resemblance=a_hat / (s1.f + s2.f - a_hat),
        containment=a_hat / min(s1.f, s2.f),
        estimator=args.estimator,
        k=s1.k,
        b=s1.b if is_bbit else 0,
        f1=s1.f,
        f2=s2.f,
    )
    analysis.write_csv([row], ESTIMATE_COLUMNS, sys.stdout)
    return 0


# grid ------------------------------------------------------------------------

def _parse_comparison(text: str) -> tuple:
    num, sep, den = text.partition("/")
    if not sep or not num or not den:
        raise ValidationError(f"comparison must look like NUM/DEN, got {text!r}")
    return num.strip(), den.strip()


def cmd_grid(args) -> int:
    comparisons = tuple(_parse_comparison(c) for c in args.compare or ())
    spec = analysis.VarianceGridSpec.with_resolution(args.b, args.r1, args.resolution, comparisons)
    rows = analysis.variance_ratio_grid(spec)
    stream, close = _output(args.out)
    try:
        analysis.write_csv(rows, spec.columns, stream)
    finally:
        if close:
            stream.close()
    return 0


# simulate --------------------------------------------------------------------

def cmd_simulate(args) -> int:
    gt = validate_ground_truth(args.f1, args.f2, args.a)
    spec = analysis.SimulationSpec(
        ground_truth=gt,
        D=args.D,
        k_values=args.k,
        replications=args.reps,
        seed=args.seed,
        estimators=tuple(args.estimators),
        mode=args.mode,
        b=args.bits,
        clamp=args.clamp,
    )
    rows = analysis.run_simulation(spec)
    stream, close = _output(args.out)
    try:
        analysis.write_csv(rows, analysis.SIM_COLUMNS, stream)
    finally:
        if close:
            stream.close()
    return 0


# stats -----------------------------------------------------------------------

_PAIR_CHUNK = 1 << 22


def _exhaustive_ratios(f):
    """All max/min size ratios of unordered pairs, in bounded-size chunks."""
    n = len(f)
    start = 0
    while start < n - 1:
        stop, width = start, 0
        while stop < n - 1 and (width == 0 or width + n - 1 - stop <= _PAIR_CHUNK):
            width += n - 1 - stop
            stop += 1
        i = np.repeat(np.arange(start, stop), n - 1 - np.arange(start, stop))
        j = np.concatenate([np.arange(r + 1, n) for r in range(start, stop)])
        yield np.maximum(f[i], f[j]) / np.minimum(f[i], f[j])
        start = stop


def pair_ratio_stats(sizes, sample=None, seed: int = 0) -> dict:
    """Mean and population std of max(fi, fj) / min(fi, fj) over set pairs.

    With ``sample`` unset every unordered pair is visited; otherwise
    ``sample`` pairs are drawn uniformly with replacement.
    """
    f = np.asarray(sizes, dtype=float)
    n = len(f)
    if n < 2:
        return {"pairs": 0, "pairs_mode": "none", "ratio_mean": math.nan,
                "ratio_std": math.nan, "ratio_se": math.nan}
    if sample is None:
        count = n * (n - 1) // 2
        mean = math.fsum(float(c.sum()) for c in _exhaustive_ratios(f)) / count
        var = math.fsum(float(((c - mean) ** 2).sum()) for c in _exhaustive_ratios(f)) / count
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=sample)
        j = (i + rng.integers(1, n, size=sample)) % n
        r = np.maximum(f[i], f[j]) / np.minimum(f[i], f[j])
        count, mean, var = sample, float(np.mean(r)), float(np.var(r))
        mode = "sampled"
    std = math.sqrt(var)
    return {"pairs": count, "pairs_mode": mode, "ratio_mean": mean,
            "ratio_std": std, "ratio_se": std / math.sqrt(count)}


def size_histogram(sizes) -> list:
    """Counts of set sizes in power-of-two bins [2^j, 2^(j+1))."""
    f = np.asarray(sizes, dtype=np.int64)
    bins = np.floor(np.log2(f)).astype(int)
    out = []
    for j in range(int(bins.min()), int(bins.max()) + 1):
        out.append((f"[{2**j},{2**(j + 1)})", int(np.sum(bins == j))))
    return out


STATS_COLUMNS = ["section", "key", "value"]


def cmd_stats(args) -> int:
    records = read_corpus(args.input, args.format)
    sizes = [r.f for r in records]
    f = np.asarray(sizes, dtype=float)
    rows = [
        ("summary", "n_sets", len(sizes)),
        ("summary", "f_min", int(f.min())),
        ("summary", "f_max", int(f.max())),
        ("summary", "f_mean", float(f.mean())),
        ("summary", "f_std", float(f.std())),
    ]
    for key, value in pair_ratio_stats(sizes, args.pairs_sample, args.seed).items():
        rows.append(("pairs", key, value))
    rows.extend(("histogram", key, count) for key, count in size_histogram(sizes))
    analysis.write_csv([dict(zip(STATS_COLUMNS, r)) for r in rows], STATS_COLUMNS, sys.stdout)
    return 0


# parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minwise-mle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sketch", help="sketch every set of a corpus into <id>.mhs files")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=FORMATS, default="lines")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--b", type=int, default=None, help="store only the lowest b bits (1..64)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--universe", type=_universe, default=DEFAULT_UNIVERSE,
                   help="hash range D (default 2**64)")
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("estimate", help="estimate the intersection of two sketched sets")
    p.add_argument("--a", required=True, help="first sketch file")
    p.add_argument("--b", required=True, help="second sketch file")
    p.add_argument("--estimator", choices=ESTIMATORS, required=True)
    p.add_argument("--universe", type=_universe, default=DEFAULT_UNIVERSE,
                   help="universe size D used by the b-bit models (default 2**64)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("grid", help="variance-ratio grid as CSV")
    p.add_argument("--b", type=int, choices=analysis.GRID_BITS, required=True)
    p.add_argument("--r1", type=float, default=0.5)
    p.add_argument("--compare", action="append", help="NUM/DEN, repeatable (e.g. eq/mle, eq/full)")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("simulate", help="Monte Carlo MSE of estimators on a synthetic pair")
    p.add_argument("--f1", type=int, required=True)
    p.add_argument("--f2", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--k", type=_positive_int, action="append", required=True)
    p.add_argument("--reps", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", nargs="+", default=["mle", "eq"],
                   choices=analysis.MINWISE_ESTIMATORS + tuple(analysis.BBIT_ESTIMATORS))
    p.add_argument("--mode", choices=analysis.SIM_MODES, default="multinomial")
    p.add_argument("--bits", type=int, default=1, help="b for the bbit-* estimators")
    p.add_argument("--clamp", action="store_true", help="clip simple estimators to [0, min(f1, f2)]")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="set-size statistics of a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=FORMATS, default="lines")
    p.add_argument("--pairs-sample", type=_positive_int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError, ValueError) as exc:
        print(f"minwise-mle {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
