"""
Command-line tour
=================

Runs each ``minwise-mle`` subcommand in-process on a small generated corpus.
The same commands work from a shell, for example
``minwise-mle grid --b 0 --compare eq/mle --resolution 5``.
"""
import sys
import tempfile
from pathlib import Path

from minwise_mle.cli import main

work = Path(tempfile.mkdtemp())
corpus = work / "corpus.txt"
corpus.write_text(
    "A: " + " ".join(map(str, range(0, 3000))) + "\n"
    "B: " + " ".join(map(str, range(1000, 5000))) + "\n"
    "C: " + " ".join(map(str, range(4000, 4100))) + "\n"
)


def run(*argv):
    print("$ minwise-mle", " ".join(map(str, argv)), flush=True)
    code = main([str(a) for a in argv])
    sys.stdout.flush()
    print(f"(exit {code})\n", flush=True)


run("stats", "--input", corpus)
run("sketch", "--input", corpus, "--k", 1024, "--seed", 5, "--out-dir", work / "full")
run("estimate", "--a", work / "full" / "A.mhs", "--b", work / "full" / "B.mhs", "--estimator", "mle")
run("sketch", "--input", corpus, "--k", 1024, "--seed", 5, "--b", 2, "--universe", 10**7, "--out-dir", work / "b2")
run("estimate", "--a", work / "b2" / "A.mhs", "--b", work / "b2" / "B.mhs", "--estimator", "bbit-full",
    "--universe", 10**7)
run("grid", "--b", 0, "--compare", "eq/mle", "--resolution", 3)
run("simulate", "--f1", 600, "--f2", 100, "--a", 90, "--D", 10000, "--k", 200, "--reps", 500,
    "--estimators", "mle", "eq")
# mixing a full sketch with a b-bit sketch is an input error: one line on stderr, exit status 2
run("estimate", "--a", work / "full" / "A.mhs", "--b", work / "b2" / "B.mhs", "--estimator", "mle")
