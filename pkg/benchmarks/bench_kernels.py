"""Compare the compiled and pure-Python refinement kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Workloads: random full automata (plain Moore splitting), long chains (many
rounds) and truncated gate-world history trees in frontier-wildcard mode.
Times are for the whole call, including the final sufficiency check.  Both
backends must return identical partitions; the script exits non-zero otherwise.
"""
import argparse
import sys
import time

from itskit import kernels
from itskit.core import Labeling, StateRelabeledTS, TransitionSystem
from itskit.history import OBSERVATIONS, build_history_tree, label_tree
from itskit.refinement import WILDCARD, minimal_sufficient_refinement
from itskit.worlds import consistency_machine, random_automaton, random_labeling


def automaton_case(n, k, seed):
    ts = random_automaton(n, k, seed)
    lab = random_labeling(n, 2, seed + 1)
    return f"random n={n} k={k}", StateRelabeledTS(ts, lab), "strict"


def chain_case(n):
    ts = TransitionSystem(n, ["a"], [(s, 0, min(s + 1, n - 1)) for s in range(n)])
    lab = Labeling([1 if s == n - 1 else 0 for s in range(n)])
    return f"chain n={n}", StateRelabeledTS(ts, lab), "strict"


def tree_case(depth):
    tree = build_history_tree([], ["r", "g"], depth=depth, view=OBSERVATIONS)
    srts = tree.labeled(label_tree(consistency_machine(), tree))
    return f"gate tree d={depth} ({tree.n_nodes} nodes)", srts, WILDCARD


def timed(srts, mode, backend, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = minimal_sufficient_refinement(srts, mode, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result.partition


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1

    if args.quick:
        cases = [automaton_case(2_000, 2, 1), chain_case(300), tree_case(10)]
    else:
        cases = [automaton_case(20_000, 2, 1), automaton_case(100_000, 3, 2),
                 chain_case(2_000), tree_case(14), tree_case(16)]

    print(f"{'workload':40} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    ok = True
    for name, srts, mode in cases:
        tp, pp = timed(srts, mode, "python", args.repeat)
        tc, pc = timed(srts, mode, "cython", args.repeat)
        same = pp == pc
        ok &= same
        flag = "" if same else "  MISMATCH"
        print(f"{name:40} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x{flag}")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
