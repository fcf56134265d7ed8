"""Compare the compiled Monte-Carlo kernel with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--trials N] [--repeat R]

Both backends get identical inputs; their counts are checked for equality
before timings are reported.
"""

import argparse
import timeit

from pruneprice import _kernels_py
from pruneprice.audit import _kernel_args
from pruneprice.model import Instance, random_suite
from pruneprice.pruning import prune

try:
    from pruneprice import _kernels as compiled
except ImportError:
    compiled = None


def workloads():
    d2 = Instance.build(1, [1, 1, 1, 1], ["1/2"] * 4)
    out = [("d2", d2)]
    for inst in random_suite(200, 7, n_min=8, n_max=12):
        p = prune(inst.values, inst.costs, inst.budget)
        if len(p.rest) >= 4:
            out.append((f"random n={len(inst)} kept={len(p.kept)}", inst))
            break
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback can run")
    print(f"{'workload':32} {'backend':8} {'best s':>9} {'trials/s':>12}")
    for name, inst in workloads():
        p = prune(inst.values, inst.costs, inst.budget)
        ids, kargs = _kernel_args(p, inst.costs, inst.budget)
        vals = [float(p.values[i]) for i in ids]
        backends = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
        results = {}
        for label, mod in backends:
            call = lambda mod=mod: mod.mc_accept_counts(42, args.trials, *kargs, vals)
            results[label] = call()[0]
            best = min(timeit.repeat(call, number=1, repeat=args.repeat))
            print(f"{name:32} {label:8} {best:9.4f} {args.trials / best:12,.0f}")
        assert len({tuple(c) for c in results.values()}) == 1, "backends disagree"


if __name__ == "__main__":
    main()
