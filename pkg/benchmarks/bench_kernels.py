"""Time the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from gwbary import kernels
from gwbary.transport import extended_problem


def _transport_case(rng, n):
    m1 = rng.uniform(0, 2, n)
    m2 = rng.uniform(0, 2, n)
    pts1, pts2 = rng.normal(size=(n, 2)), rng.normal(size=(n, 2))
    cost = ((pts1[:, None] - pts2[None]) ** 2).sum(-1)
    return extended_problem(m1, m2, cost, 1.0)


def _lattice_case(rng, n, units):
    w = rng.uniform(-2, 2, (n, n))
    return w, rng.integers(0, units + 1, n), rng.integers(0, units + 1, n)


def _best_time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    cases = [("transport_simplex", f"{n}x{n}", _transport_case(rng, n)) for n in (10, 30, 60)]
    cases += [("lattice_min_cost", f"{n}x{n} units<={u}", _lattice_case(rng, n, u))
              for n, u in ((2, 16), (3, 8), (3, 12))]
    print(f"{'kernel':<18} {'case':<18}" + "".join(f"{b:>12}" for b in backends) + "   speedup")
    for name, label, case in cases:
        times, outs = [], []
        for b in backends:
            t, out = _best_time(getattr(kernels.get_backend(b), name), case, args.repeat)
            times.append(t)
            outs.append(out)
        if len(outs) == 2:
            first, second = (outs[0][0], outs[1][0]) if name == "transport_simplex" else outs
            assert np.array_equal(first, second), "backends disagree"
        speed = f"{times[-1] / times[0]:9.1f}x" if len(times) == 2 else ""
        print(f"{name:<18} {label:<18}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + speed)


if __name__ == "__main__":
    main()
