"""Compare the compiled and numpy kernel backends.

Times grid construction, point assignment and per-signal embedding for one
fitted partitioning set and checks that both backends agree exactly.

    python3 benchmarks/bench_kernels.py [--psi 128] [--t 75] [--signals 100] [--length 1024]
"""
import argparse
import sys
import time

import numpy as np

from idkamc import _backend, _grid, isokernel as ik
from idkamc.channel import apply_awgn
from idkamc.constellation import generate_signal


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--psi", type=int, default=ik.DEFAULT_PSI)
    p.add_argument("--t", type=int, default=ik.DEFAULT_T)
    p.add_argument("--signals", type=int, default=100)
    p.add_argument("--length", type=int, default=1024)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if "cython" not in _backend.BACKENDS:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
    rng = np.random.default_rng(args.seed)
    train = apply_awgn(generate_signal("16QAM", 20 * args.length, rng), 15, rng)
    part = ik.fit(train, args.psi, args.t, rng)
    signals = [apply_awgn(generate_signal("16QAM", args.length, rng), 15, rng) for _ in range(args.signals)]
    points = ik.as_points(np.concatenate(signals))

    results = {}
    print(f"psi={args.psi} t={args.t} signals={args.signals} length={args.length}")
    print(f"{'backend':>8} {'build ms':>10} {'assign ms':>10} {'embed ms':>10} {'Mlookup/s':>10}")
    for name in sorted(_backend.BACKENDS):
        kern = _backend.get(name)
        build, index = best_of(lambda: _grid.build_grid(part.centers, part.radii2, backend=name), args.repeat)
        assign, act = best_of(lambda: kern.assign(points, index), args.repeat)
        embed, emb = best_of(lambda: kern.embed(signals, index), args.repeat)
        rate = points.shape[0] * args.t / embed / 1e6
        print(f"{name:>8} {1e3 * build:10.1f} {1e3 * assign:10.1f} {1e3 * embed:10.1f} {rate:10.1f}")
        results[name] = (build, assign, embed, act, emb)

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        same = np.array_equal(py[3], cy[3]) and np.array_equal(py[4], cy[4])
        print(f"speedup (numpy / compiled): build {py[0] / cy[0]:.1f}x, "
              f"assign {py[1] / cy[1]:.1f}x, embed {py[2] / cy[2]:.1f}x")
        print(f"outputs identical: {same}")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
