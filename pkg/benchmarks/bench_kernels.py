"""Time the compiled and numpy kernel backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]
"""

import argparse
import json
import timeit

import numpy as np

from acw import kernels
from acw.groups import Group


def cases(rng):
    g1 = Group((1 << 16,))
    g3 = Group((32, 32, 32))
    p = rng.dirichlet(np.ones(400))
    q = rng.dirichlet(np.ones(400))
    ip = rng.choice(g1.order, 400, replace=False)
    iq = rng.choice(g1.order, 400, replace=False)
    A = rng.choice(g3.order, 1500, replace=False)
    W = rng.integers(0, 32, size=(4, 3))
    return {
        "conv_direct 400x400 in Z/2^16": lambda impl: kernels.conv_direct(g1, ip, p, iq, q, -1, impl=impl),
        "sumset_mask 1500x1500 in (Z/32)^3": lambda impl: kernels.sumset_mask(g3, A, A, 1, impl=impl),
        "bohr_maxdist rank 4 in (Z/32)^3": lambda impl: kernels.bohr_maxdist(g3, W, 4, impl=impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []
    for name, fn in cases(rng).items():
        row = {"kernel": name}
        for backend, impl in kernels.BACKENDS.items():
            fn(impl)
            row[backend] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    for row in rows:
        parts = [f"{b}={row[b] * 1e3:8.2f} ms" for b in kernels.BACKENDS]
        extra = f"  x{row['speedup']:.1f}" if "speedup" in row else ""
        print(f"{row['kernel']:<38} {'  '.join(parts)}{extra}")


if __name__ == "__main__":
    main()
