"""Time the compiled kernels against the numpy reference.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from rrl._kernels import _pykernels

try:
    from rrl._kernels import _ckernels
except ImportError:  # pragma: no cover - extension not built
    _ckernels = None


def _cases(rng):
    P = np.cumsum(rng.integers(-1, 2, size=20001)).astype(np.float64)
    A = rng.standard_normal((5, 5))
    A = A @ A.T
    u = np.eye(5)[0]
    starts = np.vstack([u, rng.standard_normal((16, 5)) * 0.3 + u])
    X = rng.standard_normal((2000, 5))
    ypm = np.sign(X[:, 0] + 1e-12)
    p = np.full(2000, 1.0 / 2000)
    z = rng.standard_normal(5)
    return {
        "interval_tables(n=20001)": lambda k: k.interval_tables(P),
        "project_two_balls(d=5)": lambda k: k.project_two_balls(z, u, 0.5),
        "quad_ascent(d=5, 17 starts)": lambda k: k.quad_ascent(A, u, 0.5, starts, 100),
        "hinge_loss(n=2000, d=5)": lambda k: k.hinge_loss(X, ypm, p, u, 0.5),
        "hinge_descent(n=2000, d=5, 300 it)": lambda k: k.hinge_descent(X, ypm, p, u, 0.5, 0.5, 300),
    }


def run(repeat: int = 5) -> list[dict]:
    rng = np.random.default_rng(0)
    rows = []
    for name, fn in _cases(rng).items():
        number = 1
        py = min(timeit.repeat(lambda: fn(_pykernels), number=number, repeat=repeat))
        row = {"kernel": name, "python_s": py}
        if _ckernels is not None:
            cy = min(timeit.repeat(lambda: fn(_ckernels), number=number, repeat=repeat))
            row.update(cython_s=cy, speedup=py / cy if cy > 0 else float("inf"))
        rows.append(row)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args()
    rows = run(args.repeat)
    print(f"{'kernel':38s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for r in rows:
        cy = f"{r['cython_s']:10.5f}" if "cython_s" in r else f"{'n/a':>10s}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'':>8s}"
        print(f"{r['kernel']:38s} {r['python_s']:10.5f} {cy} {sp}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=2)


if __name__ == "__main__":
    main()
