import numpy as np
import pytest

from rrl import _kernels
from rrl._kernels import _pykernels as py

try:
    from rrl._kernels import _ckernels as ck
except ImportError:  # pragma: no cover
    ck = None

needs_c = pytest.mark.skipif(ck is None, reason="compiled kernels not built")


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")
    if ck is not None:
        assert _kernels.BACKEND == "cython" or _kernels.quad_ascent is py.quad_ascent


@needs_c
def test_interval_tables():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 40))
        P = rng.standard_normal(n + 1).cumsum()
        for a, b in zip(py.interval_tables(P), ck.interval_tables(P)):
            assert np.allclose(a, b)


@needs_c
def test_project_two_balls():
    rng = np.random.default_rng(1)
    for _ in range(200):
        d = int(rng.integers(1, 8))
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        z = rng.standard_normal(d) * 2
        r = float(rng.uniform(0.05, 1.5))
        a, b = py.project_two_balls(z, u, r), ck.project_two_balls(z, u, r)
        assert np.allclose(a, b, atol=1e-10)
        assert np.linalg.norm(a) <= 1 + 1e-9 and np.linalg.norm(a - u) <= r + 1e-9


@needs_c
def test_quad_ascent():
    rng = np.random.default_rng(2)
    for _ in range(30):
        d = int(rng.integers(1, 6))
        B = rng.standard_normal((d, d))
        A = B @ B.T
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        starts = np.vstack([u, u + 0.1 * rng.standard_normal((4, d))])
        va, wa = py.quad_ascent(A, u, 0.5, starts, 50)
        vb, wb = ck.quad_ascent(A, u, 0.5, starts, 50)
        assert va == pytest.approx(vb, rel=1e-8)
        assert np.allclose(wa, wb, atol=1e-8)


@needs_c
def test_hinge():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n, d = int(rng.integers(1, 60)), int(rng.integers(1, 5))
        X = rng.standard_normal((n, d))
        y = rng.choice([-1.0, 1.0], n)
        p = rng.random(n)
        p /= p.sum()
        w = rng.standard_normal(d)
        w /= np.linalg.norm(w)
        assert py.hinge_loss(X, y, p, w, 0.7) == pytest.approx(ck.hinge_loss(X, y, p, w, 0.7), rel=1e-12)
        a = py.hinge_descent(X, y, p, w, 0.4, 0.7, 200)
        b = ck.hinge_descent(X, y, p, w, 0.4, 0.7, 200)
        assert np.allclose(a[0], b[0], atol=1e-7)
        assert a[1] == pytest.approx(b[1], abs=1e-9) and a[2] == pytest.approx(b[2], abs=1e-9)


def test_pure_python_switch():
    import os
    import subprocess
    import sys

    env = dict(os.environ, RRL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from rrl import _kernels; print(_kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
