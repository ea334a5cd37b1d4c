import math
import os
import subprocess
import sys

import numpy as np
import pytest

from cppolab import _pycore
from cppolab.estep import random_problem

try:
    from cppolab import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


@needs_core
def test_gae_backends_agree_exactly():
    rng = np.random.default_rng(0)
    n = 5000
    r, v = rng.standard_normal(n), rng.standard_normal(n + 1)
    d = (rng.random(n) < 0.05).astype(float)
    assert np.array_equal(_core.gae(r, v, d, 0.99, 0.95), _pycore.gae(r, v, d, 0.99, 0.95))


@needs_core
@pytest.mark.parametrize("lower", [-0.99, -math.inf])
def test_barrier_backends_agree(lower):
    rng = np.random.default_rng(1)
    done = 0
    while done < 10:
        p = random_problem(rng)
        if p.B <= 0:
            continue
        args = (p.A, p.A_c, p.B, p.R, lower, np.zeros(p.n), 1e-12, 5000)
        v0, s0, g0 = _pycore.barrier(*args)
        v1, s1, g1 = _core.barrier(*args)
        assert np.abs(np.asarray(v0) - np.asarray(v1)).max() < 1e-9 * p.R
        assert s0 == s1
        done += 1


def test_barrier_finds_circle_maximum():
    c = np.array([1.0, -1.0, 0.0])
    v, _, gap = _pycore.barrier(c, np.zeros(3), math.inf, 2.0, -math.inf, np.zeros(3), 1e-12, 5000)
    assert np.allclose(v, 2.0 * c / np.linalg.norm(c), atol=1e-9)
    assert gap <= 1e-11


def test_pure_python_switch():
    code = "import cppolab.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, CPPOLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
