import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import multivariate_normal

from pmicopula._kernels import numba_impl, numpy_impl

needs_numba = pytest.mark.skipif(numba_impl is None, reason="numba not installed")
IMPLS = [numpy_impl] + ([numba_impl] if numba_impl is not None else [])


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("r", [-0.95, -0.5, 0.0, 0.3, 0.8, 0.99])
def test_bvn_cdf_against_scipy(impl, r):
    rng = np.random.default_rng(1)
    h, k = rng.uniform(-3, 3, 30), rng.uniform(-3, 3, 30)
    ref = multivariate_normal([0, 0], [[1, r], [r, 1]]).cdf(np.column_stack([h, k]))
    assert np.allclose(impl.bvn_cdf(h, k, r), ref, atol=1e-7)


@needs_numba
def test_backends_agree():
    rng = np.random.default_rng(2)
    m = 500
    h, k = rng.standard_normal(m), rng.standard_normal(m)
    np.testing.assert_allclose(numba_impl.bvn_cdf(h, k, 0.4), numpy_impl.bvn_cdf(h, k, 0.4),
                               rtol=1e-12, atol=1e-15)
    n = 60
    r1, r2 = rng.permutation(n) + 1, rng.permutation(n) + 1
    np.testing.assert_array_equal(numba_impl.count_table(r1, r2, n),
                                  numpy_impl.count_table(r1, r2, n))
    a, c = rng.random(m) * 0.5, rng.random(m) * 0.5
    b, d = a + rng.random(m) * 0.5, c + rng.random(m) * 0.5
    for x, y in zip(numba_impl.v_rect_integrals(a, b, c, d),
                    numpy_impl.v_rect_integrals(a, b, c, d)):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-15)
    nodes = rng.random(m)
    cols = np.floor(n * nodes).astype(np.int64)
    w, fr = rng.random(m), n * nodes - cols
    for x, y in zip(*(np.atleast_1d(impl.weighted_column_sums(cols, w, fr, n + 1))
                      for impl in (numba_impl, numpy_impl))):
        np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-15)


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-8, 8), st.floats(-8, 8)), min_size=1, max_size=20),
       st.floats(-0.999, 0.999))
def test_bvn_backends_agree_property(points, r):
    h, k = np.array(points).T
    np.testing.assert_allclose(numba_impl.bvn_cdf(h, k, r), numpy_impl.bvn_cdf(h, k, r),
                               rtol=1e-12, atol=1e-15)


def _backend_in_subprocess(value):
    env = dict(os.environ, PMICOPULA_BACKEND=value)
    code = ("import json, pmicopula as p; "
            "R = p.ranks(p.sample(p.gaussian(0.5), 50, 0)); "
            "print(json.dumps([p.BACKEND, p.estimate(R, 'V').value, "
            "float(p.gaussian(0.5)(0.3, 0.6))]))")
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                          text=True, check=False)


def test_env_flag_selects_numpy():
    res = _backend_in_subprocess("numpy")
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)[0] == "numpy"


@needs_numba
def test_env_flag_selects_numba_with_same_results():
    a = json.loads(_backend_in_subprocess("numpy").stdout)
    b = json.loads(_backend_in_subprocess("numba").stdout)
    assert b[0] == "numba"
    assert a[1:] == pytest.approx(b[1:], rel=1e-12)


def test_env_flag_rejects_unknown_value():
    res = _backend_in_subprocess("fortran")
    assert res.returncode != 0 and "PMICOPULA_BACKEND" in res.stderr
