"""Compiled extension vs pure-Python fallback agreement.

Orbit kernels must agree bit-for-bit (identical FP evaluation order);
product kernels are allowed tiny slack for the log/sqrt calls.
"""

import numpy as np
import pytest

from optstate import _kernels_py

compiled = pytest.importorskip("optstate._kernels")


def test_backends_report_identity():
    assert compiled.BACKEND == "compiled"
    assert _kernels_py.BACKEND == "python"


def test_doubling_rational_orbit_identical():
    a = compiled.doubling_rational_orbit(1, 999983, 20000)
    b = _kernels_py.doubling_rational_orbit(1, 999983, 20000)
    assert np.array_equal(a, b)


def test_doubling_float_orbit_identical():
    a = compiled.doubling_float_orbit(0.372, 200)
    b = _kernels_py.doubling_float_orbit(0.372, 200)
    assert np.array_equal(a, b)


def test_rotation_orbit_identical():
    a = compiled.rotation_orbit(0.1, 0.6180339887498949, 5000)
    b = _kernels_py.rotation_orbit(0.1, 0.6180339887498949, 5000)
    assert np.array_equal(a, b)


def test_halving_orbit_identical():
    a = compiled.halving_orbit(0.9, 100)
    b = _kernels_py.halving_orbit(0.9, 100)
    assert np.array_equal(a, b)


def test_may_leonard_orbit_identical():
    x0 = np.array([0.5, 0.3, 0.2])
    a = compiled.may_leonard_orbit(x0, 0.8, 1.9, 0.1, 10, 2000)
    b = _kernels_py.may_leonard_orbit(x0, 0.8, 1.9, 0.1, 10, 2000)
    assert np.array_equal(a, b)


def test_cocycle_products_agree():
    rng = np.random.default_rng(3)
    mats = rng.normal(size=(300, 2, 2))
    cps = np.array([1, 10, 100, 300], dtype=np.int64)
    la, pa, ca = compiled.cocycle_checkpoint_products(mats, cps, 1)
    lb, pb, cb = _kernels_py.cocycle_checkpoint_products(mats, cps, 1)
    assert ca == cb == -1
    np.testing.assert_allclose(la, lb, rtol=1e-13, atol=0)
    np.testing.assert_allclose(pa, pb, rtol=1e-12, atol=1e-15)


def test_window_products_agree():
    rng = np.random.default_rng(4)
    mats = rng.normal(size=(120, 2, 2))
    la, pa = compiled.window_products(mats, 5)
    lb, pb = _kernels_py.window_products(mats, 5)
    assert la.shape == (116,)
    np.testing.assert_allclose(la, lb, rtol=1e-13, atol=0)
    np.testing.assert_allclose(pa, pb, rtol=1e-12, atol=1e-15)


def test_visit_hits_identical():
    rng = np.random.default_rng(5)
    xs = rng.random(5000)
    targets = rng.random(37)
    a = compiled.visit_hits_circle(xs, targets, 0.01)
    b = _kernels_py.visit_hits_circle(xs, targets, 0.01)
    assert np.array_equal(a, b)
    pts = rng.random((2000, 3))
    tg = rng.random((25, 3))
    a = compiled.visit_hits_euclid(pts, tg, 0.2)
    b = _kernels_py.visit_hits_euclid(pts, tg, 0.2)
    assert np.array_equal(a, b)


def test_cocycle_collapse_flagged():
    mats = np.zeros((10, 2, 2))
    cps = np.array([5, 10], dtype=np.int64)
    for impl in (compiled, _kernels_py):
        la, pa, collapsed = impl.cocycle_checkpoint_products(mats, cps, 1)
        assert collapsed == 1
        assert np.all(np.isneginf(la))
