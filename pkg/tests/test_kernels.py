"""Numba and numpy kernels must agree; both are checked against plain loops."""

import numpy as np
import pytest

from monosense import _kernels as K

from conftest import cplx

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def test_fir_filter_numpy_matches_direct_sum():
    rng = np.random.default_rng(0)
    x, h = cplx(rng, 50), cplx(rng, 7)
    ref = np.array([sum(h[k] * x[n - k] for k in range(7) if n - k >= 0) for n in range(50)])
    np.testing.assert_allclose(K.fir_filter_numpy(x, h), ref, atol=1e-12)


def test_convolution_matrix_layout():
    r = np.arange(1, 6).astype(complex)
    R = K.convolution_matrix_numpy(r, 3)
    expected = np.array([[1, 0, 0], [2, 1, 0], [3, 2, 1], [4, 3, 2], [5, 4, 3]], dtype=complex)
    np.testing.assert_array_equal(R, expected)


def test_gradient_is_R_hermitian_times_e():
    rng = np.random.default_rng(1)
    r, e = cplx(rng, 80), cplx(rng, 80)
    R = K.convolution_matrix_numpy(r, 20)
    np.testing.assert_allclose(K.lms_gradient_numpy(r, e, 20), R.conj().T @ e, atol=1e-10)


def test_sinc_taps_integer_delay_is_delta():
    t = K.sinc_taps_numpy(np.array([3.0]), np.array([2.0 + 0j]), 30, 20)
    expected = np.zeros(30, complex)
    expected[3] = 2.0
    np.testing.assert_allclose(t, expected, atol=1e-15)


@needs_numba
@pytest.mark.parametrize("name", ["fir_filter", "convolution_matrix", "lms_gradient", "sinc_taps"])
def test_numba_matches_numpy(name):
    rng = np.random.default_rng(2)
    args = {
        "fir_filter": (cplx(rng, 400), cplx(rng, 30)),
        "convolution_matrix": (cplx(rng, 200), 20),
        "lms_gradient": (cplx(rng, 200), cplx(rng, 200), 20),
        "sinc_taps": (rng.uniform(0, 10, 5), cplx(rng, 5), 40, 20),
    }[name]
    a = getattr(K, name + "_numpy")(*args)
    b = getattr(K, name + "_numba")(*args)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setattr(K, "USE_NUMBA", False)
    assert K._pick("fir_filter") is K.fir_filter_numpy
