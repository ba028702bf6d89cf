"""Hot inner loops, in a numba flavour and a pure-numpy flavour.

The numba kernels are used when numba imports cleanly and the environment
variable ``MONOSENSE_DISABLE_NUMBA`` is unset (or ``0``). Both flavours are
always importable so tests and the benchmark can compare them directly.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_flag = os.environ.get("MONOSENSE_DISABLE_NUMBA", "0").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def fir_filter_numpy(x, h):
    """Causal FIR filter, output truncated to ``len(x)``."""
    return np.convolve(x, h)[: len(x)]


def convolution_matrix_numpy(r, n_taps):
    """``R[n, k] = r[n - k]`` with zero prehistory."""
    n = len(r)
    padded = np.concatenate([np.zeros(n_taps - 1, dtype=r.dtype), r])
    view = np.lib.stride_tricks.sliding_window_view(padded, n_taps)[:n]
    return np.ascontiguousarray(view[:, ::-1])


def lms_gradient_numpy(r, e, n_taps):
    """``sum_n conj(r_vec[n]) * e[n]`` with ``r_vec[n] = [r[n], ..., r[n-N+1]]``."""
    return convolution_matrix_numpy(r, n_taps).conj().T @ e


def sinc_taps_numpy(delays, coeffs, length, half_width):
    out = np.zeros(length, dtype=np.complex128)
    m = np.arange(-half_width, half_width + 1)
    flat = half_width // 2
    for d, a in zip(delays, coeffs):
        c = int(np.floor(d + 0.5))
        k = c + m
        keep = (k >= 0) & (k < length)
        w = _tukey(m[keep], flat, half_width)
        out[k[keep]] += a * np.sinc(k[keep] - d) * w
    return out


def _tukey(m, flat, half_width):
    am = np.abs(m).astype(np.float64)
    w = np.ones_like(am)
    tail = am > flat
    w[tail] = 0.5 * (1.0 + np.cos(np.pi * (am[tail] - flat) / (half_width + 1 - flat)))
    return w


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def fir_filter_numba(x, h):
        n = x.shape[0]
        nh = h.shape[0]
        out = np.zeros(n, dtype=np.complex128)
        for i in range(n):
            acc = 0j
            kmax = min(nh, i + 1)
            for k in range(kmax):
                acc += h[k] * x[i - k]
            out[i] = acc
        return out

    @numba.njit(cache=True)
    def convolution_matrix_numba(r, n_taps):
        n = r.shape[0]
        out = np.zeros((n, n_taps), dtype=np.complex128)
        for i in range(n):
            for k in range(min(n_taps, i + 1)):
                out[i, k] = r[i - k]
        return out

    @numba.njit(cache=True)
    def lms_gradient_numba(r, e, n_taps):
        g = np.zeros(n_taps, dtype=np.complex128)
        n = r.shape[0]
        for i in range(n):
            ei = e[i]
            for k in range(min(n_taps, i + 1)):
                g[k] += np.conj(r[i - k]) * ei
        return g

    @numba.njit(cache=True)
    def sinc_taps_numba(delays, coeffs, length, half_width):
        out = np.zeros(length, dtype=np.complex128)
        flat = half_width // 2
        for p in range(delays.shape[0]):
            d = delays[p]
            c = int(np.floor(d + 0.5))
            for m in range(-half_width, half_width + 1):
                k = c + m
                if k < 0 or k >= length:
                    continue
                am = abs(m)
                if am > flat:
                    w = 0.5 * (1.0 + np.cos(np.pi * (am - flat) / (half_width + 1 - flat)))
                else:
                    w = 1.0
                u = k - d
                if u == 0.0:
                    s = 1.0
                else:
                    s = np.sin(np.pi * u) / (np.pi * u)
                out[k] += coeffs[p] * s * w
        return out


def _pick(name):
    if USE_NUMBA:
        return globals()[name + "_numba"]
    return globals()[name + "_numpy"]


def fir_filter(x, h):
    x = np.ascontiguousarray(x, dtype=np.complex128)
    h = np.ascontiguousarray(h, dtype=np.complex128)
    return _pick("fir_filter")(x, h)


def convolution_matrix(r, n_taps):
    r = np.ascontiguousarray(r, dtype=np.complex128)
    return _pick("convolution_matrix")(r, int(n_taps))


def lms_gradient(r, e, n_taps):
    r = np.ascontiguousarray(r, dtype=np.complex128)
    e = np.ascontiguousarray(e, dtype=np.complex128)
    return _pick("lms_gradient")(r, e, int(n_taps))


def sinc_taps(delays, coeffs, length, half_width=20):
    delays = np.ascontiguousarray(delays, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    return _pick("sinc_taps")(delays, coeffs, int(length), int(half_width))
