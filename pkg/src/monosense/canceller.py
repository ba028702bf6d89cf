"""Auxiliary-TX-path cancellation filter: LS fit, LMS adaptation, 16-bit weights, SIC metric."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .channel import RfChainSpec, input_referred, simulate_capture
from .iq import ContractError, IqBuffer
from .waveform import HT_LTF, WifiFrame

N_TAPS = 20
WEIGHT_BITS = 16
WEIGHT_FRAC_BITS = WEIGHT_BITS - 1
_LSB = 2.0 ** -WEIGHT_FRAC_BITS
_QMAX = (2 ** WEIGHT_FRAC_BITS - 1) * _LSB


class WeightOverflowError(OverflowError):
    """A weight component does not fit the Q1.15 grid."""


class SolverError(np.linalg.LinAlgError):
    """The LS normal matrix could not be factored."""


@dataclass(frozen=True)
class FilterTaps:
    """Cancellation filter ``h_filt``.

    When ``quantized`` is set every real and imaginary component lies on the
    Q1.15 grid (16-bit two's complement, 15 fractional bits). ``raw`` keeps the
    value before the most recent rounding, if any.
    """

    taps: np.ndarray
    quantized: bool = False
    raw: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        t = np.array(self.taps, dtype=np.complex128).reshape(-1)
        t.setflags(write=False)
        object.__setattr__(self, "taps", t)

    @property
    def n_taps(self) -> int:
        return self.taps.size

    @classmethod
    def zeros(cls, n_taps: int = N_TAPS, quantized: bool = False) -> "FilterTaps":
        return cls(np.zeros(n_taps, dtype=np.complex128), quantized)


def quantize_weights(taps: FilterTaps) -> FilterTaps:
    """Round each component to the nearest 2**-15 step (ties to even).

    Components must satisfy ``|c| < 1``; a value that rounds up to 1.0
    saturates at ``1 - 2**-15``.
    """
    t = taps.taps
    comps = np.concatenate([t.real, t.imag])
    if np.any(np.abs(comps) >= 1.0):
        raise WeightOverflowError("weight component magnitude must be < 1 for Q1.15")
    q = lambda v: np.clip(np.round(v / _LSB) * _LSB, -1.0, _QMAX)
    return FilterTaps(q(t.real) + 1j * q(t.imag), True, raw=np.array(t))


@dataclass(frozen=True)
class SicReport:
    sic_db: float
    power_before_dbfs: float
    power_after_dbfs: float
    window_samples: int
    infinite: bool = False


def _dbfs(p):
    return 10 * np.log10(p) if p > 0 else -np.inf


def compute_sic(before: IqBuffer, after: IqBuffer) -> SicReport:
    """SIC in dB between two captures: ``10 log10(P_before / P_after)``.

    Zero residual power gives ``sic_db = inf`` with ``infinite`` set.
    """
    pb, pa = before.power, after.power
    b_db, a_db = _dbfs(pb), _dbfs(pa)
    if pa == 0:
        return SicReport(np.inf, b_db, a_db, len(after), True)
    return SicReport(b_db - a_db, b_db, a_db, len(after))


def fit_ls(x: IqBuffer, r0: IqBuffer, r1: IqBuffer, n_taps: int = N_TAPS, ridge: float = 1e-9) -> FilterTaps:
    """Least-squares cancellation filter minimizing ``||r0 + R h||^2``.

    ``R`` is the convolution matrix of the measured cancellation-path response
    ``r1``, so the fit sees the auxiliary path exactly as the filter output
    will. The Tikhonov term is ``ridge * trace(R^H R) / n_taps``.
    """
    a0, a1 = np.asarray(r0.samples), np.asarray(r1.samples)
    if a0.size != a1.size:
        raise ContractError("r0 and r1 must cover the same samples")
    if len(x) < a0.size:
        raise ContractError("x must cover the training window")
    if a0.size < n_taps + 64:
        raise ContractError(f"need at least n_taps + 64 = {n_taps + 64} samples, got {a0.size}")
    R = _kernels.convolution_matrix(a1, n_taps)
    A = R.conj().T @ R
    b = -(R.conj().T @ a0)
    if ridge > 0:
        A = A + ridge * np.real(np.trace(A)) / n_taps * np.eye(n_taps)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"LS normal matrix is not positive definite: {exc}") from exc
    y = np.linalg.solve(L, b)
    h = np.linalg.solve(L.conj().T, y)
    return FilterTaps(h)


def lms_step(taps: FilterTaps, r1_block, residual, mu: float) -> FilterTaps:
    """One block of LMS updates ``h <- h - mu * conj(r1_vec[n]) * e[n]``.

    ``residual`` is the measured r_canc over the block, so every e[n] was
    produced by the taps at block start and the per-sample updates add up.
    Regressor vectors reaching before the block start see zeros.
    """
    r1 = np.asarray(getattr(r1_block, "samples", r1_block), dtype=np.complex128)
    e = np.asarray(getattr(residual, "samples", residual), dtype=np.complex128)
    if r1.size != e.size:
        raise ContractError("regressor block and residual block must have equal length")
    g = _kernels.lms_gradient(r1, e, taps.n_taps)
    new = FilterTaps(taps.taps - mu * g)
    if taps.quantized:
        return quantize_weights(new)
    return new


@dataclass(frozen=True)
class LmsConfig:
    mu: Optional[float] = None  # None: 0.2 / (N * mean|r1|^2) over the training block
    step_samples: int = 80
    max_steps: int = 100
    r1_refresh_period_steps: Union[int, str] = "never"
    mu_scale: float = 0.2

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0:
            raise ContractError("mu must be > 0")
        if self.r1_refresh_period_steps != "never" and int(self.r1_refresh_period_steps) < 1:
            raise ContractError("r1_refresh_period_steps must be >= 1 or 'never'")


@dataclass(frozen=True)
class LmsRecord:
    step: int
    time_s: float
    taps: FilterTaps
    sic: SicReport


def capture_seed(seed: int, index: int, stream: int) -> int:
    """Independent, reproducible noise seed for one capture."""
    return int(np.random.SeedSequence([int(seed), int(index), int(stream)]).generate_state(1)[0])


# noise streams
STREAM_R0, STREAM_R1, STREAM_CANC = 0, 1, 2


def _window(frame: WifiFrame, buf: IqBuffer, step_samples: int) -> IqBuffer:
    start, length = frame.field(HT_LTF)
    n = max(step_samples, length)
    return buf.with_samples(buf.samples[start:start + n])


def run_lms(frame: WifiFrame, spec: RfChainSpec, init: FilterTaps, cfg: LmsConfig,
            schedule: Optional[Sequence[float]] = None, seed: int = 0) -> list:
    """Adapt ``init`` with one LMS step per HT-LTF block.

    ``schedule`` gives the simulation time of each step (default: all steps at
    t = 0). r1 is measured once at the first step and only re-measured every
    ``cfg.r1_refresh_period_steps`` steps. Each record holds the taps used for
    that step's capture and the SIC they achieved over the training block.
    """
    if init.n_taps > cfg.step_samples:
        raise ContractError("step_samples must be >= n_taps")
    if schedule is None:
        schedule = [0.0] * cfg.max_steps
    schedule = list(schedule)[: cfg.max_steps]

    def block(buf):
        return _window(frame, input_referred(buf, spec), cfg.step_samples)

    t0 = schedule[0] if schedule else 0.0
    r0_ref = block(simulate_capture(frame, spec, None, "antenna_only", t0, capture_seed(seed, 0, STREAM_R0)))
    r1 = block(simulate_capture(frame, spec, None, "canc_only", t0, capture_seed(seed, 0, STREAM_R1)))
    mu = cfg.mu if cfg.mu is not None else cfg.mu_scale / (init.n_taps * r1.power)
    refresh = cfg.r1_refresh_period_steps

    taps = init
    history = []
    for k, t in enumerate(schedule):
        if refresh != "never" and k > 0 and k % int(refresh) == 0:
            r1 = block(simulate_capture(frame, spec, None, "canc_only", t, capture_seed(seed, k, STREAM_R1)))
        e = block(simulate_capture(frame, spec, taps, "both", t, capture_seed(seed, k, STREAM_CANC)))
        history.append(LmsRecord(k, float(t), taps, compute_sic(r0_ref, e)))
        taps = lms_step(taps, r1, e, mu)
    return history
