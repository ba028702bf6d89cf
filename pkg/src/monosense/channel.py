"""Two-path RF chain simulator: antenna path, auxiliary cancellation path, receiver.

Signals are complex baseband at ``B = 20 MHz``. The antenna path applies
``delay -> tx0 -> ch0 -> rx`` and the cancellation path applies
``h_filt -> tx1 -> ch1 -> rx``; the receiver adds AWGN, applies the RX gain
and digitizes with a clipping mid-rise ADC.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .iq import SAMPLE_RATE_HZ, ContractError, IqBuffer

SPEED_OF_LIGHT = 299_792_458.0
CARRIER_HZ = 2.472e9
SINC_HALF_WIDTH = 20  # 41-tap window

SI, STATIC, DYNAMIC = "SI", "static", "dynamic"
PATH_CLASSES = (SI, STATIC, DYNAMIC)
MODES = ("antenna_only", "canc_only", "both")


@dataclass(frozen=True)
class TargetTrajectory:
    """Breathing-like reflector: sinusoidal round-trip delay around ``base_delay_s``."""

    base_delay_s: float
    displacement_m: float
    rate_bpm: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not self.rate_bpm > 0:
            raise ContractError("rate_bpm must be > 0")
        if self.displacement_m < 0:
            raise ContractError("displacement_m must be >= 0")
        if self.base_delay_s < 0:
            raise ContractError("base_delay_s must be >= 0")


def breathing_delay(traj: TargetTrajectory, t: float) -> float:
    """Round-trip delay of the target at time ``t``.

    The peak deviation is ``2 * displacement_m / c``, since a monostatic echo
    sees twice the physical displacement.
    """
    swing = 2.0 * traj.displacement_m / SPEED_OF_LIGHT
    return traj.base_delay_s + swing * np.sin(2 * np.pi * traj.rate_bpm / 60.0 * t + traj.phase_rad)


@dataclass(frozen=True)
class PathSpec:
    gain: complex
    delay: Union[float, TargetTrajectory]
    kind: str = STATIC

    def __post_init__(self):
        if self.kind not in PATH_CLASSES:
            raise ContractError(f"path class must be one of {PATH_CLASSES}, got {self.kind!r}")
        moving = isinstance(self.delay, TargetTrajectory)
        if moving != (self.kind == DYNAMIC):
            raise ContractError("a path is dynamic exactly when its delay is a trajectory")
        if not moving and self.delay < 0:
            raise ContractError("path delay must be >= 0")

    def delay_at(self, t: float) -> float:
        if isinstance(self.delay, TargetTrajectory):
            return breathing_delay(self.delay, t)
        return float(self.delay)


@dataclass(frozen=True)
class MultipathChannel:
    paths: tuple
    bandwidth_hz: float = SAMPLE_RATE_HZ
    carrier_hz: float = CARRIER_HZ

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise ContractError("a channel needs at least one path")

    def only(self, kind: str) -> Optional["MultipathChannel"]:
        """Sub-channel with the paths of one class, or None if there are none."""
        sel = [p for p in self.paths if p.kind == kind]
        return replace(self, paths=tuple(sel)) if sel else None

    @property
    def is_static(self) -> bool:
        return all(p.kind != DYNAMIC for p in self.paths)


def sampled_cir(channel: MultipathChannel, t: float = 0.0, length: Optional[int] = None) -> np.ndarray:
    """Sampled CIR ``g[n] = sum_p a_p sinc(n - B tau_p) exp(-j 2 pi f_c tau_p)``.

    Each path's sinc is truncated to 41 taps around its nearest integer
    delay, with a raised-cosine taper on the outer half of the window. Taps
    falling before n = 0 are dropped (the channel is causal).
    """
    if t < 0:
        raise ContractError("t must be >= 0")
    taus = np.array([p.delay_at(t) for p in channel.paths])
    delays = taus * channel.bandwidth_hz
    coeffs = np.array([p.gain for p in channel.paths], dtype=np.complex128)
    coeffs = coeffs * np.exp(-2j * np.pi * channel.carrier_hz * taus)
    if length is None:
        length = int(np.floor(delays.max() + 0.5)) + SINC_HALF_WIDTH + 1
    return _kernels.sinc_taps(delays, coeffs, length, SINC_HALF_WIDTH)


@dataclass(frozen=True)
class RfChainSpec:
    tx0_fir: np.ndarray
    tx1_fir: np.ndarray
    rx_fir: np.ndarray
    delay_cycles: int
    ch0: MultipathChannel
    ch1: MultipathChannel
    noise_power: float = 0.0
    adc_bits: Union[int, str] = 12
    rx_gain_db: float = 0.0
    adc_full_scale: float = 1.0
    # input-referred ADC noise in LSB rms per component; it dithers the quantizer
    adc_noise_lsb: float = 0.5
    tx0_drift_db_per_min: float = 0.0

    def __post_init__(self):
        for name in ("tx0_fir", "tx1_fir", "rx_fir"):
            h = np.atleast_1d(np.asarray(getattr(self, name), dtype=np.complex128))
            if h.size < 1:
                raise ContractError(f"{name} must have at least one tap")
            object.__setattr__(self, name, h)
        if self.delay_cycles < 0:
            raise ContractError("delay_cycles must be >= 0")
        if self.adc_bits != "ideal" and not (isinstance(self.adc_bits, (int, np.integer)) and 8 <= self.adc_bits <= 16):
            raise ContractError("adc_bits must be an integer in 8..16 or 'ideal'")
        if self.noise_power < 0:
            raise ContractError("noise_power must be >= 0")

    @property
    def ideal_adc(self) -> bool:
        return self.adc_bits == "ideal"

    @property
    def is_static(self) -> bool:
        return self.ch0.is_static and self.ch1.is_static and self.tx0_drift_db_per_min == 0


def propagate(x: IqBuffer, taps, fir_chain: Sequence = (), delay_cycles: int = 0) -> IqBuffer:
    """Pass ``x`` through an integer delay, the channel taps and each FIR in ``fir_chain``.

    All stages are composed into one impulse response first; output keeps the
    input length (the convolution tail is dropped).
    """
    h = np.zeros(delay_cycles + 1, dtype=np.complex128)
    h[delay_cycles] = 1.0
    h = np.convolve(h, np.asarray(taps, dtype=np.complex128))
    for f in fir_chain:
        h = np.convolve(h, np.asarray(f, dtype=np.complex128))
    return x.with_samples(_kernels.fir_filter(x.samples, h))


def _tx0_at(spec: RfChainSpec, t: float):
    if spec.tx0_drift_db_per_min == 0:
        return spec.tx0_fir
    return spec.tx0_fir * 10 ** (spec.tx0_drift_db_per_min * t / 60.0 / 20.0)


def antenna_response(spec: RfChainSpec, t: float) -> np.ndarray:
    """Composite impulse response ``delay * tx0 * ch0 * rx`` (r0 = this * x)."""
    h = np.zeros(spec.delay_cycles + 1, dtype=np.complex128)
    h[spec.delay_cycles] = 1.0
    for part in (_tx0_at(spec, t), sampled_cir(spec.ch0, t), spec.rx_fir):
        h = np.convolve(h, part)
    return h


def cancellation_response(spec: RfChainSpec, t: float, h_filt=None) -> np.ndarray:
    """Composite ``[h_filt *] tx1 * ch1 * rx`` (r1 or r_filt = this * x)."""
    h = np.convolve(spec.tx1_fir, sampled_cir(spec.ch1, t))
    h = np.convolve(h, spec.rx_fir)
    if h_filt is not None:
        h = np.convolve(np.asarray(h_filt, dtype=np.complex128), h)
    return h


def clean_capture(frame, spec: RfChainSpec, h_filt, mode: str, t: float) -> np.ndarray:
    """Noiseless, unscaled combiner output for ``mode``."""
    if mode not in MODES:
        raise ContractError(f"mode must be one of {MODES}, got {mode!r}")
    taps = getattr(h_filt, "taps", h_filt)
    if mode == "both" and taps is None:
        raise ContractError("mode='both' requires a cancellation filter")
    if mode == "antenna_only":
        h = antenna_response(spec, t)
    elif mode == "canc_only":
        h = cancellation_response(spec, t, taps)
    else:
        a = antenna_response(spec, t)
        c = cancellation_response(spec, t, taps)
        h = np.zeros(max(a.size, c.size), dtype=np.complex128)
        h[: a.size] += a
        h[: c.size] += c
    x = frame.iq.samples
    return _kernels.fir_filter(x, h)


def receive(clean: np.ndarray, spec: RfChainSpec, seed: int, sample_rate_hz: float = SAMPLE_RATE_HZ) -> IqBuffer:
    """AWGN, RX gain, then ADC (input-referred ADC noise plus quantization/clipping)."""
    rng = np.random.default_rng(seed)
    y = np.array(clean, dtype=np.complex128)
    if spec.noise_power > 0:
        s = np.sqrt(spec.noise_power / 2)
        y += s * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size))
    y *= 10 ** (spec.rx_gain_db / 20)
    buf = IqBuffer(y, sample_rate_hz)
    if spec.ideal_adc:
        return buf
    if spec.adc_noise_lsb > 0:
        s = spec.adc_noise_lsb * 2 * spec.adc_full_scale / 2 ** spec.adc_bits
        buf = buf.with_samples(y + s * (rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)))
    return adc_quantize(buf, spec.adc_bits, spec.adc_full_scale)


def simulate_capture(frame, spec: RfChainSpec, h_filt, mode: str, t: float, seed: int) -> IqBuffer:
    """Received capture of one frame at simulation time ``t``.

    ``antenna_only`` gives r0, ``canc_only`` gives r1 (``h_filt=None``) or
    r_filt, and ``both`` gives r_canc = r0 + r_filt. Samples are in ADC units,
    i.e. after the RX gain; see :func:`input_referred`.
    """
    clean = clean_capture(frame, spec, h_filt, mode, t)
    return receive(clean, spec, seed, frame.iq.sample_rate_hz)


def input_referred(buf: IqBuffer, spec: RfChainSpec) -> IqBuffer:
    """Undo the RX gain so captures taken at different gains compare directly."""
    return buf.with_samples(buf.samples * 10 ** (-spec.rx_gain_db / 20))


def adc_quantize(x: IqBuffer, bits: int, full_scale: float) -> IqBuffer:
    """Clip I and Q to +-full_scale and quantize each to 2**bits mid-rise levels."""
    if bits < 2:
        raise ContractError("bits must be >= 2")
    if not full_scale > 0:
        raise ContractError("full_scale must be > 0")
    step = 2.0 * full_scale / 2 ** bits
    top = 2 ** (bits - 1)

    def q(v):
        idx = np.clip(np.floor(v / step), -top, top - 1)
        return (idx + 0.5) * step

    s = x.samples
    return x.with_samples(q(s.real) + 1j * q(s.imag))


# --------------------------------------------------------------------------
# default component draws
# --------------------------------------------------------------------------

def random_fir(rng: np.random.Generator, length: int = 5, spread=(0.02, 0.08)) -> np.ndarray:
    """Short complex FIR with a unit first tap and weaker trailing taps.

    Trailing magnitudes are drawn from ``spread`` (relative to the first tap),
    which keeps the dominance ratio well above 5 and the response minimum phase.
    """
    h = np.empty(length, dtype=np.complex128)
    h[0] = 1.0
    mags = rng.uniform(*spread, size=length - 1)
    h[1:] = mags * np.exp(2j * np.pi * rng.uniform(size=length - 1))
    return h


def office_paths(rng: np.random.Generator, n_paths: int = 6, max_delay_samples: int = 6,
                 power_db=(-35.0, -20.0), bandwidth_hz: float = SAMPLE_RATE_HZ) -> list:
    """Static scatterers on the sample grid with powers relative to a unit SI path."""
    delays = rng.integers(1, max_delay_samples + 1, size=n_paths) / bandwidth_hz
    amps = 10 ** (rng.uniform(*power_db, size=n_paths) / 20)
    phases = np.exp(2j * np.pi * rng.uniform(size=n_paths))
    return [PathSpec(complex(a * p), float(d), STATIC) for a, p, d in zip(amps, phases, delays)]
