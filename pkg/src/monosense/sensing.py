"""CIR estimation from received frames and breathing-rate spectra.

Delay bins are one 20 MS/s sample (50 ns of round-trip delay) apart. Labels
follow the convention of quoting one-way range delay, so bin ``k`` after
zero-bin alignment is reported as ``k * 25`` ns (``k * 7.5`` m).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .iq import ContractError, IqBuffer
from .waveform import CP_LEN, FRAME_LEN, N_FFT, NULLS, OCCUPIED, WifiFrame

BIN_SPACING_S = 50e-9
BIN_LABEL_NS = 25.0


def estimate_cfr(rx_frame: IqBuffer, known: WifiFrame) -> np.ndarray:
    """Per-symbol CFR for the HT-LTF and the 40 data symbols, shape (41, 64).

    Occupied subcarriers hold ``Y_k / X_k``; null subcarriers are zero.
    """
    rx = np.asarray(getattr(rx_frame, "samples", rx_frame))
    if rx.size != FRAME_LEN:
        raise ContractError(f"expected a {FRAME_LEN}-sample frame, got {rx.size}")
    starts = np.asarray(known.symbol_offsets) + CP_LEN
    useful = rx[starts[:, None] + np.arange(N_FFT)]
    Y = np.fft.fft(useful, axis=1)
    H = np.zeros_like(Y)
    H[:, OCCUPIED] = Y[:, OCCUPIED] / known.known_symbols[:, OCCUPIED]
    return H


def cfr_to_cir(cfr) -> np.ndarray:
    """64-point inverse DFT of a CFR (nulls contribute nothing); works row-wise."""
    return np.fft.ifft(np.asarray(cfr, dtype=np.complex128), axis=-1)


def frame_cir(rx_frame: IqBuffer, known: WifiFrame, timestamp_s: float = 0.0):
    """``(timestamp, cir)`` with the CIR averaged over every symbol of the frame."""
    return float(timestamp_s), cfr_to_cir(estimate_cfr(rx_frame, known)).mean(axis=0)


@dataclass(frozen=True)
class CirSeries:
    timestamps: np.ndarray
    bins: np.ndarray  # (n_frames, 64)
    zero_bin_index: int
    bin_spacing_s: float = BIN_SPACING_S

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.float64)
        b = np.asarray(self.bins, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != ts.size:
            raise ContractError("bins must be (n_frames, n_bins) matching timestamps")
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise ContractError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "bins", b)

    @classmethod
    def from_frames(cls, frames, zero_bin_index: Optional[int] = None) -> "CirSeries":
        """Stack ``(timestamp, cir)`` pairs.

        The zero bin is the bin with the highest mean power unless given
        explicitly (e.g. taken from an uncancelled reference capture).
        """
        frames = list(frames)
        if not frames:
            raise ContractError("need at least one frame")
        ts = np.array([f[0] for f in frames])
        bins = np.array([f[1] for f in frames])
        if zero_bin_index is None:
            zero_bin_index = strongest_bin(bins)
        return cls(ts, bins, int(zero_bin_index))

    def bin_series(self, offset: int) -> np.ndarray:
        """Complex time series of the bin ``offset`` bins after the zero bin."""
        return self.bins[:, (self.zero_bin_index + offset) % self.bins.shape[1]]

    @staticmethod
    def label_ns(offset: int) -> float:
        return offset * BIN_LABEL_NS


def strongest_bin(bins) -> int:
    return int(np.argmax(np.mean(np.abs(np.asarray(bins)) ** 2, axis=0)))


def resample_uniform(timestamps, values, rate_hz: float = 10.0):
    """Linear interpolation (I and Q separately) onto a uniform grid.

    The grid starts at the first timestamp and steps ``1/rate_hz`` up to the
    last one. Returns ``(grid, resampled)``.
    """
    ts = np.asarray(timestamps, dtype=np.float64)
    v = np.asarray(values)
    if ts.size == 0:
        raise ContractError("cannot resample an empty series")
    if ts.size < 2 or v.size != ts.size:
        raise ContractError("need at least two timestamped values")
    span = ts[-1] - ts[0]
    mean_rate = (ts.size - 1) / span
    if rate_hz > mean_rate * (1 + 1e-9):
        raise ContractError(f"target rate {rate_hz} Hz exceeds the input rate {mean_rate:.3f} Hz")
    n = int(np.floor(span * rate_hz + 1e-9)) + 1
    grid = ts[0] + np.arange(n) / rate_hz
    if np.iscomplexobj(v):
        out = np.interp(grid, ts, v.real) + 1j * np.interp(grid, ts, v.imag)
    else:
        out = np.interp(grid, ts, v)
    return grid, out


@dataclass(frozen=True)
class SpectrumResult:
    freq_bpm: np.ndarray
    power_db: np.ndarray
    peak_bpm: float
    peak_ratio_db: float
    band_bpm: tuple = (6.0, 20.0)


_FLOOR = 1e-30


def spectrum_bpm(series, rate_hz: float = 10.0, band_bpm=(6.0, 20.0), zero_pad: int = 8) -> SpectrumResult:
    """Hann-windowed, 8x zero-padded power spectrum on a breaths-per-minute axis.

    Complex input folds the +f and -f halves together. ``peak_ratio_db`` is
    the in-band peak over the in-band median.
    """
    x = np.asarray(series)
    if x.size < 64:
        raise ContractError("spectrum needs at least 64 samples")
    lo, hi = float(band_bpm[0]), float(band_bpm[1])
    nyq_bpm = rate_hz / 2 * 60
    if not (0 <= lo < hi <= nyq_bpm):
        raise ContractError(f"band {band_bpm} BPM must lie within [0, {nyq_bpm}] BPM")
    x = (x - x.mean()) * np.hanning(x.size)
    nfft = zero_pad * x.size
    if np.iscomplexobj(x):
        X = np.abs(np.fft.fft(x, nfft)) ** 2
        half = nfft // 2 + 1
        p = X[:half].copy()
        p[1:nfft - half + 1] += X[half:][::-1]
    else:
        p = np.abs(np.fft.rfft(x, nfft)) ** 2
    freq = np.fft.rfftfreq(nfft, 1 / rate_hz) * 60
    p_db = 10 * np.log10(p + _FLOOR)
    band = (freq >= lo) & (freq <= hi)
    idx = np.flatnonzero(band)
    k = idx[np.argmax(p_db[idx])]
    ratio = float(p_db[k] - np.median(p_db[idx]))
    return SpectrumResult(freq, p_db, float(freq[k]), ratio, (lo, hi))


def detect_rate(spec: SpectrumResult, threshold_db: float = 10.0):
    """Peak rate in BPM, or None when the peak does not clear ``threshold_db``."""
    return spec.peak_bpm if spec.peak_ratio_db >= threshold_db else None


def weight_phase_series(history, tap_selector: Union[str, int] = "dominant") -> np.ndarray:
    """Zero-mean, unwrapped phase of one filter tap across weight snapshots.

    ``history`` is an (n_snapshots, n_taps) array or a sequence of objects
    with a ``taps`` attribute. ``"dominant"`` picks the tap with the largest
    mean magnitude.
    """
    W = np.array([getattr(h, "taps", h) for h in history], dtype=np.complex128)
    if W.ndim != 2 or W.shape[0] == 0:
        raise ContractError("history must be a non-empty list of tap vectors")
    k = int(np.argmax(np.mean(np.abs(W), axis=0))) if tap_selector == "dominant" else int(tap_selector)
    w = W[:, k]
    if np.any(w == 0):
        raise ContractError(f"tap {k} has zero magnitude; its phase is undefined")
    ph = np.unwrap(np.angle(w))
    return ph - ph.mean()


# --------------------------------------------------------------------------
# CSV artifacts
# --------------------------------------------------------------------------

def write_cir_csv(path, series: CirSeries, offsets: Sequence[int] = range(9)) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_s", "bin_ns", "re", "im", "magnitude"])
        cols = {o: series.bin_series(o) for o in offsets}
        for i, t in enumerate(series.timestamps):
            for o in offsets:
                v = cols[o][i]
                w.writerow([f"{t:.6f}", f"{CirSeries.label_ns(o):g}", f"{v.real:.9e}", f"{v.imag:.9e}", f"{abs(v):.9e}"])


def write_spectrum_csv(path, spec: SpectrumResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_bpm", "power_db"])
        for f, p in zip(spec.freq_bpm, spec.power_db):
            w.writerow([f"{f:.6f}", f"{p:.6f}"])
