"""Complex baseband buffers and the MSIQ capture file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SAMPLE_RATE_HZ = 20e6

MSIQ_MAGIC = b"MSIQ"
MSIQ_VERSION = 1
# magic, version u32, sample_rate f64, sample_count u64
_HEADER = struct.Struct("<4sIdQ")


class ContractError(ValueError):
    """An operation was called with arguments that violate its contract."""


@dataclass(frozen=True)
class IqBuffer:
    samples: np.ndarray
    sample_rate_hz: float = SAMPLE_RATE_HZ

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if s.ndim != 1:
            raise ContractError("IqBuffer samples must be one-dimensional")
        if s.size == 0:
            raise ContractError("IqBuffer must not be empty")
        if not np.all(np.isfinite(s)):
            raise ContractError("IqBuffer samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ContractError("sample_rate_hz must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    @property
    def power(self) -> float:
        """Mean sample power."""
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples) -> "IqBuffer":
        return IqBuffer(samples, self.sample_rate_hz)


def write_msiq(path, buf: IqBuffer) -> None:
    """Write ``buf`` as little-endian MSIQ: header then interleaved float32 I/Q."""
    inter = np.empty(2 * len(buf), dtype="<f4")
    inter[0::2] = buf.samples.real
    inter[1::2] = buf.samples.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MSIQ_MAGIC, MSIQ_VERSION, float(buf.sample_rate_hz), len(buf)))
        fh.write(inter.tobytes())


def read_msiq(path) -> IqBuffer:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated MSIQ header")
    magic, version, rate, count = _HEADER.unpack_from(data)
    if magic != MSIQ_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != MSIQ_VERSION:
        raise ValueError(f"{path}: unsupported MSIQ version {version}")
    body = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    if body.size != 2 * count:
        raise ValueError(f"{path}: expected {count} samples, found {body.size // 2}")
    return IqBuffer(body[0::2].astype(np.float64) + 1j * body[1::2].astype(np.float64), rate)
