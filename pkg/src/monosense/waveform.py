"""20 MHz 802.11n-style OFDM frame used for transmission, training and CIR estimation.

Frame layout (samples at 20 MS/s)::

    L-STF 160 | L-LTF 160 | L-SIG 80 | HT-SIG 160 | HT-STF 80 | HT-LTF 80 | 40 x DATA 80

for 3920 samples in total. Only the data symbols depend on the seed; every other
field is a fixed sequence. Subcarrier arrays are in FFT order (index ``k mod 64``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iq import SAMPLE_RATE_HZ, ContractError, IqBuffer

N_FFT = 64
CP_LEN = 16
SYMBOL_LEN = N_FFT + CP_LEN
N_DATA_SYMBOLS = 40
FRAME_LEN = 3920
HT_LTF = "HT-LTF"

FIELD_LAYOUT = (
    ("L-STF", 160),
    ("L-LTF", 160),
    ("L-SIG", 80),
    ("HT-SIG", 160),
    ("HT-STF", 80),
    ("HT-LTF", 80),
) + tuple((f"DATA{i}", SYMBOL_LEN) for i in range(N_DATA_SYMBOLS))

# occupied subcarriers -26..-1, 1..26
_SUBCARRIERS = np.r_[-26:0, 1:27]
OCCUPIED = np.mod(_SUBCARRIERS, N_FFT)
NULLS = np.setdiff1d(np.arange(N_FFT), OCCUPIED)

# IEEE 802.11 L-LTF, subcarriers -26..26 (DC included as 0)
_LTF_SEQ = np.array([
    1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1,
    0,
    1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1,
], dtype=np.complex128)

# IEEE 802.11 L-STF, subcarriers -26..26, before the sqrt(13/6) scale
_STF_SEQ = np.array([
    0, 0, 1 + 1j, 0, 0, 0, -1 - 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, -1 - 1j, 0, 0, 0,
    -1 - 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 0, 0, 0, 0, -1 - 1j, 0, 0, 0, -1 - 1j, 0, 0, 0,
    1 + 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 1 + 1j, 0, 0, 0, 1 + 1j, 0, 0,
], dtype=np.complex128) * np.sqrt(13 / 6)

# fixed generator for the SIG fields so they never depend on the frame seed
_SIG_SEED = 0x5147


def _to_fft_order(seq53):
    out = np.zeros(N_FFT, dtype=np.complex128)
    out[np.mod(np.arange(-26, 27), N_FFT)] = seq53
    return out


LTF_FREQ = _to_fft_order(_LTF_SEQ)
STF_FREQ = _to_fft_order(_STF_SEQ)


@dataclass(frozen=True)
class WifiFrame:
    """A transmitted frame plus everything a receiver needs to know about it.

    ``known_symbols[i]`` holds the 64 subcarrier values (FFT order, zeros on
    nulls) of the i-th CFR-bearing symbol, i.e. the HT-LTF followed by the
    data symbols; ``symbol_offsets[i]`` is where that symbol (CP included)
    starts in ``iq``. Both are already scaled by the frame normalization, so
    the FFT of a received useful part divided by ``known_symbols`` is the CFR.
    """

    iq: IqBuffer
    field_map: tuple
    known_symbols: np.ndarray
    symbol_offsets: np.ndarray
    seed: int

    def field(self, name):
        for fname, start, length in self.field_map:
            if fname == name:
                return start, length
        raise KeyError(f"unknown frame field {name!r}")


def ofdm_modulate(subcarriers) -> IqBuffer:
    """One OFDM symbol: 64-point IDFT (1/64 scaling) with a 16-sample cyclic prefix.

    With this scaling the forward ``np.fft.fft`` of the useful part returns the
    input subcarriers, and ``sum|useful|**2 == sum|subcarriers|**2 / 64``.
    """
    x = np.asarray(subcarriers, dtype=np.complex128)
    if x.shape != (N_FFT,):
        raise ContractError(f"ofdm_modulate expects {N_FFT} subcarriers, got shape {x.shape}")
    useful = np.fft.ifft(x)
    return IqBuffer(np.concatenate([useful[-CP_LEN:], useful]), SAMPLE_RATE_HZ)


def _qpsk(rng, n):
    bits = rng.integers(0, 2, size=(n, 2))
    return ((1 - 2 * bits[:, 0]) + 1j * (1 - 2 * bits[:, 1])) / np.sqrt(2)


def _on_occupied(values):
    out = np.zeros(N_FFT, dtype=np.complex128)
    out[OCCUPIED] = values
    return out


def build_frame(seed: int) -> WifiFrame:
    """Build the 3920-sample frame; identical seeds give bit-identical frames."""
    sig_rng = np.random.default_rng(_SIG_SEED)
    data_rng = np.random.default_rng(seed)

    stf_useful = np.fft.ifft(STF_FREQ)
    ltf_useful = np.fft.ifft(LTF_FREQ)
    l_sig = _on_occupied(1 - 2 * sig_rng.integers(0, 2, OCCUPIED.size))
    ht_sig = [_on_occupied(1j * (1 - 2 * sig_rng.integers(0, 2, OCCUPIED.size))) for _ in range(2)]
    data = [_on_occupied(_qpsk(data_rng, OCCUPIED.size)) for _ in range(N_DATA_SYMBOLS)]

    preamble = np.concatenate([
        np.tile(stf_useful, 3)[:160],
        np.concatenate([ltf_useful[-32:], ltf_useful, ltf_useful]),
        ofdm_modulate(l_sig).samples,
        ofdm_modulate(ht_sig[0]).samples,
        ofdm_modulate(ht_sig[1]).samples,
        ofdm_modulate(STF_FREQ).samples,
        ofdm_modulate(LTF_FREQ).samples,
    ])
    payload = np.concatenate([ofdm_modulate(d).samples for d in data])

    # Preamble and payload are each scaled to unit power, so the frame has
    # unit power and the training fields do not depend on the data seed.
    pre_scale = 1.0 / np.sqrt(np.mean(np.abs(preamble) ** 2))
    data_scale = 1.0 / np.sqrt(np.mean(np.abs(payload) ** 2))
    iq = np.concatenate([preamble * pre_scale, payload * data_scale])

    field_map = []
    start = 0
    for name, length in FIELD_LAYOUT:
        field_map.append((name, start, length))
        start += length
    assert start == FRAME_LEN == iq.size

    ltf_start = dict((f[0], f[1]) for f in field_map)[HT_LTF]
    offsets = ltf_start + SYMBOL_LEN * np.arange(1 + N_DATA_SYMBOLS)
    known = np.array([LTF_FREQ * pre_scale] + [d * data_scale for d in data])
    known.setflags(write=False)
    offsets.setflags(write=False)
    return WifiFrame(IqBuffer(iq, SAMPLE_RATE_HZ), tuple(field_map), known, offsets, int(seed))


def extract_field(frame: WifiFrame, field_name: str) -> IqBuffer:
    start, length = frame.field(field_name)
    return frame.iq.with_samples(frame.iq.samples[start:start + length])
