import numpy as np
import pytest

from monosense.iq import ContractError
from monosense.waveform import (
    CP_LEN, FIELD_LAYOUT, FRAME_LEN, HT_LTF, LTF_FREQ, N_FFT, NULLS, OCCUPIED, build_frame, extract_field,
    ofdm_modulate,
)


def test_frame_length_and_power(frame):
    assert len(frame.iq) == FRAME_LEN == 3920
    assert frame.iq.power == pytest.approx(1.0, abs=1e-6)


def test_same_seed_identical_samples():
    a, b = build_frame(3), build_frame(3)
    assert a.iq.samples.tobytes() == b.iq.samples.tobytes()


def test_layout_sums_to_frame():
    assert sum(n for _, n in FIELD_LAYOUT) == FRAME_LEN


def test_subcarrier_map():
    assert OCCUPIED.size == 52 and NULLS.size == 12
    assert 0 in NULLS and 32 in NULLS
    assert set(OCCUPIED) | set(NULLS) == set(range(64))


def test_field_lengths(frame):
    assert len(extract_field(frame, "HT-LTF")) == 80
    assert len(extract_field(frame, "L-STF")) == 160
    with pytest.raises(KeyError):
        extract_field(frame, "VHT-LTF")


def test_fields_partition_the_frame(frame):
    joined = np.concatenate([extract_field(frame, n).samples for n, _ in FIELD_LAYOUT])
    assert np.array_equal(joined, frame.iq.samples)


def test_zero_subcarriers_give_zero_symbol():
    out = ofdm_modulate(np.zeros(64))
    assert len(out) == 80 and not np.any(out.samples)


def test_single_subcarrier_is_complex_exponential():
    k = 5
    s = np.zeros(64, complex)
    s[k] = 1.0
    out = ofdm_modulate(s).samples
    n = np.arange(64)
    np.testing.assert_allclose(out[CP_LEN:], np.exp(2j * np.pi * k * n / 64) / 64, atol=1e-15)
    np.testing.assert_array_equal(out[:CP_LEN], out[-CP_LEN:])


def test_wrong_length_is_contract_error():
    with pytest.raises(ContractError):
        ofdm_modulate(np.ones(63))


def test_modulate_round_trip():
    rng = np.random.default_rng(0)
    s = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    back = np.fft.fft(ofdm_modulate(s).samples[CP_LEN:])
    assert np.max(np.abs(back - s)) / np.max(np.abs(s)) < 1e-9


def test_training_fields_are_seed_independent():
    a, b = build_frame(1), build_frame(2)
    for name in ("L-STF", "L-LTF", "L-SIG", "HT-SIG", "HT-STF", "HT-LTF"):
        assert np.allclose(extract_field(a, name).samples, extract_field(b, name).samples, atol=1e-12), name
    assert not np.allclose(extract_field(a, "DATA0").samples, extract_field(b, "DATA0").samples)


def test_known_symbols_match_transmitted(frame):
    # FFT of each transmitted useful part reproduces the stored known symbols
    starts = frame.symbol_offsets + CP_LEN
    Y = np.fft.fft(frame.iq.samples[starts[:, None] + np.arange(N_FFT)], axis=1)
    np.testing.assert_allclose(Y, frame.known_symbols, atol=1e-12)
    assert frame.symbol_offsets[0] == frame.field(HT_LTF)[0]
    # HT-LTF carries the 802.11 LTF sequence
    np.testing.assert_allclose(frame.known_symbols[0] / frame.known_symbols[0][OCCUPIED[0]] * LTF_FREQ[OCCUPIED[0]],
                               LTF_FREQ, atol=1e-12)


def test_data_symbols_are_qpsk(frame):
    d = frame.known_symbols[1:, OCCUPIED]
    mags = np.abs(d)
    assert np.allclose(mags, mags[0, 0])
    ang = np.angle(d) % (np.pi / 2)
    assert np.allclose(ang, np.pi / 4)
