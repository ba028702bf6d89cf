import numpy as np
import pytest

from monosense.iq import ContractError, IqBuffer, read_msiq, write_msiq


def test_buffer_rejects_bad_input():
    with pytest.raises(ContractError):
        IqBuffer(np.zeros(0, complex))
    with pytest.raises(ContractError):
        IqBuffer(np.array([1.0, np.nan]))
    with pytest.raises(ContractError):
        IqBuffer(np.ones(4), sample_rate_hz=0)


def test_buffer_is_read_only():
    b = IqBuffer(np.ones(4, complex))
    with pytest.raises(ValueError):
        b.samples[0] = 2


def test_power():
    assert IqBuffer(np.full(10, 2j)).power == pytest.approx(4.0)


def test_msiq_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    x = IqBuffer(rng.standard_normal(100) + 1j * rng.standard_normal(100), 20e6)
    p = tmp_path / "x.msiq"
    write_msiq(p, x)
    y = read_msiq(p)
    assert y.sample_rate_hz == 20e6
    # float32 storage
    np.testing.assert_allclose(y.samples, x.samples, rtol=1e-6, atol=1e-6)


def test_msiq_rejects_wrong_magic(tmp_path):
    p = tmp_path / "bad.msiq"
    p.write_bytes(b"XXXX" + bytes(40))
    with pytest.raises(ValueError):
        read_msiq(p)


def test_msiq_rejects_truncated_payload(tmp_path):
    p = tmp_path / "t.msiq"
    write_msiq(p, IqBuffer(np.ones(10, complex)))
    p.write_bytes(p.read_bytes()[:-8])
    with pytest.raises(ValueError):
        read_msiq(p)
