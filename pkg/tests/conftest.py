import numpy as np
import pytest

from monosense.channel import SI, MultipathChannel, PathSpec, RfChainSpec
from monosense.scenario import DEFAULTS, build_chain
from monosense.waveform import build_frame


@pytest.fixture(scope="session")
def frame():
    return build_frame(0)


def default_cfg(**chain):
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULTS.items()}
    cfg["name"] = "test"
    cfg["chain"].update(chain)
    return cfg


@pytest.fixture(scope="session")
def default_spec(frame):
    """Calibrated default chain: noise 42 dB below SI, 12-bit ADC."""
    return build_chain(default_cfg(), frame)


@pytest.fixture(scope="session")
def clean_spec(frame):
    """Default chain with noise off and an ideal ADC."""
    return build_chain(default_cfg(noise_below_si_db=None, adc_bits="ideal"), frame)


def unit_chain(**kw):
    """Identity FIRs, a unit SI path at zero delay and a unit cable path."""
    ch = MultipathChannel([PathSpec(1.0 + 0j, 0.0, SI)])
    args = dict(tx0_fir=[1.0], tx1_fir=[1.0], rx_fir=[1.0], delay_cycles=0, ch0=ch, ch1=ch, adc_bits="ideal")
    args.update(kw)
    return RfChainSpec(**args)


def cplx(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
