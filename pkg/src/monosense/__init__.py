"""Monostatic Wi-Fi sensing with an adaptive analog self-interference canceller.

Submodules: :mod:`waveform` (802.11n-style frames), :mod:`channel` (RF chain
and multipath), :mod:`canceller` (LS/LMS fitting, fixed-point weights),
:mod:`sensing` (CIR and breathing-rate extraction) and :mod:`scenario`
(config-driven runs behind the ``monosense`` CLI).
"""

from .canceller import FilterTaps, LmsConfig, SicReport, compute_sic, fit_ls, lms_step, quantize_weights, run_lms
from .channel import MultipathChannel, PathSpec, RfChainSpec, TargetTrajectory, simulate_capture
from .iq import ContractError, IqBuffer, read_msiq, write_msiq
from .sensing import CirSeries, detect_rate, spectrum_bpm, weight_phase_series
from .waveform import WifiFrame, build_frame, extract_field

__version__ = "0.1.0"
