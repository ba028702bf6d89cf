"""Scenario configs (YAML) and the end-to-end runners behind the CLI."""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .canceller import (
    N_TAPS, STREAM_CANC, STREAM_R0, STREAM_R1, FilterTaps, LmsConfig, capture_seed,
    compute_sic, fit_ls, quantize_weights, run_lms,
)
from .channel import (
    DYNAMIC, SI, MultipathChannel, PathSpec, RfChainSpec, TargetTrajectory,
    clean_capture, input_referred, office_paths, random_fir, receive,
)
from .iq import SAMPLE_RATE_HZ, IqBuffer, write_msiq
from .sensing import (
    CirSeries, cfr_to_cir, detect_rate, estimate_cfr, frame_cir, resample_uniform,
    spectrum_bpm, strongest_bin, weight_phase_series, write_cir_csv, write_spectrum_csv,
)
from .waveform import FRAME_LEN, build_frame

log = logging.getLogger(__name__)

CANCELLERS = ("off", "ls_fixed", "lms_tracking")
EXPERIMENTS = ("stream", "ls_samples", "lms_convergence", "ls_sic")
OUTPUTS = ("summary", "sic", "weights", "cir_series", "spectrum", "iq", "psd", "ls_sweep", "lms_convergence")
SCENARIO_DIR = Path(__file__).parent / "scenarios"

DEFAULTS = {
    "seed": 0,
    "duration_s": 1.0,
    "frame_rate_hz": 100.0,
    "experiment": "stream",
    "canceller": "ls_fixed",
    "ls_training_samples": 800,
    "ls_ridge": 1e-9,
    "quantize_weights": True,
    "frame_seed": 0,
    "chain": {
        "seed": 7,
        "delay_cycles": 1,
        "fir_taps": 5,
        "si_gain": 1.0,
        "static_paths": 6,
        "static_max_delay_samples": 6,
        "static_power_db": [-35.0, -20.0],
        "cable_gain": 1.6,
        "cable_delay_samples": 1,
        "carrier_hz": 2.472e9,
        "noise_below_si_db": 42.0,
        "noise_power": None,
        "adc_bits": 12,
        "adc_noise_lsb": 0.5,
        "adc_full_scale": 1.0,
        "rx_gain_db": -15.0,
        "tx0_drift_db_per_min": 0.0,
    },
    "target": None,
    "lms": {
        "mu": None,
        "mu_scale": 0.2,
        "step_samples": 80,
        "max_steps": 100,
        "r1_refresh_period_steps": "never",
        "init": "ls",
    },
    "sensing": {
        "rx_gain_boost_db": 0.0,
        "resample_hz": 10.0,
        "band_bpm": [6.0, 20.0],
        "threshold_db": 10.0,
        "bin_offset": 2,
        "sic_smoothing_s": 1.0,
        "series": "magnitude",
    },
    "ls_samples": [160, 480, 800, 1120, 1440, 1760],
    "outputs": ["summary"],
}

TARGET_DEFAULTS = {"base_delay_ns": 100.0, "displacement_m": 0.01, "rate_bpm": 12.0, "phase_rad": 0.0, "gain_db": -100.0}

# numeric fields that `sweep` may vary
SWEEPABLE = {
    "seed", "duration_s", "frame_rate_hz", "ls_training_samples", "ls_ridge", "frame_seed",
    "chain.delay_cycles", "chain.si_gain", "chain.cable_gain", "chain.noise_below_si_db", "chain.noise_power",
    "chain.adc_bits", "chain.adc_noise_lsb", "chain.rx_gain_db", "chain.tx0_drift_db_per_min",
    "chain.static_paths", "chain.seed",
    "target.gain_db", "target.displacement_m", "target.rate_bpm", "target.base_delay_ns", "target.phase_rad",
    "lms.mu", "lms.mu_scale", "lms.max_steps", "lms.step_samples",
    "sensing.rx_gain_boost_db", "sensing.threshold_db", "sensing.bin_offset",
}


class ConfigError(ValueError):
    """Invalid scenario config; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path) -> dict:
    """Read a YAML scenario and fill in defaults (no validation)."""
    raw = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    cfg = _merge(DEFAULTS, raw)
    if cfg.get("target") is not None:
        cfg["target"] = _merge(TARGET_DEFAULTS, cfg["target"])
    cfg.setdefault("name", Path(path).stem)
    if cfg.get("canceller") is False:  # YAML 1.1 reads a bare `off` as false
        cfg["canceller"] = "off"
    return cfg


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def validate_config(cfg: dict) -> list:
    """Every schema/invariant violation, as ``"field: problem"`` strings."""
    bad = []
    known = set(DEFAULTS) | {"name", "figure", "description", "criteria"}
    for k in cfg:
        if k not in known:
            bad.append(f"{k}: unknown field")
    if not isinstance(cfg.get("seed"), int) or isinstance(cfg.get("seed"), bool):
        bad.append("seed: must be an integer")
    d, f = cfg.get("duration_s"), cfg.get("frame_rate_hz")
    if not _num(d) or d <= 0:
        bad.append("duration_s: must be > 0")
    if not _num(f) or f <= 0:
        bad.append("frame_rate_hz: must be > 0")
    if _num(d) and _num(f) and d > 0 and f > 0:
        n = d * f
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            bad.append("duration_s: duration_s * frame_rate_hz must be a whole number of frames (>= 1)")
    if cfg.get("experiment") not in EXPERIMENTS:
        bad.append(f"experiment: must be one of {EXPERIMENTS}")
    if cfg.get("canceller") not in CANCELLERS:
        bad.append(f"canceller: must be one of {CANCELLERS}")
    if cfg.get("canceller") == "lms_tracking" and not isinstance(cfg.get("lms"), dict):
        bad.append("lms: required when canceller is lms_tracking")
    n_ls = cfg.get("ls_training_samples")
    if not isinstance(n_ls, int) or not (N_TAPS + 64 <= n_ls <= FRAME_LEN):
        bad.append(f"ls_training_samples: must be an integer in [{N_TAPS + 64}, {FRAME_LEN}]")
    if not _num(cfg.get("ls_ridge")) or cfg["ls_ridge"] < 0:
        bad.append("ls_ridge: must be >= 0")
    for v in cfg.get("ls_samples") or []:
        if not isinstance(v, int) or not (N_TAPS + 64 <= v <= FRAME_LEN):
            bad.append(f"ls_samples: {v!r} outside [{N_TAPS + 64}, {FRAME_LEN}]")
    outs = cfg.get("outputs")
    if not isinstance(outs, list):
        bad.append("outputs: must be a list")
    else:
        for o in outs:
            if o not in OUTPUTS:
                bad.append(f"outputs: unknown artifact {o!r}")

    ch = cfg.get("chain")
    if not isinstance(ch, dict):
        bad.append("chain: must be a mapping")
    else:
        for k in ch:
            if k not in DEFAULTS["chain"] and k not in ("tx0_fir", "tx1_fir", "rx_fir", "static_path_list"):
                bad.append(f"chain.{k}: unknown field")
        if not isinstance(ch.get("delay_cycles"), int) or ch["delay_cycles"] < 0:
            bad.append("chain.delay_cycles: must be an integer >= 0")
        bits = ch.get("adc_bits")
        if bits != "ideal" and not (isinstance(bits, int) and 8 <= bits <= 16):
            bad.append("chain.adc_bits: must be an integer in 8..16 or 'ideal'")
        if ch.get("noise_power") is not None and (not _num(ch["noise_power"]) or ch["noise_power"] < 0):
            bad.append("chain.noise_power: must be >= 0")
        if ch.get("noise_power") is None and ch.get("noise_below_si_db") is not None and not _num(ch["noise_below_si_db"]):
            bad.append("chain.noise_below_si_db: must be a number or null")
        for k in ("cable_gain", "si_gain", "carrier_hz", "adc_full_scale"):
            if not _num(ch.get(k)) or ch[k] <= 0:
                bad.append(f"chain.{k}: must be > 0")
        if not isinstance(ch.get("fir_taps"), int) or ch["fir_taps"] < 1:
            bad.append("chain.fir_taps: must be an integer >= 1")
        if not isinstance(ch.get("cable_delay_samples"), int) or ch["cable_delay_samples"] < 0:
            bad.append("chain.cable_delay_samples: must be an integer >= 0")
        if not isinstance(ch.get("static_paths"), int) or ch["static_paths"] < 0:
            bad.append("chain.static_paths: must be an integer >= 0")

    tg = cfg.get("target")
    if tg is not None:
        if not isinstance(tg, dict):
            bad.append("target: must be a mapping or null")
        else:
            if not _num(tg.get("rate_bpm")) or tg["rate_bpm"] <= 0:
                bad.append("target.rate_bpm: must be > 0")
            if not _num(tg.get("displacement_m")) or tg["displacement_m"] < 0:
                bad.append("target.displacement_m: must be >= 0")
            if not _num(tg.get("base_delay_ns")) or tg["base_delay_ns"] < 0:
                bad.append("target.base_delay_ns: must be >= 0")
            for k in ("gain_db", "phase_rad"):
                if not _num(tg.get(k)):
                    bad.append(f"target.{k}: must be a number")

    lms = cfg.get("lms")
    if isinstance(lms, dict):
        if lms.get("mu") is not None and (not _num(lms["mu"]) or lms["mu"] <= 0):
            bad.append("lms.mu: must be > 0 or null")
        if not _num(lms.get("mu_scale")) or lms["mu_scale"] <= 0:
            bad.append("lms.mu_scale: must be > 0")
        if not isinstance(lms.get("step_samples"), int) or lms["step_samples"] < N_TAPS:
            bad.append(f"lms.step_samples: must be an integer >= {N_TAPS}")
        if not isinstance(lms.get("max_steps"), int) or lms["max_steps"] < 1:
            bad.append("lms.max_steps: must be an integer >= 1")
        r = lms.get("r1_refresh_period_steps")
        if r != "never" and not (isinstance(r, int) and r >= 1):
            bad.append("lms.r1_refresh_period_steps: must be 'never' or an integer >= 1")
        if lms.get("init") not in ("ls", "zero"):
            bad.append("lms.init: must be 'ls' or 'zero'")

    s = cfg.get("sensing")
    if isinstance(s, dict):
        band = s.get("band_bpm")
        if not (isinstance(band, list) and len(band) == 2 and all(_num(b) for b in band) and 0 <= band[0] < band[1]):
            bad.append("sensing.band_bpm: must be [low, high] with 0 <= low < high")
        elif _num(s.get("resample_hz")) and band[1] > s["resample_hz"] * 30:
            bad.append("sensing.band_bpm: upper edge exceeds the resampled Nyquist rate")
        if not _num(s.get("resample_hz")) or s["resample_hz"] <= 0:
            bad.append("sensing.resample_hz: must be > 0")
        elif _num(f) and f > 0 and s["resample_hz"] > f:
            bad.append("sensing.resample_hz: must not exceed frame_rate_hz")
        if s.get("series") not in ("magnitude", "complex"):
            bad.append("sensing.series: must be 'magnitude' or 'complex'")
    else:
        bad.append("sensing: must be a mapping")
    return bad


def _fir(spec_value, rng, n_taps):
    if spec_value is None or spec_value == "random":
        return random_fir(rng, n_taps)
    return np.array([complex(re, im) for re, im in spec_value])


def build_chain(cfg: dict, frame=None) -> RfChainSpec:
    """Turn the ``chain`` and ``target`` sections into an :class:`RfChainSpec`."""
    ch = cfg["chain"]
    rng = np.random.default_rng(ch["seed"])
    n = ch["fir_taps"]
    tx0 = _fir(ch.get("tx0_fir"), rng, n)
    tx1 = _fir(ch.get("tx1_fir"), rng, n)
    rx = _fir(ch.get("rx_fir"), rng, n)
    paths = [PathSpec(complex(ch["si_gain"]), 0.0, SI)]
    if ch.get("static_path_list"):
        paths += [PathSpec(complex(10 ** (p["power_db"] / 20)) * np.exp(1j * p.get("phase_rad", 0.0)),
                           p["delay_samples"] / SAMPLE_RATE_HZ) for p in ch["static_path_list"]]
    elif ch["static_paths"] > 0:
        paths += office_paths(rng, ch["static_paths"], ch["static_max_delay_samples"], tuple(ch["static_power_db"]))
    tg = cfg.get("target")
    if tg is not None:
        traj = TargetTrajectory(tg["base_delay_ns"] * 1e-9, tg["displacement_m"], tg["rate_bpm"], tg["phase_rad"])
        paths.append(PathSpec(complex(10 ** (tg["gain_db"] / 20)), traj, DYNAMIC))
    ch0 = MultipathChannel(paths, carrier_hz=ch["carrier_hz"])
    ch1 = MultipathChannel([PathSpec(complex(ch["cable_gain"]), ch["cable_delay_samples"] / SAMPLE_RATE_HZ, SI)],
                           carrier_hz=ch["carrier_hz"])
    spec = RfChainSpec(tx0, tx1, rx, ch["delay_cycles"], ch0, ch1, 0.0, ch["adc_bits"], ch["rx_gain_db"],
                       ch["adc_full_scale"], ch["adc_noise_lsb"], ch["tx0_drift_db_per_min"])
    if ch.get("noise_power") is not None:
        return replace(spec, noise_power=float(ch["noise_power"]))
    if ch.get("noise_below_si_db") is not None:
        frame = frame if frame is not None else build_frame(cfg["frame_seed"])
        p_si = float(np.mean(np.abs(clean_capture(frame, spec, None, "antenna_only", 0.0)) ** 2))
        return replace(spec, noise_power=p_si * 10 ** (-ch["noise_below_si_db"] / 10))
    return spec


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    name: str
    summary: dict
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sic_db: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: Optional[np.ndarray] = None
    spectrum: Any = None
    cir: Optional[CirSeries] = None
    ls_sweep: Optional[list] = None
    lms_curve: Optional[np.ndarray] = None
    ls_sic_db: Optional[float] = None
    files: list = field(default_factory=list)


class _Capturer:
    """Per-scenario capture helper that reuses the noiseless signal on static chains."""

    def __init__(self, frame, spec):
        self.frame, self.spec = frame, spec
        self._cache = {}

    def __call__(self, taps, mode, t, seed, spec=None):
        spec = spec or self.spec
        key = (mode, None if taps is None else taps.taps.tobytes())
        if spec.is_static and key in self._cache:
            clean = self._cache[key]
        else:
            clean = clean_capture(self.frame, spec, taps, mode, t)
            if spec.is_static:
                self._cache = {key: clean} if len(self._cache) > 8 else {**self._cache, key: clean}
        return input_referred(receive(clean, spec, seed, self.frame.iq.sample_rate_hz), spec)


def _ls_fit(cfg, cap, frame, n_samples):
    seed = cfg["seed"]
    r0 = cap(None, "antenna_only", 0.0, capture_seed(seed, 0, STREAM_R0))
    r1 = cap(None, "canc_only", 0.0, capture_seed(seed, 0, STREAM_R1))
    cut = lambda b: b.with_samples(b.samples[:n_samples])
    taps = fit_ls(frame.iq, cut(r0), cut(r1), N_TAPS, cfg["ls_ridge"])
    if cfg["quantize_weights"]:
        taps = quantize_weights(taps)
    return taps, r0


def _lms_cfg(cfg, steps=None):
    l = cfg["lms"]
    return LmsConfig(l["mu"], l["step_samples"], steps or l["max_steps"], l["r1_refresh_period_steps"], l["mu_scale"])


def _smoothed(x, n):
    if n <= 1 or x.size < n:
        return x
    return np.convolve(x, np.ones(n) / n, mode="valid")


def run_config(cfg: dict, out_dir=None) -> ScenarioResult:
    """Run a validated config; write the selected artifacts when ``out_dir`` is given."""
    bad = validate_config(cfg)
    if bad:
        raise ConfigError(bad)
    frame = build_frame(cfg["frame_seed"])
    spec = build_chain(cfg, frame)
    cap = _Capturer(frame, spec)
    exp = cfg["experiment"]
    res = {"stream": _run_stream, "ls_samples": _run_ls_samples,
           "lms_convergence": _run_lms_convergence, "ls_sic": _run_ls_sic}[exp](cfg, frame, spec, cap)
    if out_dir is not None:
        _write_artifacts(cfg, res, Path(out_dir))
    return res


def _summary(cfg, n_frames, sic=None, spec_res=None, extra=None):
    sic = np.asarray(sic if sic is not None else [], dtype=float)
    rate = detect_rate(spec_res, cfg["sensing"]["threshold_db"]) if spec_res is not None else None
    out = {
        "name": cfg["name"],
        "frames": int(n_frames),
        "mean_sic_db": round(float(sic.mean()), 6) if sic.size else None,
        "min_sic_db": round(float(sic.min()), 6) if sic.size else None,
        "max_sic_db": round(float(sic.max()), 6) if sic.size else None,
        "peak_bpm": round(spec_res.peak_bpm, 6) if spec_res is not None else None,
        "peak_ratio_db": round(spec_res.peak_ratio_db, 6) if spec_res is not None else None,
        "detected_bpm": round(rate, 6) if rate is not None else None,
    }
    out.update(extra or {})
    return out


def _run_stream(cfg, frame, spec, cap):
    n = int(round(cfg["duration_s"] * cfg["frame_rate_hz"]))
    times = np.arange(n) / cfg["frame_rate_hz"]
    seed = cfg["seed"]
    sens = cfg["sensing"]
    outs = set(cfg["outputs"])
    want_cir = cfg["canceller"] != "lms_tracking" and bool({"cir_series", "spectrum"} & outs)
    sic = []
    weights = None
    last = None
    extra = {}

    if cfg["canceller"] == "lms_tracking":
        init = FilterTaps.zeros(quantized=cfg["quantize_weights"])
        if cfg["lms"]["init"] == "ls":
            init, _ = _ls_fit(cfg, cap, frame, cfg["ls_training_samples"])
        hist = run_lms(frame, spec, init, _lms_cfg(cfg, n), times, seed)
        sic = [r.sic.sic_db for r in hist]
        weights = np.array([r.taps.raw if r.taps.raw is not None else r.taps.taps for r in hist])
        ph = weight_phase_series(weights)
        _, ph10 = resample_uniform(times, ph, sens["resample_hz"])
        spec_res = spectrum_bpm(ph10, sens["resample_hz"], tuple(sens["band_bpm"]))
        sm = _smoothed(np.asarray(sic), int(round(sens["sic_smoothing_s"] * cfg["frame_rate_hz"])))
        extra = {"smoothed_sic_spread_db": round(float(np.max(np.abs(sm - np.mean(sic)))), 6)}
        return ScenarioResult(cfg["name"], _summary(cfg, n, sic, spec_res, extra), times, np.asarray(sic),
                              weights, spec_res)

    taps, ref, zero_bin = None, None, None
    sens_spec = spec
    if cfg["canceller"] == "ls_fixed":
        taps, ref = _ls_fit(cfg, cap, frame, cfg["ls_training_samples"])
        zero_bin = strongest_bin(cfr_to_cir(estimate_cfr(ref, frame)))
        sens_spec = replace(spec, rx_gain_db=spec.rx_gain_db + sens["rx_gain_boost_db"])
    mode = "antenna_only" if taps is None else "both"
    cirs = []
    for i, t in enumerate(times):
        buf = cap(taps, mode, float(t), capture_seed(seed, i + 1, STREAM_CANC), sens_spec)
        if ref is not None:
            sic.append(compute_sic(ref, buf).sic_db)
        if want_cir:
            cirs.append(frame_cir(buf, frame, float(t)))
        last = buf
    spec_res, series = None, None
    if want_cir and n >= 2:
        series = CirSeries.from_frames(cirs, zero_bin)
        z = series.bin_series(sens["bin_offset"])
        track = z if sens["series"] == "complex" else np.abs(z)
        if n / cfg["frame_rate_hz"] * sens["resample_hz"] >= 64:
            _, v = resample_uniform(series.timestamps, track, sens["resample_hz"])
            spec_res = spectrum_bpm(v, sens["resample_hz"], tuple(sens["band_bpm"]))
        extra["zero_bin_index"] = series.zero_bin_index
    res = ScenarioResult(cfg["name"], _summary(cfg, n, sic, spec_res, extra), times, np.asarray(sic),
                         None, spec_res, series)
    res.last_capture = last
    return res


def _run_ls_samples(cfg, frame, spec, cap):
    seed = cfg["seed"]
    before = cap(None, "antenna_only", 0.0, capture_seed(seed, 1, STREAM_R0))
    rows = []
    for L in cfg["ls_samples"]:
        taps, _ = _ls_fit(cfg, cap, frame, L)
        after = cap(taps, "both", 0.0, capture_seed(seed, 1, STREAM_CANC))
        rows.append((L, compute_sic(before, after).sic_db))
    sic = [r[1] for r in rows]
    res = ScenarioResult(cfg["name"], _summary(cfg, 1, sic), sic_db=np.asarray(sic), ls_sweep=rows)
    return res


def ls_reference_sic(cfg, frame, spec, cap):
    """SIC of the LS filter over the LMS training block (same window the LMS reports use)."""
    taps, _ = _ls_fit(cfg, cap, frame, cfg["ls_training_samples"])
    hist = run_lms(frame, spec, taps, _lms_cfg(cfg, 1), [0.0], cfg["seed"])
    return hist[0].sic.sic_db, taps


def _run_lms_convergence(cfg, frame, spec, cap):
    steps = cfg["lms"]["max_steps"]
    init = FilterTaps.zeros(quantized=cfg["quantize_weights"])
    if cfg["lms"]["init"] == "ls":
        init, _ = _ls_fit(cfg, cap, frame, cfg["ls_training_samples"])
    hist = run_lms(frame, spec, init, _lms_cfg(cfg, steps), [0.0] * steps, cfg["seed"])
    curve = np.array([r.sic.sic_db for r in hist])
    ls_sic, _ = ls_reference_sic(cfg, frame, spec, cap)
    within = np.flatnonzero(curve >= ls_sic - 1.0)
    extra = {"ls_sic_db": round(float(ls_sic), 6),
             "first_step_within_1db": int(within[0]) if within.size else None}
    weights = np.array([r.taps.taps for r in hist])
    res = ScenarioResult(cfg["name"], _summary(cfg, steps, curve, None, extra), np.arange(steps, dtype=float),
                         curve, weights, lms_curve=curve, ls_sic_db=ls_sic)
    return res


def _run_ls_sic(cfg, frame, spec, cap):
    seed = cfg["seed"]
    taps, _ = _ls_fit(cfg, cap, frame, cfg["ls_training_samples"])
    before = cap(None, "antenna_only", 0.0, capture_seed(seed, 1, STREAM_R0))
    after = cap(taps, "both", 0.0, capture_seed(seed, 1, STREAM_CANC))
    rep = compute_sic(before, after)
    extra = {"power_before_dbfs": round(rep.power_before_dbfs, 6), "power_after_dbfs": round(rep.power_after_dbfs, 6)}
    res = ScenarioResult(cfg["name"], _summary(cfg, 1, [rep.sic_db], None, extra), sic_db=np.array([rep.sic_db]),
                         weights=taps.taps[None, :])
    res.psd = (before, after)
    res.last_capture = after
    return res


def _psd_db(buf: IqBuffer, nfft=64):
    x = buf.samples[: (len(buf) // nfft) * nfft].reshape(-1, nfft) * np.hanning(nfft)
    p = np.mean(np.abs(np.fft.fftshift(np.fft.fft(x, axis=1), axes=1)) ** 2, axis=0) / np.sum(np.hanning(nfft) ** 2)
    return 10 * np.log10(p + 1e-30)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _f(v, nd=6):
    return "" if v is None else f"{v:.{nd}f}"


def _write_artifacts(cfg, res: ScenarioResult, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    outs = cfg["outputs"]
    files = []

    def path(name):
        p = out / name
        files.append(p)
        return p

    if "summary" in outs:
        path("summary.json").write_text(json.dumps(res.summary, indent=2, sort_keys=True) + "\n")
    if "sic" in outs and res.sic_db.size:
        _write_csv(path("sic.csv"), ["timestamp_s", "sic_db"],
                   [[_f(t), _f(s)] for t, s in zip(res.times, res.sic_db)])
    if "weights" in outs and res.weights is not None:
        rows = []
        for i, w in enumerate(res.weights):
            t = res.times[i] if i < res.times.size else 0.0
            s = res.sic_db[i] if i < res.sic_db.size else float("nan")
            for k, v in enumerate(w):
                rows.append([i, _f(t), _f(s), k, f"{v.real:.9e}", f"{v.imag:.9e}"])
        _write_csv(path("weights.csv"), ["step", "timestamp_s", "sic_db", "tap_index", "re", "im"], rows)
    if "cir_series" in outs and res.cir is not None:
        write_cir_csv(path("cir_series.csv"), res.cir)
    if "spectrum" in outs and res.spectrum is not None:
        write_spectrum_csv(path("spectrum.csv"), res.spectrum)
    if "ls_sweep" in outs and res.ls_sweep is not None:
        _write_csv(path("ls_sweep.csv"), ["training_samples", "sic_db"], [[L, _f(s)] for L, s in res.ls_sweep])
    if "lms_convergence" in outs and res.lms_curve is not None:
        _write_csv(path("lms_convergence.csv"), ["step", "sic_db", "ls_sic_db"],
                   [[i, _f(s), _f(res.ls_sic_db)] for i, s in enumerate(res.lms_curve)])
    if "psd" in outs and hasattr(res, "psd"):
        before, after = res.psd
        freqs = np.fft.fftshift(np.fft.fftfreq(64, 1 / before.sample_rate_hz)) / 1e6
        _write_csv(path("psd.csv"), ["freq_mhz", "before_db", "after_db"],
                   [[_f(f, 4), _f(b), _f(a)] for f, b, a in zip(freqs, _psd_db(before), _psd_db(after))])
    if "iq" in outs and getattr(res, "last_capture", None) is not None:
        write_msiq(path("capture.msiq"), res.last_capture)
    res.files = files


def run_scenario(config_path, out_dir=None, seed: Optional[int] = None) -> ScenarioResult:
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    return run_config(cfg, out_dir)


def set_param(cfg: dict, dotted: str, value):
    if dotted not in SWEEPABLE:
        raise ConfigError([f"{dotted}: not a sweepable numeric field (choose from {sorted(SWEEPABLE)})"])
    node = cfg
    parts = dotted.split(".")
    for p in parts[:-1]:
        if node.get(p) is None:
            if p == "target":
                node[p] = dict(TARGET_DEFAULTS)
            else:
                raise ConfigError([f"{dotted}: section {p!r} is not set in this config"])
        node = node[p]
    node[parts[-1]] = value


SWEEP_FIELDS = ("mean_sic_db", "min_sic_db", "max_sic_db", "peak_bpm", "peak_ratio_db", "detected_bpm")


def _coerce(v):
    f = float(v)
    return int(f) if f.is_integer() and "." not in str(v) and "e" not in str(v).lower() else f


def sweep(config_path, parameter: str, values, out_dir, seed: Optional[int] = None) -> Path:
    """Run the scenario once per value (shared seed) and write ``sweep.csv``."""
    base = load_config(config_path)
    if seed is not None:
        base["seed"] = seed
    if parameter not in SWEEPABLE:
        raise ConfigError([f"{parameter}: not a sweepable numeric field"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for v in values:
        v = _coerce(v)
        cfg = copy.deepcopy(base)
        set_param(cfg, parameter, v)
        try:
            res = run_config(cfg, out / f"{parameter}={v}")
        except ConfigError:
            raise
        except (ArithmeticError, np.linalg.LinAlgError) as exc:
            # a diverging or singular run is a result of the sweep, not a harness failure
            log.warning("%s=%s failed: %s", parameter, v, exc)
            rows.append([parameter, v, type(exc).__name__] + [""] * len(SWEEP_FIELDS))
            continue
        rows.append([parameter, v, "ok"] + [_f(res.summary.get(k)) for k in SWEEP_FIELDS])
    target = out / "sweep.csv"
    _write_csv(target, ["parameter", "value", "status", *SWEEP_FIELDS], rows)
    return target


def bundled(name: str) -> Path:
    """Path of a bundled scenario config by name (e.g. ``"fig6_on"``)."""
    p = SCENARIO_DIR / f"{name}.yaml"
    if not p.exists():
        raise FileNotFoundError(f"no bundled scenario {name!r}")
    return p


def manifest() -> list:
    return yaml.safe_load((SCENARIO_DIR / "manifest.yaml").read_text())["scenarios"]
