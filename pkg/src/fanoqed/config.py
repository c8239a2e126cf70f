"""JSON configuration: schema validation, defaults and hashing.

A config file is a single JSON object with a `schema` version and one
section per physical subsystem.  Unknown keys anywhere are rejected, and
the module invariants are re-checked when the dataclasses are built.
All frequencies are in meV, temperatures in K, times in hbar/meV.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .ldos import EmitterCoupling
from .mapping import FitOptions
from .observables import DynamicsSettings
from .phonons import PhononEnv
from .scattering import CavityGeometry, FanoMirror

SCHEMA_VERSION = 1


@dataclass
class SweepConfig:
    gamma_f_min: float
    gamma_f_max: float
    gamma_f_points: int
    offset_min: float
    offset_max: float
    offset_points: int
    absolute: bool = False

    def gamma_f_values(self):
        return np.linspace(self.gamma_f_min, self.gamma_f_max,
                           self.gamma_f_points)

    def offsets(self):
        return np.linspace(self.offset_min, self.offset_max,
                           self.offset_points)


@dataclass
class FpConfig:
    r_min: float
    r_max: float
    r_points: int
    offset_min: float
    offset_max: float
    offset_points: int
    near: float | None = None      # FP resonance search frequency; None = omega_eg

    def r_values(self):
        # log-spaced in the transmission 1 - r so the high-finesse corner
        # is sampled densely
        t_lo = 1.0 - self.r_max
        t_hi = 1.0 - self.r_min
        return 1.0 - np.geomspace(t_hi, t_lo, self.r_points)

    def offsets(self):
        return np.linspace(self.offset_min, self.offset_max,
                           self.offset_points)


@dataclass
class SimConfig:
    mirror: FanoMirror
    geometry: CavityGeometry
    emitter: EmitterCoupling
    phonons: PhononEnv | None
    fit_options: FitOptions
    dynamics: DynamicsSettings
    sweep: SweepConfig
    fp: FpConfig
    omega_eg_peak_offset: float | None    # None when emitter.omega_eg is absolute
    raw: dict = field(default_factory=dict, repr=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _need(section: dict, key: str, path: str):
    if key not in section:
        raise ConfigError(f"missing required key '{path}.{key}'")
    return section[key]


def _check_unknown(section: dict, allowed: set, path: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in '{path}' "
            f"(allowed: {sorted(allowed)})")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number, got {value!r}")
    return float(value)


def default_config_dict() -> dict:
    """Parameter set of the indistinguishability study (all values in meV/K)."""
    fsr = 10.0
    omega_0 = 101.0 * math.pi * fsr
    return {
        "schema": SCHEMA_VERSION,
        "mirror": {
            "r_b": -1.0 / math.sqrt(2.0),
            "parity": 1,
            "gamma_f_mev": 0.11 * fsr,
            "gamma_0_mev": 1e-3 * fsr,
            "omega_f_mev": omega_0 - 0.02 * math.pi * fsr,
        },
        "cavity": {"fsr_mev": fsr, "r0": -1.0, "x_tilde": 0.0},
        "emitter": {
            "gamma0_mev": 0.6e-3,
            "gamma_r_mev": 0.03e-3,
            "omega_eg_mev": None,
            "omega_eg_peak_offset_mev": 0.0,
        },
        "phonons": {"alpha_inv_mev2": 0.069, "nu_c_mev": 1.45,
                    "temperature_k": 4.0},
        "fit": {"window_half_width_mev": None, "coarse_points": 20,
                "nm_maxiter": 6000, "multistart": 3},
        "dynamics": {"dt": None, "n_t": None, "n_t_max": 8192,
                     "decay_target": 1e-4},
        "sweep": {"gamma_f_min_mev": 0.5, "gamma_f_max_mev": 3.35,
                  "gamma_f_points": 20, "offset_min_mev": -2.4,
                  "offset_max_mev": 1.6, "offset_points": 21,
                  "absolute": False},
        "fp": {"r_min": 0.95, "r_max": 0.998, "r_points": 20,
               "offset_min_mev": -0.3, "offset_max_mev": 0.3,
               "offset_points": 21, "near_mev": None},
    }


def parse_config(data: dict) -> SimConfig:
    """Validate a parsed JSON object and build the typed configuration."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _check_unknown(data, {"schema", "mirror", "cavity", "emitter", "phonons",
                          "fit", "dynamics", "sweep", "fp"}, "<root>")
    schema = _need(data, "schema", "<root>")
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {schema!r}; "
                          f"this build reads version {SCHEMA_VERSION}")

    m = _need(data, "mirror", "<root>")
    _check_unknown(m, {"r_b", "parity", "gamma_f_mev", "gamma_1_mev",
                       "gamma_2_mev", "gamma_0_mev", "omega_f_mev"}, "mirror")
    if "gamma_f_mev" in m:
        gamma_1 = gamma_2 = _number(m["gamma_f_mev"], "mirror.gamma_f_mev")
    else:
        gamma_1 = _number(_need(m, "gamma_1_mev", "mirror"), "mirror.gamma_1_mev")
        gamma_2 = _number(_need(m, "gamma_2_mev", "mirror"), "mirror.gamma_2_mev")
    try:
        mirror = FanoMirror(
            r_b=_number(_need(m, "r_b", "mirror"), "mirror.r_b"),
            gamma_1=gamma_1, gamma_2=gamma_2,
            gamma_0=_number(_need(m, "gamma_0_mev", "mirror"), "mirror.gamma_0_mev"),
            omega_f=_number(_need(m, "omega_f_mev", "mirror"), "mirror.omega_f_mev"),
            parity=int(_need(m, "parity", "mirror")))
    except ValueError as exc:
        raise ConfigError(f"mirror: {exc}") from exc

    c = _need(data, "cavity", "<root>")
    _check_unknown(c, {"fsr_mev", "r0", "x_tilde"}, "cavity")
    try:
        geometry = CavityGeometry(
            fsr=_number(_need(c, "fsr_mev", "cavity"), "cavity.fsr_mev"),
            r0=complex(_number(c.get("r0", -1.0), "cavity.r0")),
            x_tilde=_number(c.get("x_tilde", 0.0), "cavity.x_tilde"))
    except ValueError as exc:
        raise ConfigError(f"cavity: {exc}") from exc

    e = _need(data, "emitter", "<root>")
    _check_unknown(e, {"gamma0_mev", "gamma_r_mev", "omega_eg_mev",
                       "omega_eg_peak_offset_mev"}, "emitter")
    omega_eg = e.get("omega_eg_mev")
    peak_offset = e.get("omega_eg_peak_offset_mev")
    if (omega_eg is None) == (peak_offset is None):
        raise ConfigError("emitter: exactly one of 'omega_eg_mev' and "
                          "'omega_eg_peak_offset_mev' must be set")
    placeholder = mirror.omega_f if omega_eg is None else _number(
        omega_eg, "emitter.omega_eg_mev")
    try:
        emitter = EmitterCoupling(
            gamma0=_number(_need(e, "gamma0_mev", "emitter"), "emitter.gamma0_mev"),
            gamma_r=_number(_need(e, "gamma_r_mev", "emitter"),
                            "emitter.gamma_r_mev"),
            omega_eg=placeholder)
    except ValueError as exc:
        raise ConfigError(f"emitter: {exc}") from exc

    p = data.get("phonons")
    env = None
    if p is not None:
        _check_unknown(p, {"alpha_inv_mev2", "nu_c_mev", "temperature_k"},
                       "phonons")
        try:
            env = PhononEnv(
                alpha=_number(_need(p, "alpha_inv_mev2", "phonons"),
                              "phonons.alpha_inv_mev2"),
                nu_c=_number(_need(p, "nu_c_mev", "phonons"), "phonons.nu_c_mev"),
                temperature=_number(_need(p, "temperature_k", "phonons"),
                                    "phonons.temperature_k"))
        except ValueError as exc:
            raise ConfigError(f"phonons: {exc}") from exc

    f = data.get("fit", {})
    _check_unknown(f, {"window_half_width_mev", "coarse_points", "nm_maxiter",
                       "multistart"}, "fit")
    fit_options = FitOptions(
        coarse_points=int(f.get("coarse_points", 20)),
        nm_maxiter=int(f.get("nm_maxiter", 6000)),
        multistart=int(f.get("multistart", 3)))
    window_half = f.get("window_half_width_mev")
    if window_half is not None:
        window_half = _number(window_half, "fit.window_half_width_mev")

    d = data.get("dynamics", {})
    _check_unknown(d, {"dt", "n_t", "n_t_max", "decay_target"}, "dynamics")
    dynamics_settings = DynamicsSettings(
        dt=None if d.get("dt") is None else _number(d["dt"], "dynamics.dt"),
        n_t=None if d.get("n_t") is None else int(d["n_t"]),
        n_t_max=int(d.get("n_t_max", 8192)),
        decay_target=_number(d.get("decay_target", 1e-4),
                             "dynamics.decay_target"))

    s = data.get("sweep", {})
    _check_unknown(s, {"gamma_f_min_mev", "gamma_f_max_mev", "gamma_f_points",
                       "offset_min_mev", "offset_max_mev", "offset_points",
                       "absolute"}, "sweep")
    sweep_cfg = SweepConfig(
        gamma_f_min=_number(s.get("gamma_f_min_mev", 0.5), "sweep.gamma_f_min_mev"),
        gamma_f_max=_number(s.get("gamma_f_max_mev", 3.35), "sweep.gamma_f_max_mev"),
        gamma_f_points=int(s.get("gamma_f_points", 20)),
        offset_min=_number(s.get("offset_min_mev", -2.4), "sweep.offset_min_mev"),
        offset_max=_number(s.get("offset_max_mev", 1.6), "sweep.offset_max_mev"),
        offset_points=int(s.get("offset_points", 21)),
        absolute=bool(s.get("absolute", False)))
    if sweep_cfg.gamma_f_points < 1 or sweep_cfg.offset_points < 1:
        raise ConfigError("sweep: point counts must be >= 1")
    if sweep_cfg.gamma_f_max < sweep_cfg.gamma_f_min:
        raise ConfigError("sweep: gamma_f_max_mev < gamma_f_min_mev")

    q = data.get("fp", {})
    _check_unknown(q, {"r_min", "r_max", "r_points", "offset_min_mev",
                       "offset_max_mev", "offset_points", "near_mev"}, "fp")
    fp_cfg = FpConfig(
        r_min=_number(q.get("r_min", 0.95), "fp.r_min"),
        r_max=_number(q.get("r_max", 0.998), "fp.r_max"),
        r_points=int(q.get("r_points", 20)),
        offset_min=_number(q.get("offset_min_mev", -0.3), "fp.offset_min_mev"),
        offset_max=_number(q.get("offset_max_mev", 0.3), "fp.offset_max_mev"),
        offset_points=int(q.get("offset_points", 21)),
        near=None if q.get("near_mev") is None else _number(q["near_mev"],
                                                            "fp.near_mev"))
    if not (0.0 < fp_cfg.r_min < fp_cfg.r_max < 1.0):
        raise ConfigError("fp: need 0 < r_min < r_max < 1")
    if fp_cfg.r_points < 1 or fp_cfg.offset_points < 1:
        raise ConfigError("fp: point counts must be >= 1")

    cfg = SimConfig(mirror=mirror, geometry=geometry, emitter=emitter,
                    phonons=env, fit_options=fit_options,
                    dynamics=dynamics_settings, sweep=sweep_cfg, fp=fp_cfg,
                    omega_eg_peak_offset=(None if peak_offset is None
                                          else _number(
                                              peak_offset,
                                              "emitter.omega_eg_peak_offset_mev")),
                    raw=data)
    cfg.raw.setdefault("fit", {})
    if window_half is not None:
        cfg.raw["fit"]["window_half_width_mev"] = window_half
    return cfg


def load_config(path: str) -> SimConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def fit_window(cfg: SimConfig):
    """Explicit fit window from the config, or None for the pole-centred default."""
    half = cfg.raw.get("fit", {}).get("window_half_width_mev")
    if half is None:
        return None
    centre = cfg.mirror.omega_f
    return (centre - half, centre + half)
