"""Command-line interface.

Subcommands: ldos, fit, spectrum, sweep, fp.  Every run requires --config
(JSON, see config.default_config_dict for the shipped parameter set) and
writes CSV/JSON files into --out, each tagged with the config hash.

Exit codes: 0 success, 2 usage or configuration error, 3 infeasible
computation, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import ldos, mapping, observables, scattering
from .config import SimConfig, fit_window, load_config
from .errors import ConfigError, InfeasibleError, NumericsError
from .ldos import EmitterCoupling, SpectralCurve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICS = 4


def _parse_range(text: str):
    try:
        lo, hi = text.split("..")
        lo, hi = float(lo), float(hi)
    except ValueError as exc:
        raise ConfigError(f"range must look like 'lo..hi', got {text!r}") from exc
    if hi <= lo:
        raise ConfigError(f"range must satisfy hi > lo, got {text!r}")
    return lo, hi


def _resolve_omega_eg(cfg: SimConfig):
    """Emitter frequency: absolute from config, or offset from the LDOS peak."""
    if cfg.omega_eg_peak_offset is None:
        return cfg.emitter.omega_eg, None
    window = fit_window(cfg) or mapping.default_window(
        complex(cfg.mirror.omega_f), complex(cfg.mirror.omega_f),
        cfg.geometry.fsr)
    grid = np.linspace(window[0], window[1], 20001)
    j = ldos.ldos_midpoint(cfg.mirror, cfg.geometry, cfg.emitter, grid)
    w_peak, w_dip = ldos.peak_and_dip(grid, j)
    return float(w_peak + cfg.omega_eg_peak_offset), (w_peak, w_dip)


def _emitter_at(cfg: SimConfig, omega_eg: float) -> EmitterCoupling:
    return EmitterCoupling(gamma0=cfg.emitter.gamma0,
                           gamma_r=cfg.emitter.gamma_r, omega_eg=omega_eg)


def _open_out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write_rows(path, header, rows, config_hash):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return "nan"
    return f"{x:.10e}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_ldos(cfg: SimConfig, args) -> int:
    if args.points <= 0:
        raise ConfigError(f"--points must be positive, got {args.points}")
    if args.range is not None:
        lo, hi = _parse_range(args.range)
    else:
        half = np.pi * cfg.geometry.fsr / 2.0
        lo, hi = cfg.mirror.omega_f - half, cfg.mirror.omega_f + half
    grid = np.linspace(lo, hi, args.points)
    tag = cfg.config_hash()
    if args.gamma_f_range is not None:
        spec_range, n = args.gamma_f_range.rsplit(":", 1)
        g_lo, g_hi = _parse_range(spec_range)
        rows = []
        for gf in np.linspace(g_lo, g_hi, int(n)):
            mirror = scattering.FanoMirror.symmetric(
                r_b=cfg.mirror.r_b, gamma_f=gf, gamma_0=cfg.mirror.gamma_0,
                omega_f=cfg.mirror.omega_f, parity=cfg.mirror.parity)
            j = ldos.ldos_at(mirror, cfg.geometry, cfg.emitter, args.position,
                             grid)
            rows.extend([_fmt(w), _fmt(gf), _fmt(v / cfg.emitter.gamma0)]
                        for w, v in zip(grid, j))
        path = _open_out(args, "ldos_map.csv")
        _write_rows(path, "omega_meV,gamma_f_meV,J_over_Gamma0",
                    rows, tag)
        print(path)
        return EXIT_OK
    if args.fp_r is not None:
        values = ldos.fp_ldos(args.fp_r, cfg.geometry, cfg.emitter, grid)
    else:
        values = ldos.ldos_at(cfg.mirror, cfg.geometry, cfg.emitter,
                              args.position, grid)
    curve = SpectralCurve(grid, values)
    path = _open_out(args, "ldos.csv")
    curve.write_csv(path, cfg.emitter.gamma0, header_comment=f"config_hash={tag}")
    print(path)
    return EXIT_OK


def cmd_fit(cfg: SimConfig, args) -> int:
    report = mapping.fit_cavity(cfg.mirror, cfg.geometry, cfg.emitter,
                                window=fit_window(cfg),
                                options=cfg.fit_options)
    tag = cfg.config_hash()
    json_path = _open_out(args, "fit.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        payload = json.loads(report.to_json())
        payload["config_hash"] = tag
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    grid = np.linspace(report.window[0], report.window[1], 4001)
    j = ldos.ldos_midpoint(cfg.mirror, cfg.geometry, cfg.emitter, grid)
    jp = mapping.mapped_spectral_density(report.pair, grid)
    rows = [[_fmt(w), _fmt(a / cfg.emitter.gamma0), _fmt(b / cfg.emitter.gamma0)]
            for w, a, b in zip(grid, j, jp)]
    csv_path = _open_out(args, "fit_overlay.csv")
    _write_rows(csv_path, "omega_meV,J_over_Gamma0,Jprime_over_Gamma0", rows, tag)
    print(json_path)
    print(csv_path)
    return EXIT_OK


def cmd_spectrum(cfg: SimConfig, args) -> int:
    omega_eg, peak_info = _resolve_omega_eg(cfg)
    emitter = _emitter_at(cfg, omega_eg)
    report = mapping.fit_cavity(cfg.mirror, cfg.geometry, emitter,
                                window=fit_window(cfg), options=cfg.fit_options)
    result = observables.fano_emission(cfg.mirror, cfg.geometry, emitter,
                                       cfg.phonons, fit_report=report,
                                       settings=cfg.dynamics)
    tag = cfg.config_hash()
    peak = max(result.spectrum.max(), 1e-300)
    rows = [[_fmt(w), _fmt(v / peak)]
            for w, v in zip(result.omega, result.spectrum)]
    csv_path = _open_out(args, "spectrum.csv")
    _write_rows(csv_path, "omega_meV,Sbar_norm", rows, tag)
    summary = {
        "config_hash": tag,
        "omega_eg_meV": omega_eg,
        "I": result.indist.indistinguishability,
        "delta": result.indist.delta,
        "P_emit": result.indist.p_emit,
        "fit_epsilon_rel": report.epsilon_rel,
        "diagnostics": {k: v for k, v in result.diagnostics.items()
                        if isinstance(v, (int, float, bool, str))},
    }
    if peak_info is not None:
        summary["ldos_peak_meV"], summary["ldos_dip_meV"] = peak_info
    json_path = _open_out(args, "spectrum_summary.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(csv_path)
    print(json_path)
    return EXIT_OK


def cmd_sweep(cfg: SimConfig, args) -> int:
    sw = cfg.sweep
    if sw.gamma_f_points == 0 or sw.offset_points == 0:
        raise ConfigError("sweep ranges must be non-empty")
    result = observables.sweep(cfg.mirror, cfg.geometry, cfg.emitter,
                               cfg.phonons, sw.gamma_f_values(), sw.offsets(),
                               absolute=sw.absolute, settings=cfg.dynamics,
                               fit_options=cfg.fit_options,
                               n_workers=args.threads)
    tag = cfg.config_hash()
    rows = [[_fmt(r.omega_eg), _fmt(r.parameter), _fmt(r.indistinguishability),
             _fmt(r.delta), _fmt(r.p_emit), r.status] for r in result.rows]
    map_path = _open_out(args, "sweep_map.csv")
    _write_rows(map_path, "omega_eg_meV,gammaF_meV,I,delta,P_emit,status",
                rows, tag)
    trace_rows = [[_fmt(gf), _fmt(wp)] for gf, wp in result.trace]
    trace_path = _open_out(args, "sweep_trace.csv")
    _write_rows(trace_path, "gammaF_meV,omega_peak_meV", trace_rows, tag)
    print(map_path)
    print(trace_path)
    return EXIT_OK


def cmd_fp(cfg: SimConfig, args) -> int:
    fp = cfg.fp
    near = fp.near if fp.near is not None else cfg.mirror.omega_f
    result = observables.fp_sweep(cfg.geometry, cfg.emitter, cfg.phonons,
                                  fp.r_values(), fp.offsets(), near=near,
                                  settings=cfg.dynamics,
                                  n_workers=args.threads)
    tag = cfg.config_hash()
    rows = [[_fmt(r.omega_eg), _fmt(r.parameter), _fmt(r.indistinguishability),
             _fmt(r.delta), _fmt(r.p_emit), r.status] for r in result.rows]
    path = _open_out(args, "fp_map.csv")
    _write_rows(path, "omega_eg_meV,r,I,delta,P_emit,status", rows, tag)
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanoqed",
        description="Fano-cavity quantum optics: LDOS, reservoir mapping, "
                    "emission spectra and photon indistinguishability")
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker processes for sweeps")
    parser.add_argument("--seed", type=int, default=0,
                        help="recorded for provenance; the fit is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ldos = sub.add_parser("ldos", help="LDOS curve or (omega, gamma_f) map")
    p_ldos.add_argument("--position", type=float, default=0.0,
                        help="dimensionless emitter position in [-1, 1]")
    p_ldos.add_argument("--range", default=None, help="omega window 'lo..hi' (meV)")
    p_ldos.add_argument("--points", type=int, default=4001)
    p_ldos.add_argument("--gammaF-range", dest="gamma_f_range", default=None,
                        metavar="LO..HI:N", help="emit a 2-d LDOS map")
    p_ldos.add_argument("--fp-r", dest="fp_r", type=float, default=None,
                        help="replace the Fano mirror by a constant mirror r")

    sub.add_parser("fit", help="two-mode reservoir fit of the LDOS")
    sub.add_parser("spectrum", help="emission spectrum and indistinguishability")
    sub.add_parser("sweep", help="(omega_eg, gamma_f) indistinguishability map")
    sub.add_parser("fp", help="(omega_eg, r) Fabry-Perot baseline map")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        handler = {"ldos": cmd_ldos, "fit": cmd_fit, "spectrum": cmd_spectrum,
                   "sweep": cmd_sweep, "fp": cmd_fp}[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
