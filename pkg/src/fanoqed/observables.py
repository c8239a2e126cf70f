"""Emission spectra, Fano-mirror filtering and photon indistinguishability.

The two-colour dipole spectrum is the double Fourier transform

    S0(w, w') = int dt dt' e^{-i(w t - w' t')} <sigma^dag(t) sigma(t')>,

evaluated on the FFT-conjugate grid of the two-time correlation.  Filtering
through the structure uses S(w, w') = conj(G(w)) G(w') S0(w, w'), whose
diagonal is the observable spectrum; the indistinguishability is
I = [2P/Gamma0]^-2 * int |S|^2 with P = (Gamma0/2) int S(w, w) dw.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, ldos, mapping, phonons, scattering
from .errors import InfeasibleError
from .ldos import EmitterCoupling
from .mapping import FitOptions, MappedPair
from .scattering import CavityGeometry, FanoMirror

ALIASING_WARN_LEVEL = 1e-4


@dataclass
class Spectrum2D:
    """Two-colour spectrum S(w, w') on a uniform lab-frame frequency grid."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        n = len(self.omega)
        if self.values.shape != (n, n):
            raise ValueError("values must be square and match the omega grid")

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.values))

    @property
    def d_omega(self) -> float:
        return float(self.omega[1] - self.omega[0])


@dataclass
class IndistResult:
    """Photon indistinguishability and emitted energy."""

    indistinguishability: float
    delta: float
    p_emit: float
    diagnostics: dict = field(default_factory=dict)


def dipole_spectrum(grid: dynamics.TwoTimeGrid,
                    aliasing_warn: float = ALIASING_WARN_LEVEL) -> Spectrum2D:
    """Discrete double Fourier transform of the two-time correlation.

    Riemann weights dt^2 on the uniform grid; the rotating-frame content is
    shifted back to the lab frame through the frequency axis
    omega = omega_fft + omega_ref.
    """
    c = grid.values
    n = len(grid.t)
    dt = grid.t[1] - grid.t[0]
    # sum_m e^{-i u_k t_m} along axis 0 (fft); sum_n e^{+i u_l t_n} along
    # axis 1 (ifft times n)
    s0 = np.fft.fft(np.fft.ifft(c, axis=1), axis=0) * (dt * dt * n)
    s0 = np.fft.fftshift(s0)
    u = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=dt))
    diag = np.abs(np.real(np.diagonal(s0)))
    edge = int(max(1, np.ceil(0.02 * n)))
    edge_level = max(diag[:edge].max(), diag[-edge:].max()) / max(diag.max(), 1e-300)
    if edge_level > aliasing_warn:
        warnings.warn(f"spectral content at the grid edge is {edge_level:.2e} "
                      "of the peak; increase the bandwidth (smaller dt)")
    return Spectrum2D(omega=u + grid.omega_ref, values=s0)


def filter_spectrum(s0: Spectrum2D, green) -> Spectrum2D:
    """S(w, w') = conj(G(w)) G(w') S0(w, w') for a callable filter G."""
    g = np.asarray(green(s0.omega), dtype=complex)
    return Spectrum2D(omega=s0.omega,
                      values=np.conj(g)[:, None] * g[None, :] * s0.values)


def emitted_energy(spectrum: Spectrum2D, gamma0: float) -> float:
    """P = (Gamma0/2) int S(w, w) dw by trapezoid."""
    return float(0.5 * gamma0 * np.trapezoid(spectrum.diagonal(),
                                             dx=spectrum.d_omega))


def indistinguishability(spectrum: Spectrum2D, p_emit: float,
                         gamma0: float) -> IndistResult:
    """I = [2P/Gamma0]^-2 * iint |S(w,w')|^2 dw dw' by 2-d trapezoid."""
    dw = spectrum.d_omega
    norm = (2.0 * p_emit / gamma0) ** 2
    total = np.trapezoid(np.trapezoid(np.abs(spectrum.values) ** 2, dx=dw,
                                      axis=1), dx=dw)
    value = float(total / norm)
    return IndistResult(indistinguishability=value, delta=1.0 - value,
                        p_emit=p_emit,
                        diagnostics={"grid_points": len(spectrum.omega),
                                     "d_omega": dw})


# ---------------------------------------------------------------------------
# pipeline settings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsSettings:
    """Grid controls for the two-time propagation.

    dt/n_t = None selects the automatic rules: dt from the Nyquist span of
    the rotating-frame spectrum (eigenfrequencies, mode linewidths and the
    phonon sideband), n_t from the slowest decaying coherence so that the
    correlation at the final time is below decay_target.  The propagation
    itself is exact (eigendecomposition), so dt only controls sampling.
    """

    dt: float | None = None
    n_t: int | None = None
    n_t_min: int = 1024
    n_t_max: int = 8192
    dt_max: float = 0.1
    decay_target: float = 1e-4
    sideband_margin: float = 4.0    # bandwidth reserved for phonons, in nu_c

    def resolve_dt(self, h0: np.ndarray, pair: MappedPair | None,
                   nu_c: float | None) -> float:
        if self.dt is not None:
            return self.dt
        bandwidth = float(np.max(np.abs(np.linalg.eigvalsh(h0))))
        if pair is not None:
            bandwidth += max(pair.kappa_1, pair.kappa_2)
        if nu_c is not None:
            bandwidth += self.sideband_margin * nu_c
        return float(min(self.dt_max, np.pi / (2.0 * max(bandwidth, 1.0))))

    def resolve_n_t(self, liouv: dynamics.Liouvillian, dt: float) -> int:
        if self.n_t is not None:
            return self.n_t
        lam, s, s_inv, ok = liouv.eig()
        rho0 = np.zeros((liouv.dim, liouv.dim), dtype=complex)
        rho0[1, 1] = 1.0
        if ok:
            sigma = liouv.ops["sigma"]
            w = dynamics.vec(sigma).conj() @ s
            d0 = s_inv @ (dynamics.spre(sigma) @ dynamics.vec(rho0))
            weight = np.abs(w * d0)
            mask = weight > 1e-8 * max(weight.sum(), 1e-300)
            rates = -np.real(lam[mask])
            rate = float(np.min(rates[rates > 1e-14], initial=np.inf))
        else:
            rate = np.inf
        if not np.isfinite(rate):
            return self.n_t_min
        t_needed = 1.3 * np.log(1.0 / self.decay_target) / rate
        n = int(2 ** np.ceil(np.log2(max(t_needed / dt, 2.0))))
        return int(np.clip(n, self.n_t_min, self.n_t_max))


@dataclass
class EmissionResult:
    """Spectrum diagonal and indistinguishability for one pipeline run."""

    omega: np.ndarray
    spectrum: np.ndarray            # S(w, w) on the lab grid
    indist: IndistResult
    omega_eg: float
    diagnostics: dict = field(default_factory=dict)


def simulate_emission(pair: MappedPair, emitter: EmitterCoupling,
                      green, correlations: phonons.PhononCorrelations | None,
                      settings: DynamicsSettings = DynamicsSettings(),
                      n_modes: int = 2,
                      sigma_rate: float | None = None,
                      keep_spectrum: bool = False) -> EmissionResult:
    """Run the master-equation emission pipeline for one parameter point."""
    b0 = correlations.b0 if correlations is not None else 1.0
    h0 = dynamics.build_h0(pair, emitter, b0, n_modes=n_modes)
    if correlations is not None and correlations.env.alpha > 0:
        theta_x, theta_y = dynamics.theta_ops(h0, correlations, n_modes=n_modes)
        g_w = pair.g
    else:
        dim = h0.shape[0]
        theta_x = theta_y = np.zeros((dim, dim), dtype=complex)
        g_w = 0.0
    liouv = dynamics.build_liouvillian(
        h0, pair if n_modes else None, emitter, theta_x, theta_y, g_w,
        n_modes=n_modes, sigma_rate=sigma_rate,
        params={"omega_ref": emitter.omega_eg})
    nu_c = correlations.env.nu_c if correlations is not None else None
    dt = settings.resolve_dt(h0, pair if n_modes else None, nu_c)
    n_t = settings.resolve_n_t(liouv, dt)
    t = np.arange(n_t) * dt
    grid = dynamics.two_time_dipole(liouv, t, correlations=correlations)
    s0 = dipole_spectrum(grid)
    s = filter_spectrum(s0, green)
    p = emitted_energy(s, emitter.gamma0)
    res = indistinguishability(s, p, emitter.gamma0)
    diag = {"dt": dt, "n_t": n_t, **grid.diagnostics, **res.diagnostics}
    out = EmissionResult(omega=s.omega, spectrum=s.diagonal(),
                         indist=res, omega_eg=emitter.omega_eg,
                         diagnostics=diag)
    if keep_spectrum:
        out.diagnostics["spectrum2d"] = s
    return out


def bulk_emission(emitter: EmitterCoupling,
                  correlations: phonons.PhononCorrelations | None,
                  settings: DynamicsSettings = DynamicsSettings()) -> EmissionResult:
    """Emitter in the bare waveguide: no mirrors, unit filter.

    The emitter decays at Gamma0 + GammaR; the spectrum is the zero-phonon
    line plus the unshaped phonon sideband.
    """
    pair = MappedPair(g=0.0, omega_1=emitter.omega_eg, omega_2=emitter.omega_eg,
                      v0=0.0, varphi=0.0, kappa_1=0.0, kappa_2=0.0)
    return simulate_emission(
        pair, emitter, green=lambda w: np.ones_like(np.asarray(w, dtype=complex)),
        correlations=correlations, settings=settings, n_modes=0,
        sigma_rate=emitter.gamma0 + emitter.gamma_r)


# ---------------------------------------------------------------------------
# whole-structure pipelines
# ---------------------------------------------------------------------------

def fano_emission(mirror: FanoMirror, geometry: CavityGeometry,
                  emitter: EmitterCoupling,
                  env: phonons.PhononEnv | None,
                  fit_report: mapping.FitReport | None = None,
                  settings: DynamicsSettings = DynamicsSettings(),
                  fit_options: FitOptions | None = None,
                  keep_spectrum: bool = False) -> EmissionResult:
    """Map the Fano cavity, then run the emission pipeline."""
    if fit_report is None:
        fit_report = mapping.fit_cavity(mirror, geometry, emitter,
                                        options=fit_options)
    correlations = phonons.PhononCorrelations.from_env(env) if env else None

    def green(w):
        return scattering.green_function(mirror, geometry, w)

    out = simulate_emission(fit_report.pair, emitter, green, correlations,
                            settings=settings, keep_spectrum=keep_spectrum)
    out.diagnostics["fit_epsilon_rel"] = fit_report.epsilon_rel
    return out


def fp_baseline(r: float, geometry: CavityGeometry, emitter: EmitterCoupling,
                env: phonons.PhononEnv | None,
                settings: DynamicsSettings = DynamicsSettings(),
                keep_spectrum: bool = False) -> EmissionResult:
    """Equivalent Fabry-Perot pipeline: single extracted mode plus FP filter."""
    pole, kappa, g = mapping.fp_single_mode(r, geometry, emitter,
                                            near=emitter.omega_eg)
    pair = MappedPair(g=g, omega_1=pole.z.real, omega_2=pole.z.real,
                      v0=0.0, varphi=0.0, kappa_1=kappa, kappa_2=0.0)
    correlations = phonons.PhononCorrelations.from_env(env) if env else None

    def green(w):
        return scattering.fp_green_function(r, geometry, w)

    out = simulate_emission(pair, emitter, green, correlations,
                            settings=settings, n_modes=1,
                            keep_spectrum=keep_spectrum)
    out.diagnostics["fp_mode"] = {"omega_c": pole.z.real, "kappa": kappa, "g": g}
    return out


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepRow:
    omega_eg: float
    parameter: float               # gamma_f for the Fano sweep, r for FP
    indistinguishability: float
    delta: float
    p_emit: float
    status: str


@dataclass
class SweepResult:
    rows: list
    trace: list                    # (parameter, omega_peak) pairs
    meta: dict = field(default_factory=dict)

    def min_delta_row(self) -> SweepRow:
        ok = [r for r in self.rows if r.status == "ok"]
        if not ok:
            # fall back to truncation-warned points; error rows carry no value
            ok = [r for r in self.rows if np.isfinite(r.delta)]
        if not ok:
            raise InfeasibleError("sweep produced no successful points")
        return min(ok, key=lambda r: r.delta)


def _fano_group(args):
    """Worker: fit one gamma_f, then run every emitter frequency of the group."""
    (gamma_f, mirror_kw, geometry, emitter_kw, env, offsets, absolute,
     settings, fit_options) = args
    mirror = FanoMirror.symmetric(gamma_f=gamma_f, **mirror_kw)
    probe = EmitterCoupling(omega_eg=mirror.omega_f, **emitter_kw)
    rows = []
    try:
        report = mapping.fit_cavity(mirror, geometry, probe, options=fit_options)
        window = report.window
        grid = np.linspace(window[0], window[1], 20001)
        j_curve = ldos.ldos_midpoint(mirror, geometry, probe, grid)
        w_peak, w_dip = ldos.peak_and_dip(grid, j_curve)
    except Exception as exc:   # noqa: BLE001 - recorded per point, never fatal
        name = type(exc).__name__
        targets = offsets if not absolute else offsets
        return [SweepRow(float(w), gamma_f, np.nan, np.nan, np.nan,
                         f"error:{name}") for w in targets], (gamma_f, np.nan)
    correlations = phonons.PhononCorrelations.from_env(env) if env else None
    for off in offsets:
        omega_eg = float(off) if absolute else float(w_peak + off)
        emitter = EmitterCoupling(omega_eg=omega_eg, **emitter_kw)
        try:
            def green(w, m=mirror, geo=geometry):
                return scattering.green_function(m, geo, w)

            out = simulate_emission(report.pair, emitter, green, correlations,
                                    settings=settings)
            status = "ok" if out.diagnostics.get("coverage_ok", True) \
                else "warn_coverage"
            rows.append(SweepRow(omega_eg, gamma_f,
                                 out.indist.indistinguishability,
                                 out.indist.delta, out.indist.p_emit, status))
        except Exception as exc:   # noqa: BLE001
            rows.append(SweepRow(omega_eg, gamma_f, np.nan, np.nan, np.nan,
                                 f"error:{type(exc).__name__}"))
    return rows, (gamma_f, float(w_peak))


def _fp_group(args):
    """Worker: extract one FP mode, then run every emitter frequency."""
    (r, geometry, emitter_kw, env, offsets, absolute, settings, near) = args
    rows = []
    try:
        probe = EmitterCoupling(omega_eg=near, **emitter_kw)
        pole, kappa, g = mapping.fp_single_mode(r, geometry, probe, near=near)
    except Exception as exc:   # noqa: BLE001
        name = type(exc).__name__
        return [SweepRow(float(w), r, np.nan, np.nan, np.nan,
                         f"error:{name}") for w in offsets], (r, np.nan)
    correlations = phonons.PhononCorrelations.from_env(env) if env else None
    pair = MappedPair(g=g, omega_1=pole.z.real, omega_2=pole.z.real,
                      v0=0.0, varphi=0.0, kappa_1=kappa, kappa_2=0.0)
    for off in offsets:
        omega_eg = float(off) if absolute else float(pole.z.real + off)
        emitter = EmitterCoupling(omega_eg=omega_eg, **emitter_kw)
        try:
            def green(w, rr=r, geo=geometry):
                return scattering.fp_green_function(rr, geo, w)

            out = simulate_emission(pair, emitter, green, correlations,
                                    settings=settings, n_modes=1)
            status = "ok" if out.diagnostics.get("coverage_ok", True) \
                else "warn_coverage"
            rows.append(SweepRow(omega_eg, r, out.indist.indistinguishability,
                                 out.indist.delta, out.indist.p_emit, status))
        except Exception as exc:   # noqa: BLE001
            rows.append(SweepRow(omega_eg, r, np.nan, np.nan, np.nan,
                                 f"error:{type(exc).__name__}"))
    return rows, (r, float(pole.z.real))


def _run_groups(worker, group_args, n_workers: int) -> SweepResult:
    results = []
    if n_workers <= 1 or len(group_args) <= 1:
        for args in group_args:
            results.append(worker(args))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(worker, group_args))
    rows, trace = [], []
    for group_rows, trace_point in results:
        rows.extend(group_rows)
        trace.append(trace_point)
    return SweepResult(rows=rows, trace=trace)


def sweep(mirror_template: FanoMirror, geometry: CavityGeometry,
          emitter_template: EmitterCoupling, env: phonons.PhononEnv | None,
          gamma_f_values, omega_eg_offsets, absolute: bool = False,
          settings: DynamicsSettings = DynamicsSettings(n_t=4096),
          fit_options: FitOptions | None = None,
          n_workers: int = 1) -> SweepResult:
    """Indistinguishability map over (omega_eg, gamma_f).

    One spectral-density fit per gamma_f; emitter frequencies are either
    absolute or offsets from the per-gamma_f LDOS peak (so that offset 0
    follows the peak trace exactly).
    """
    mirror_kw = {"r_b": mirror_template.r_b, "gamma_0": mirror_template.gamma_0,
                 "omega_f": mirror_template.omega_f,
                 "parity": mirror_template.parity}
    emitter_kw = {"gamma0": emitter_template.gamma0,
                  "gamma_r": emitter_template.gamma_r}
    group_args = [(float(gf), mirror_kw, geometry, emitter_kw, env,
                   np.asarray(omega_eg_offsets, dtype=float), absolute,
                   settings, fit_options)
                  for gf in gamma_f_values]
    result = _run_groups(_fano_group, group_args, n_workers)
    result.meta = {"kind": "fano", "absolute": absolute}
    return result


def fp_sweep(geometry: CavityGeometry, emitter_template: EmitterCoupling,
             env: phonons.PhononEnv | None, r_values, omega_eg_offsets,
             near: float, absolute: bool = False,
             settings: DynamicsSettings = DynamicsSettings(n_t=4096),
             n_workers: int = 1) -> SweepResult:
    """Indistinguishability map over (omega_eg, r) for the FP baseline."""
    emitter_kw = {"gamma0": emitter_template.gamma0,
                  "gamma_r": emitter_template.gamma_r}
    group_args = [(float(r), geometry, emitter_kw, env,
                   np.asarray(omega_eg_offsets, dtype=float), absolute,
                   settings, near)
                  for r in r_values]
    result = _run_groups(_fp_group, group_args, n_workers)
    result.meta = {"kind": "fp", "absolute": absolute}
    return result
