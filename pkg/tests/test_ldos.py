"""LDOS tests: closed forms, Fabry-Perot limits and Fano-cavity structure."""

import math

import numpy as np
import pytest

from fanoqed import (CavityGeometry, DegeneracyError, EmitterCoupling,
                     FanoMirror, fp_ldos, ldos_at, ldos_midpoint)
from fanoqed.ldos import SpectralCurve, default_grid, peak_and_dip
from fanoqed.mapping import fp_single_mode

FSR = 10.0
GEO = CavityGeometry(fsr=FSR)
EMITTER = EmitterCoupling(gamma0=6e-4, gamma_r=3e-5, omega_eg=100.0)


def reference_mirror(gamma_f=0.15 * FSR):
    omega_0 = 101 * np.pi * FSR
    return FanoMirror.symmetric(r_b=-1 / math.sqrt(2), gamma_f=gamma_f,
                                gamma_0=1e-3 * FSR,
                                omega_f=omega_0 - 0.02 * np.pi * FSR)


def test_open_right_mirror_closed_form():
    # r = 0, r0 = -1: J = Gamma0 (1 - cos(w/Delta)); J(pi Delta) = 2 Gamma0
    omega = np.linspace(0.1, 40.0, 2001)
    j = fp_ldos(0.0, GEO, EMITTER, omega)
    expected = EMITTER.gamma0 * (1.0 - np.cos(omega / FSR))
    assert np.max(np.abs(j - expected)) < 1e-15
    assert fp_ldos(0.0, GEO, EMITTER, np.pi * FSR) == pytest.approx(
        2 * EMITTER.gamma0, rel=1e-12)


def test_no_mirrors_gives_bare_rate():
    geo_open = CavityGeometry(fsr=FSR, r0=0.0)
    omega = np.linspace(1.0, 50.0, 501)
    j = fp_ldos(0.0, geo_open, EMITTER, omega)
    assert np.max(np.abs(j - EMITTER.gamma0)) < 1e-15


def test_midpoint_equals_ldos_at_zero():
    mirror = reference_mirror()
    omega = np.linspace(mirror.omega_f - 15.0, mirror.omega_f + 15.0, 10_000)
    a = ldos_midpoint(mirror, GEO, EMITTER, omega)
    b = ldos_at(mirror, GEO, EMITTER, 0.0, omega)
    assert np.max(np.abs(a - b)) == 0.0


def test_peak_and_dip_structure():
    mirror = reference_mirror()
    omega_0 = 101 * np.pi * FSR
    omega = np.linspace(omega_0 - np.pi * FSR / 2, omega_0 + np.pi * FSR / 2,
                        40_001)
    j = ldos_midpoint(mirror, GEO, EMITTER, omega)
    w_peak, w_dip = peak_and_dip(omega, j)
    j_peak = j[np.argmin(np.abs(omega - w_peak))]
    j_dip = j[np.argmin(np.abs(omega - w_dip))]
    assert w_dip < w_peak                       # dip red-detuned from peak
    assert j_dip < 0.1 * EMITTER.gamma0         # near-zero dip
    assert j_peak > 50 * EMITTER.gamma0         # sharp resonance


def test_dip_peak_crossing_and_linewidth_minimum():
    # scanning gamma_f moves the anti-resonance across the peak; at the
    # crossing the pole linewidth is limited by the intrinsic loss only
    from fanoqed.mapping import cavity_pole_equation, default_pole_seeds, find_poles
    gammas = np.linspace(0.05, 0.5, 26) * FSR
    side = []
    narrow_im = []
    omega_0 = 101 * np.pi * FSR
    for gf in gammas:
        mirror = reference_mirror(gamma_f=gf)
        omega = np.linspace(omega_0 - np.pi * FSR / 2,
                            omega_0 + np.pi * FSR / 2, 20_001)
        j = ldos_midpoint(mirror, GEO, EMITTER, omega)
        w_peak, w_dip = peak_and_dip(omega, j)
        side.append(np.sign(w_dip - w_peak))
        den, dden = cavity_pole_equation(mirror, GEO)
        seeds = default_pole_seeds(mirror, GEO)
        poles = find_poles(den, seeds, dden=dden)
        narrow_im.append(min(abs(p.imag) for p in poles))
    side = np.asarray(side)
    assert side[0] != side[-1]                  # the dip crosses the peak
    i_cross = int(np.nonzero(side != side[0])[0][0])
    i_min = int(np.argmin(narrow_im))
    assert abs(i_min - i_cross) <= 2            # narrowest pole at the crossing
    assert min(narrow_im) < 3 * mirror.gamma_0  # gamma_0-limited lifetime


def test_sum_rule_over_one_fsr():
    # constant-mirror cavity: integral of J over a peak-centred angular FSR
    # equals Gamma0 * pi * Delta (numerical quadrature oracle)
    r = abs(-1 / math.sqrt(2))
    omega = np.linspace(800.0, 900.0, 400_001)
    j = fp_ldos(r, GEO, EMITTER, omega)
    w_pk = omega[np.argmax(j)]
    lo, hi = w_pk - np.pi * FSR / 2, w_pk + np.pi * FSR / 2
    mask = (omega >= lo) & (omega <= hi)
    integral = np.trapezoid(j[mask], omega[mask])
    assert integral == pytest.approx(EMITTER.gamma0 * np.pi * FSR, rel=0.02)


def test_fp_peak_height_and_width():
    r = 0.99
    omega = np.linspace(1000.0, 1000.0 + np.pi * FSR, 200_001)
    j = fp_ldos(r, GEO, EMITTER, omega)
    peak = j.max()
    # leading-order peak height 2 Gamma0 / (1 - r); exact (1+r)/(1-r)
    assert peak == pytest.approx(EMITTER.gamma0 * (1 + r) / (1 - r), rel=1e-3)
    assert peak == pytest.approx(2 * EMITTER.gamma0 / (1 - r), rel=0.01)
    # FWHM matches the extracted single-mode linewidth within 5 %
    i_pk = int(np.argmax(j))
    above = j > peak / 2
    i0 = i_pk
    while above[i0]:
        i0 -= 1
    i1 = i_pk
    while above[i1]:
        i1 += 1
    fwhm = omega[i1] - omega[i0]
    emitter = EmitterCoupling(gamma0=EMITTER.gamma0, gamma_r=EMITTER.gamma_r,
                              omega_eg=omega[i_pk])
    _, kappa, _ = fp_single_mode(r, GEO, emitter, near=omega[i_pk])
    assert fwhm == pytest.approx(kappa, rel=0.05)


def test_nonnegative_for_physical_parameters():
    rng = np.random.default_rng(11)
    omega_0 = 101 * np.pi * FSR
    for _ in range(10):
        r_b = rng.uniform(-0.9, -0.1)
        gf = rng.uniform(0.05, 0.4) * FSR
        g0 = rng.uniform(0.0, 0.05) * FSR
        mirror = FanoMirror.symmetric(r_b=r_b, gamma_f=gf, gamma_0=g0,
                                      omega_f=omega_0, parity=int(rng.choice([1, -1])))
        omega = np.linspace(omega_0 - 15.0, omega_0 + 15.0, 8001)
        j = ldos_midpoint(mirror, GEO, EMITTER, omega)
        assert j.min() > -1e-12 * j.max()


def test_periodic_fp_peaks_far_from_resonance():
    # Fabry-Perot limit: resonances separated by the angular FSR pi*Delta
    omega = np.linspace(1000.0, 1000.0 + 10 * np.pi * FSR, 800_001)
    j = fp_ldos(0.95, GEO, EMITTER, omega)
    peaks = [omega[k] for k in range(1, len(omega) - 1)
             if j[k] > j[k - 1] and j[k] > j[k + 1] and j[k] > 10 * EMITTER.gamma0]
    spacing = np.diff(peaks)
    assert len(spacing) >= 5
    assert np.max(np.abs(spacing - np.pi * FSR)) < 0.01 * np.pi * FSR
    # Fano cavity far from omega_F: every detected peak sits on the same
    # pi*Delta resonance comb (at the midpoint every other comb tooth is a
    # node of the emitter coupling, so spacings are integer comb multiples)
    mirror = reference_mirror()
    omega = np.linspace(mirror.omega_f - 45 * np.pi * FSR,
                        mirror.omega_f - 25 * np.pi * FSR, 800_001)
    j = ldos_midpoint(mirror, GEO, EMITTER, omega)
    peaks = np.array([omega[k] for k in range(1, len(omega) - 1)
                      if j[k] > j[k - 1] and j[k] > j[k + 1]
                      and j[k] > 2 * EMITTER.gamma0])
    assert len(peaks) >= 5
    multiples = np.diff(peaks) / (np.pi * FSR)
    assert np.max(np.abs(multiples - np.round(multiples))) < 0.01


def test_node_at_the_perfect_left_mirror():
    # at x = -1 the emitter sits on the r0 = -1 mirror: the field vanishes
    mirror = reference_mirror()
    omega = np.linspace(mirror.omega_f - 10.0, mirror.omega_f + 10.0, 501)
    j = ldos_at(mirror, GEO, EMITTER, -1.0, omega)
    assert np.max(np.abs(j)) < 1e-12 * EMITTER.gamma0


def test_degeneracy_error():
    with pytest.raises(DegeneracyError):
        fp_ldos(1.0, GEO, EMITTER, np.array([np.pi * FSR * 10.5]), floor=1e-8)


def test_position_bounds_and_curve_validation(tmp_path):
    mirror = reference_mirror()
    with pytest.raises(ValueError):
        ldos_at(mirror, GEO, EMITTER, 1.5, np.array([100.0]))
    with pytest.raises(ValueError):
        SpectralCurve(np.array([1.0, 0.5]), np.array([0.0, 0.0]))
    curve = SpectralCurve(np.array([1.0, 2.0]), np.array([0.5, 0.25]))
    path = tmp_path / "curve.csv"
    curve.write_csv(path, gamma0=0.5, header_comment="config_hash=abc")
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=abc"
    assert lines[1] == "omega_meV,J_over_Gamma0"
    assert float(lines[2].split(",")[1]) == pytest.approx(1.0)


def test_default_grid_resolution():
    grid = default_grid((0.0, 10.0), narrowest_linewidth=0.05)
    # at least 40 points per linewidth
    assert (grid[1] - grid[0]) <= 0.05 / 40
    assert len(default_grid((0.0, 10.0), 1e-9)) <= 400_001
