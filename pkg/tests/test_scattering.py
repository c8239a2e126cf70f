"""Fano-mirror S-matrix and Green's function tests."""

import math

import numpy as np
import pytest

from fanoqed import (CavityGeometry, DegeneracyError, FanoMirror,
                     fano_reflectivity, fano_transmittivity,
                     fp_green_function, green_function, mirror_phases)
from fanoqed.scattering import fano_reflectivity_derivative

SQ2 = math.sqrt(2.0)


def canonical_mirror(gamma_f=1.5, gamma_0=0.0, omega_f=100.0):
    return FanoMirror.symmetric(r_b=-1 / SQ2, gamma_f=gamma_f, gamma_0=gamma_0,
                                omega_f=omega_f, parity=+1)


def test_symmetric_phase_relations():
    mirror = canonical_mirror()
    theta_1, factor = mirror_phases(mirror, chi=1.0)
    assert math.cos(2 * theta_1) == pytest.approx(-mirror.r_b, abs=1e-14)
    assert math.sin(2 * theta_1) == pytest.approx(mirror.parity * mirror.t_b,
                                                  abs=1e-14)
    assert factor == pytest.approx(mirror.parity, abs=1e-14)


def test_asymmetric_reduces_to_symmetric_at_chi_one():
    rng = np.random.default_rng(7)
    for _ in range(20):
        r_b = rng.uniform(-0.95, 0.95)
        if abs(r_b) < 0.05:
            continue
        parity = rng.choice([-1, 1])
        mirror = FanoMirror.symmetric(r_b=r_b, gamma_f=1.0, gamma_0=0.0,
                                      omega_f=50.0, parity=int(parity))
        theta_1, factor = mirror_phases(mirror, chi=1.0)
        assert math.cos(2 * theta_1) == pytest.approx(-r_b, abs=1e-12)
        assert math.sin(2 * theta_1) == pytest.approx(parity * mirror.t_b,
                                                      abs=1e-12)
        assert abs(factor - parity) < 1e-12


def test_chi_two_phase_value():
    # direct substitution: cos 2 theta_1 = (t_b^2 / 2 r_b)(chi - 1) - r_b
    mirror = canonical_mirror()
    theta_1, _ = mirror_phases(mirror, chi=2.0)
    assert math.cos(2 * theta_1) == pytest.approx(1.0 / (2.0 * SQ2), abs=1e-14)
    assert math.cos(2 * theta_1) ** 2 + math.sin(2 * theta_1) ** 2 == \
        pytest.approx(1.0, abs=1e-14)


def test_phase_domain_errors():
    mirror = canonical_mirror()
    with pytest.raises(ValueError):
        # t_b close to 1 makes the square-root argument negative at large chi
        weak = FanoMirror.symmetric(r_b=-0.1, gamma_f=1.0, gamma_0=0.0,
                                    omega_f=50.0)
        mirror_phases(weak, chi=5.0)
    with pytest.raises(ValueError):
        full = FanoMirror.symmetric(r_b=0.0 + 1e-300, gamma_f=1.0, gamma_0=0.0,
                                    omega_f=50.0)
        object.__setattr__(full, "r_b", 0.0)
        mirror_phases(full, chi=1.0)


def test_reflectivity_resonance_and_zero():
    mirror = canonical_mirror(gamma_f=1.5, gamma_0=0.0)
    # on resonance: r_F = i P t_B
    assert fano_reflectivity(mirror, mirror.omega_f) == pytest.approx(
        1j / SQ2, abs=1e-12)
    # anti-resonance zero at detuning 2 gamma_f P t_b / r_b = -2 gamma_f
    zero = mirror.omega_f + 2 * mirror.gamma_1 * mirror.parity * mirror.t_b / mirror.r_b
    assert zero == pytest.approx(mirror.omega_f - 2 * mirror.gamma_1)
    assert abs(fano_reflectivity(mirror, zero)) < 1e-12
    # far detuned: background values
    assert fano_reflectivity(mirror, mirror.omega_f + 1e9) == pytest.approx(
        mirror.r_b, abs=1e-6)
    assert fano_transmittivity(mirror, mirror.omega_f + 1e9) == pytest.approx(
        -1j * mirror.t_b, abs=1e-6)


def test_transmittivity_resonance():
    mirror = canonical_mirror(gamma_0=0.0)
    t_res = fano_transmittivity(mirror, mirror.omega_f)
    assert t_res == pytest.approx(-mirror.parity * mirror.r_b, abs=1e-12)
    r_res = fano_reflectivity(mirror, mirror.omega_f)
    assert abs(r_res) ** 2 + abs(t_res) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("chi", [0.5, 1.0, 2.0])
def test_flux_conservation(chi):
    mirror = FanoMirror(r_b=-1 / SQ2, gamma_1=1.0, gamma_2=chi, gamma_0=0.0,
                        omega_f=100.0, parity=+1)
    omega = np.linspace(50.0, 150.0, 10_000)
    u = (np.abs(fano_reflectivity(mirror, omega, chi)) ** 2
         + np.abs(fano_transmittivity(mirror, omega, chi)) ** 2)
    assert np.max(np.abs(u - 1.0)) < 1e-12


def test_parity_flip_mirrors_the_zero():
    for parity in (+1, -1):
        mirror = FanoMirror.symmetric(r_b=-1 / SQ2, gamma_f=1.0, gamma_0=0.0,
                                      omega_f=100.0, parity=parity)
        zero = mirror.omega_f + 2 * mirror.gamma_1 * parity * mirror.t_b / mirror.r_b
        assert abs(fano_reflectivity(mirror, zero)) < 1e-12
    # the two zeros are mirror images about omega_f
    m_plus = canonical_mirror(gamma_f=1.0)
    z_plus = m_plus.omega_f - 2.0
    z_minus = m_plus.omega_f + 2.0
    m_minus = FanoMirror.symmetric(r_b=-1 / SQ2, gamma_f=1.0, gamma_0=0.0,
                                   omega_f=100.0, parity=-1)
    assert abs(fano_reflectivity(m_plus, z_plus)) < 1e-12
    assert abs(fano_reflectivity(m_minus, z_minus)) < 1e-12


def test_single_simple_pole_by_argument_principle():
    mirror = canonical_mirror(gamma_f=1.2, gamma_0=0.3)
    pole = mirror.omega_f - 1j * mirror.gamma_t
    # winding of r_F' / r_F on a small circle that excludes the zero
    radius = 0.3
    phi = 2 * np.pi * np.arange(4096) / 4096
    ring = pole + radius * np.exp(1j * phi)
    vals = fano_reflectivity_derivative(mirror, ring) / fano_reflectivity(
        mirror, ring)
    winding = np.sum(vals * 1j * radius * np.exp(1j * phi)) * (2 * np.pi / 4096)
    assert winding / (2j * np.pi) == pytest.approx(-1.0, abs=1e-8)


def test_green_function_zeros_and_floor():
    geometry = CavityGeometry(fsr=10.0)
    mirror = canonical_mirror(gamma_f=1.5, gamma_0=0.01, omega_f=100.0)
    # numerator zero where 1 + r0 e^{i w / Delta} = 0, i.e. w = 2 pi k Delta
    w_node = 2 * np.pi * 2 * geometry.fsr
    assert abs(green_function(mirror, geometry, w_node)) < 1e-10
    # FP r = 0: G = 1 + r0 e^{i w/Delta}
    omega = np.linspace(90.0, 110.0, 101)
    g = fp_green_function(0.0, geometry, omega)
    expected = 1.0 + geometry.r0 * np.exp(1j * omega / geometry.fsr)
    assert np.max(np.abs(g - expected)) < 1e-14
    # r = 1: no transmission anywhere (checked off the degenerate resonances)
    g1 = fp_green_function(1.0, geometry, omega + 0.1)
    assert np.max(np.abs(g1)) == 0.0
    # degenerate denominator trips the floor
    w_res = np.pi * geometry.fsr * 10.5
    with pytest.raises(DegeneracyError):
        fp_green_function(0.999999999, geometry,
                          np.array([w_res]), floor=1e-8)


def test_fp_green_peaks_at_odd_roundtrip_phase():
    geometry = CavityGeometry(fsr=10.0)
    omega = np.linspace(1000.0, 1000.0 + 2 * np.pi * 10.0, 40_001)
    g2 = np.abs(fp_green_function(0.99, geometry, omega)) ** 2
    w_pk = omega[np.argmax(g2)]
    # 2 w / Delta = pi mod 2 pi at resonance
    phase = np.mod(2 * w_pk / geometry.fsr, 2 * np.pi)
    assert phase == pytest.approx(np.pi, abs=1e-2)


def test_green_peak_tracks_ldos_peak():
    from fanoqed import EmitterCoupling, ldos_midpoint
    mirror = canonical_mirror(gamma_f=1.5, gamma_0=0.01,
                              omega_f=101 * np.pi * 10.0 - 0.2 * np.pi)
    geometry = CavityGeometry(fsr=10.0)
    emitter = EmitterCoupling(gamma0=6e-4, gamma_r=0.0,
                              omega_eg=mirror.omega_f)
    omega = np.linspace(mirror.omega_f - 15.0, mirror.omega_f + 15.0, 30_001)
    j = ldos_midpoint(mirror, geometry, emitter, omega)
    g2 = np.abs(green_function(mirror, geometry, omega)) ** 2
    w_j = omega[np.argmax(j)]
    w_g = omega[np.argmax(g2)]
    fwhm_scale = 0.5  # both peak within a fraction of the resonance linewidth
    assert abs(w_j - w_g) < fwhm_scale


def test_mirror_validation():
    with pytest.raises(ValueError):
        FanoMirror.symmetric(r_b=1.5, gamma_f=1.0, gamma_0=0.0, omega_f=1.0)
    with pytest.raises(ValueError):
        FanoMirror.symmetric(r_b=0.5, gamma_f=-1.0, gamma_0=0.0, omega_f=1.0)
    with pytest.raises(ValueError):
        FanoMirror(r_b=0.5, gamma_1=1.0, gamma_2=1.0, gamma_0=0.0, omega_f=1.0,
                   parity=2)
    with pytest.raises(ValueError):
        CavityGeometry(fsr=-1.0)
    with pytest.raises(ValueError):
        CavityGeometry(fsr=1.0, x_tilde=1.5)
