"""Phonon environment tests: closed-form oracles for the quadratures."""

import math

import numpy as np
import pytest

from fanoqed import (ConvergenceError, PhononCorrelations, PhononEnv,
                     franck_condon, lambda_x, lambda_y, phi, phonon_sd,
                     polaron_shift)

STUDY_ENV = PhononEnv(alpha=0.069, nu_c=1.45, temperature=4.0)
COLD_ENV = PhononEnv(alpha=0.069, nu_c=1.45, temperature=0.0)


def test_spectral_density_values():
    assert phonon_sd(STUDY_ENV, 0.0) == 0.0
    # maximum at nu_c sqrt(3/2)
    nu = np.linspace(0.0, 8 * STUDY_ENV.nu_c, 200_001)
    nu_max = nu[np.argmax(phonon_sd(STUDY_ENV, nu))]
    assert nu_max == pytest.approx(STUDY_ENV.nu_c * math.sqrt(1.5), rel=1e-4)
    # direct evaluation at 1 meV
    expected = 0.069 * math.exp(-1.0 / 1.45**2)
    assert phonon_sd(STUDY_ENV, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.04290, abs=5e-5)
    with pytest.raises(ValueError):
        phonon_sd(STUDY_ENV, -1.0)


def test_phi_zero_temperature_closed_form():
    # T = 0: phi(0) = alpha nu_c^2 / 2 (Gaussian integral)
    expected = 0.069 * 1.45**2 / 2.0
    assert np.real(phi(COLD_ENV, 0.0)) == pytest.approx(expected, rel=1e-10)
    assert expected == pytest.approx(0.07254, abs=1e-5)
    assert np.imag(phi(COLD_ENV, 0.0)) == 0.0


def test_phi_decay_and_symmetry():
    tau_decay = 20.0 / STUDY_ENV.nu_c
    phi0 = np.real(phi(STUDY_ENV, 0.0))
    assert abs(phi(STUDY_ENV, tau_decay)) < 1e-6 * phi0
    taus = np.array([0.3, 1.1, 2.7])
    assert np.allclose(phi(STUDY_ENV, -taus), np.conj(phi(STUDY_ENV, taus)),
                       atol=1e-15)


def test_phi_quadrature_budget():
    with pytest.raises(ConvergenceError):
        phi(STUDY_ENV, 1.0, rtol=1e-30, max_panels=8)


def test_franck_condon():
    assert franck_condon(PhononEnv(alpha=0.0, nu_c=1.45, temperature=4.0)) == 1.0
    # T = 0 closed form exp(-alpha nu_c^2 / 4)
    expected = math.exp(-0.069 * 1.45**2 / 4.0)
    assert franck_condon(COLD_ENV) == pytest.approx(expected, rel=1e-10)
    assert expected == pytest.approx(0.9644, abs=1e-4)
    # B0 decreases with temperature
    b = [franck_condon(PhononEnv(alpha=0.069, nu_c=1.45, temperature=t))
         for t in (0.0, 4.0, 10.0)]
    assert b[0] > b[1] > b[2]
    assert all(0.0 < x <= 1.0 for x in b)


def test_lambda_functions():
    env0 = PhononEnv(alpha=0.0, nu_c=1.45, temperature=4.0)
    taus = np.linspace(0.0, 5.0, 7)
    assert np.max(np.abs(lambda_x(env0, taus))) == 0.0
    assert np.max(np.abs(lambda_y(env0, taus))) == 0.0
    # tau = 0, T = 0 value against the closed-form oracle
    phi0 = 0.069 * 1.45**2 / 2.0
    b0 = math.exp(-phi0 / 2.0)
    expected = b0**2 * (math.cosh(phi0) - 1.0)
    assert np.real(lambda_x(COLD_ENV, 0.0)) == pytest.approx(expected,
                                                             rel=1e-9)
    assert expected == pytest.approx(0.002447, abs=3e-6)
    # identity Lambda_X + Lambda_Y = B0^2 (e^phi - 1)
    b0_study = franck_condon(STUDY_ENV)
    total = lambda_x(STUDY_ENV, taus) + lambda_y(STUDY_ENV, taus)
    expected_total = b0_study**2 * (np.exp(phi(STUDY_ENV, taus)) - 1.0)
    assert np.max(np.abs(total - expected_total)) < 1e-14


def test_polaron_shift():
    assert polaron_shift(PhononEnv(alpha=0.0, nu_c=1.45)) == 0.0
    closed = 0.069 * math.sqrt(math.pi) * 1.45**3 / 4.0
    assert polaron_shift(STUDY_ENV) == pytest.approx(closed, rel=1e-10)
    assert closed == pytest.approx(0.0932, abs=1e-4)


def test_correlations_bundle(tmp_path):
    corr = PhononCorrelations.from_env(STUDY_ENV)
    assert corr.b0 == pytest.approx(franck_condon(STUDY_ENV), rel=1e-12)
    assert corr.decay_time() > 0
    # the bundle evaluates the same functions as the module level API
    taus = np.array([0.0, 0.5, 2.0])
    assert np.allclose(corr.lambda_x(taus), lambda_x(STUDY_ENV, taus))
    assert np.allclose(corr.lambda_y(taus), lambda_y(STUDY_ENV, taus))
    from fanoqed.phonons import write_correlations_csv
    write_correlations_csv(corr, taus, str(tmp_path / "corr"))
    text = (tmp_path / "corr_phi.csv").read_text().splitlines()
    assert text[0] == "tau_ps,re,im"
    assert len(text) == 4


def test_env_validation():
    with pytest.raises(ValueError):
        PhononEnv(alpha=-0.1, nu_c=1.0)
    with pytest.raises(ValueError):
        PhononEnv(alpha=0.1, nu_c=-1.0)
    with pytest.raises(ValueError):
        PhononEnv(alpha=0.1, nu_c=1.0, temperature=-4.0)
