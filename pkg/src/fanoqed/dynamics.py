"""Polaron-frame master equation on the single-excitation Hilbert space.

Basis ordering: |g,vac>, |e,vac>, then one state per photon mode with a
single excitation ( |g,1,0>, |g,0,1> for the two-mode network ).  All
Hamiltonian and jump operators conserve or lower the total excitation
number, so this subspace is exact for an initially excited emitter.

Density operators are vectorized by column stacking, vec(A rho B) =
kron(B.T, A) vec(rho).  Propagation uses the eigendecomposition of the
Liouvillian, with a dense matrix-exponential fallback when the spectral
decomposition is ill-conditioned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ConvergenceError
from .ldos import EmitterCoupling
from .mapping import MappedPair, mapped_spectral_density
from .phonons import PhononCorrelations, half_fourier_nodes

COVERAGE_WARN_LEVEL = 1e-4


# ---------------------------------------------------------------------------
# operators and superoperators
# ---------------------------------------------------------------------------

def single_excitation_ops(n_modes: int = 2) -> dict:
    """Restricted operators on the (2 + n_modes)-dimensional basis."""
    if n_modes not in (0, 1, 2):
        raise ValueError("n_modes must be 0, 1 or 2")
    dim = 2 + n_modes
    sigma = np.zeros((dim, dim), dtype=complex)
    sigma[0, 1] = 1.0                      # |g,vac><e,vac|
    modes = []
    for m in range(n_modes):
        a = np.zeros((dim, dim), dtype=complex)
        a[0, 2 + m] = 1.0                  # |g,vac><g,1_m|
        modes.append(a)
    number = np.diag([0.0] + [1.0] * (dim - 1)).astype(complex)
    return {"dim": dim, "sigma": sigma, "modes": modes, "number": number}


def xy_ops(n_modes: int = 2):
    """Emitter-mode quadrature operators X = s*a1 + h.c., Y = i(s*a1 - h.c.)."""
    ops = single_excitation_ops(n_modes)
    if n_modes == 0:
        dim = ops["dim"]
        return np.zeros((dim, dim), complex), np.zeros((dim, dim), complex)
    sda = ops["sigma"].conj().T @ ops["modes"][0]     # sigma^dag a_1
    x = sda + sda.conj().T
    y = 1j * (sda - sda.conj().T)
    return x, y


def spre(a: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(a.shape[0]), a)


def spost(a: np.ndarray) -> np.ndarray:
    return np.kron(a.T, np.eye(a.shape[0]))


def lindblad_dissipator(c: np.ndarray) -> np.ndarray:
    """Superoperator for D[c] rho = c rho c^dag - {c^dag c, rho}/2."""
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).flatten(order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


# ---------------------------------------------------------------------------
# Hamiltonian and phonon scattering operators
# ---------------------------------------------------------------------------

def build_h0(pair: MappedPair, emitter: EmitterCoupling, b0: float,
             n_modes: int = 2, rotating_at: float | None = None) -> np.ndarray:
    """System Hamiltonian: emitter, mapped modes, B0-renormalized coupling.

    H = w_eg s+s- + sum_i w_i a_i^dag a_i + B0 g X + (V a1^dag a2 + h.c.),
    written in a frame rotating at `rotating_at` (default w_eg), which
    shifts every diagonal frequency without touching the couplings.
    """
    ops = single_excitation_ops(n_modes)
    w_ref = emitter.omega_eg if rotating_at is None else rotating_at
    diag = [0.0, emitter.omega_eg - w_ref]
    if n_modes >= 1:
        diag.append(pair.omega_1 - w_ref)
    if n_modes >= 2:
        diag.append(pair.omega_2 - w_ref)
    h = np.diag(np.asarray(diag, dtype=complex))
    if n_modes >= 1:
        x, _ = xy_ops(n_modes)
        h = h + b0 * pair.g * x
    if n_modes >= 2:
        v = pair.v_complex
        a1, a2 = ops["modes"]
        h = h + v * (a1.conj().T @ a2) + np.conj(v) * (a2.conj().T @ a1)
    return h


def theta_ops(h0: np.ndarray, correlations: PhononCorrelations,
              n_modes: int = 2, rtol: float = 1e-8,
              max_refine: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Phonon scattering operators Theta_X, Theta_Y in the H0 eigenbasis.

    (Theta_zeta)_{mn} = zeta_{mn} * int_0^inf Lambda_zeta(tau)
    exp(-i (E_m - E_n) tau) d tau, with the tau integral cut where the
    correlation functions have decayed below 1e-8 of their initial value.
    The quadrature is verified by panel doubling; ConvergenceError signals
    an exhausted refinement budget.
    """
    x, y = xy_ops(n_modes)
    energies, u = np.linalg.eigh(h0)
    de = (energies[:, None] - energies[None, :]).ravel()
    dim = h0.shape[0]

    def half_fourier(refine):
        nodes, weights = half_fourier_nodes(correlations, rtol=rtol,
                                            frequencies=np.abs(de),
                                            refine=refine)
        lam_x = correlations.lambda_x(nodes)
        lam_y = correlations.lambda_y(nodes)
        phases = np.exp(-1j * np.outer(de, nodes))
        kx = ((phases * lam_x[None, :]) @ weights).reshape(dim, dim)
        ky = ((phases * lam_y[None, :]) @ weights).reshape(dim, dim)
        return kx, ky

    refine = 1
    kx, ky = half_fourier(refine)
    while True:
        refine *= 2
        if refine > max_refine:
            raise ConvergenceError(
                f"phonon scattering integrals did not reach rtol={rtol:g} "
                f"within the refinement budget")
        kx2, ky2 = half_fourier(refine)
        scale = max(np.abs(kx2).max(), np.abs(ky2).max(), 1e-300)
        err = max(np.abs(kx2 - kx).max(), np.abs(ky2 - ky).max())
        kx, ky = kx2, ky2
        if err <= rtol * scale:
            break
    theta_x = u @ ((u.conj().T @ x @ u) * kx) @ u.conj().T
    theta_y = u @ ((u.conj().T @ y @ u) * ky) @ u.conj().T
    return theta_x, theta_y


# ---------------------------------------------------------------------------
# Liouvillian
# ---------------------------------------------------------------------------

@dataclass
class Liouvillian:
    """Vectorized generator with the operators and parameters that built it."""

    matrix: np.ndarray
    dim: int
    ops: dict
    params: dict = field(default_factory=dict)
    _eig: tuple | None = field(default=None, repr=False)

    def eig(self):
        """Cached eigendecomposition (eigenvalues, S, S_inv) with fallback flag."""
        if self._eig is None:
            lam, s = np.linalg.eig(self.matrix)
            try:
                s_inv = np.linalg.inv(s)
                recon = (s * lam) @ s_inv
                ok = bool(np.linalg.norm(recon - self.matrix) <= 1e-8 * max(
                    np.linalg.norm(self.matrix), 1e-30))
            except np.linalg.LinAlgError:
                ok = False
                s_inv = None
            self._eig = (lam, s, s_inv, ok)
        return self._eig


def build_liouvillian(h0: np.ndarray, pair: MappedPair | None,
                      emitter: EmitterCoupling, theta_x: np.ndarray,
                      theta_y: np.ndarray, g: float, n_modes: int = 2,
                      sigma_rate: float | None = None,
                      params: dict | None = None) -> Liouvillian:
    """Assemble the polaron master-equation generator.

    L rho = -i[H0, rho] + D[sqrt(k1) a1 + sqrt(k2) a2] rho
            + sigma_rate D[sigma] rho
            + g^2 ([X, rho Theta_X^dag - Theta_X rho] + (X -> Y)).

    sigma_rate defaults to the radiation-mode rate of the emitter.
    """
    ops = single_excitation_ops(n_modes)
    dim = ops["dim"]
    if h0.shape != (dim, dim):
        raise ValueError("h0 dimension does not match n_modes")
    lv = -1j * (spre(h0) - spost(h0))
    if n_modes >= 1:
        jump = np.sqrt(pair.kappa_1) * ops["modes"][0]
        if n_modes == 2:
            jump = jump + np.sqrt(pair.kappa_2) * ops["modes"][1]
        lv = lv + lindblad_dissipator(jump)
    rate = emitter.gamma_r if sigma_rate is None else sigma_rate
    if rate > 0:
        lv = lv + rate * lindblad_dissipator(ops["sigma"])
    if g != 0.0 and n_modes >= 1:
        x, y = xy_ops(n_modes)
        w = np.zeros_like(lv)
        for zeta, theta in ((x, theta_x), (y, theta_y)):
            a = theta.conj().T
            # [zeta, rho theta^dag] + h.c. = [zeta, rho theta^dag - theta rho]
            w += np.kron(a.T, zeta) - np.kron((a @ zeta).T, np.eye(dim))
            w += -spre(zeta @ theta) + np.kron(zeta.T, theta)
        lv = lv + g**2 * w
    return Liouvillian(matrix=lv, dim=dim, ops=ops, params=params or {})


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

def evolve(liouv: Liouvillian, rho0: np.ndarray, t) -> np.ndarray:
    """rho(t) = exp(L t) rho0 for scalar or 1-d array t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    v0 = vec(rho0)
    lam, s, s_inv, ok = liouv.eig()
    dim = liouv.dim
    if ok:
        c0 = s_inv @ v0
        out = (s @ (np.exp(np.outer(lam, t_arr)) * c0[:, None])).T
    else:
        out = np.empty((len(t_arr), dim * dim), dtype=complex)
        for k, tk in enumerate(t_arr):
            out[k] = expm(liouv.matrix * tk) @ v0
    rhos = out.reshape(len(t_arr), dim, dim).transpose(0, 2, 1)
    # transpose swaps the Fortran unvec back to matrix layout
    if np.isscalar(t) or np.ndim(t) == 0:
        return rhos[0]
    return rhos


@dataclass
class TwoTimeGrid:
    """Two-time dipole correlation on a uniform grid, rotating frame.

    values[i, j] = <sigma^dag(t_i) sigma(t_j)> in the frame rotating at
    omega_ref, already multiplied by the phonon displacement factor
    B0^2 exp(phi(t_i - t_j)) when correlations were supplied.  The lab-frame
    correlation carries an extra factor exp(+i omega_ref (t_i - t_j)),
    which `dipole_spectrum` restores as a frequency-axis shift.
    """

    t: np.ndarray
    values: np.ndarray
    omega_ref: float
    diagnostics: dict = field(default_factory=dict)

    def lab_values(self) -> np.ndarray:
        phase = np.exp(1j * self.omega_ref * (self.t[:, None] - self.t[None, :]))
        return self.values * phase

    def write_csv(self, path, hbar_mev_ps: float = 0.65821):
        """Debug dump with row/column headers in picoseconds."""
        with open(path, "w", encoding="utf-8") as fh:
            header = ",".join(f"{tv * hbar_mev_ps:.6e}" for tv in self.t)
            fh.write("t_ps," + header + "\n")
            for i, ti in enumerate(self.t):
                row = ",".join(f"{v.real:.6e}{v.imag:+.6e}j" for v in self.values[i])
                fh.write(f"{ti * hbar_mev_ps:.6e},{row}\n")


def two_time_dipole(liouv: Liouvillian, t: np.ndarray,
                    correlations: PhononCorrelations | None = None,
                    omega_ref: float | None = None,
                    rho0: np.ndarray | None = None) -> TwoTimeGrid:
    """Lab-frame dipole correlation via the quantum regression theorem.

    C(t' + tau, t') = Tr[sigma^dag e^{L tau} (sigma rho(t'))] for tau >= 0,
    extended by Hermitian symmetry, then multiplied by the equilibrium
    phonon factor B0^2 exp(phi(tau)).
    """
    t = np.asarray(t, dtype=float)
    n = len(t)
    dt = t[1] - t[0]
    dim = liouv.dim
    if rho0 is None:
        rho0 = np.zeros((dim, dim), dtype=complex)
        rho0[1, 1] = 1.0                   # |e, vac>
    sigma = liouv.ops["sigma"]
    if omega_ref is None:
        omega_ref = float(liouv.params.get("omega_ref", 0.0))
    lam, s, s_inv, ok = liouv.eig()
    if ok:
        c0 = s_inv @ vec(rho0)
        # Tr[sigma^dag X] = vec(sigma)^dag vec(X)
        w_row = vec(sigma).conj() @ s
        m = s_inv @ spre(sigma) @ s
        elt = np.exp(np.outer(lam, t))                    # (d^2, n)
        d_cols = m @ (elt * c0[:, None])                  # (d^2, n)
        upper = (w_row[None, :] * elt.T) @ d_cols         # C(t'+tau, t')
    else:
        warnings.warn("Liouvillian eigendecomposition ill-conditioned; "
                      "falling back to stepwise matrix exponentials")
        prop = expm(liouv.matrix * dt)
        qs = np.empty((n, dim * dim), dtype=complex)
        qs[0] = vec(rho0)
        for j in range(1, n):
            qs[j] = prop @ qs[j - 1]
        qs = (spre(sigma) @ qs.T)
        w = vec(sigma).conj()
        rows = np.empty((n, dim * dim), dtype=complex)
        rows[0] = w
        prop_t = prop.T
        for i in range(1, n):
            rows[i] = prop_t @ rows[i - 1]
        upper = rows @ qs
    if correlations is not None:
        factor = correlations.b0**2 * np.exp(correlations.phi(t))
    else:
        factor = np.ones(n, dtype=complex)
    upper = upper * factor[:, None]
    idx = np.arange(n, dtype=np.int32)
    ii, jj = np.meshgrid(idx, idx, indexing="ij", copy=False)
    folded = upper[np.abs(ii - jj), np.minimum(ii, jj)]
    values = np.where(ii >= jj, folded, np.conj(folded))
    peak = np.abs(values).max()
    edge = max(np.abs(values[-1, :]).max(), np.abs(values[:, -1]).max())
    coverage = edge / peak if peak > 0 else 0.0
    diagnostics = {"coverage_edge_ratio": float(coverage),
                   "coverage_ok": bool(coverage <= COVERAGE_WARN_LEVEL),
                   "eig_path": bool(ok)}
    if coverage > COVERAGE_WARN_LEVEL:
        warnings.warn(
            f"two-time grid may truncate the transient: |C| at the final "
            f"time is {coverage:.2e} of its maximum")
    return TwoTimeGrid(t=t, values=values, omega_ref=omega_ref,
                       diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# free network correlation spectrum (regression-theorem cross-check)
# ---------------------------------------------------------------------------

def network_spectral_density_qrt(pair: MappedPair, omega) -> np.ndarray:
    """J'(omega) from the free two-mode network via the regression theorem.

    Builds the photonic Liouvillian on the {vac, (1,0), (0,1)} basis and
    evaluates 2 g^2 Re int_0^inf dtau e^{i omega tau} <a1(tau) a1^dag>,
    which must coincide with mapped_spectral_density.
    """
    a1 = np.zeros((3, 3), dtype=complex)
    a1[0, 1] = 1.0
    a2 = np.zeros((3, 3), dtype=complex)
    a2[0, 2] = 1.0
    v = pair.v_complex
    h = np.diag([0.0, pair.omega_1, pair.omega_2]).astype(complex)
    h += v * (a1.conj().T @ a2) + np.conj(v) * (a2.conj().T @ a1)
    jump = np.sqrt(pair.kappa_1) * a1 + np.sqrt(pair.kappa_2) * a2
    lv = -1j * (spre(h) - spost(h)) + lindblad_dissipator(jump)
    rho_vac = np.zeros((3, 3), dtype=complex)
    rho_vac[0, 0] = 1.0
    v0 = spre(a1.conj().T) @ vec(rho_vac)
    w = vec(a1.conj().T).conj()
    lam, s = np.linalg.eig(lv)
    coeff = (w @ s) * np.linalg.solve(s, v0)
    # modes that never appear in <a1(tau) a1^dag> (e.g. the vacuum steady
    # state at lam = 0) would produce 0/0 on the real axis
    keep = np.abs(coeff) > 1e-13 * max(np.abs(coeff).sum(), 1e-300)
    lam, coeff = lam[keep], coeff[keep]
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    # int_0^inf e^{i w tau} e^{lam tau} = -1/(lam + i w) for Re(lam) < 0
    ft = -(coeff[None, :] / (lam[None, :] + 1j * omega[:, None])).sum(axis=1)
    out = 2.0 * pair.g**2 * np.real(ft)
    return out if out.size > 1 else out[0]


def consistency_check_qrt(pair: MappedPair, omega) -> float:
    """Max relative deviation between the regression-theorem spectrum and J'."""
    ref = mapped_spectral_density(pair, omega)
    qrt = network_spectral_density_qrt(pair, omega)
    scale = np.max(np.abs(ref))
    return float(np.max(np.abs(qrt - ref)) / scale)


# ---------------------------------------------------------------------------
# trajectory sanity
# ---------------------------------------------------------------------------

def trajectory_sanity(liouv: Liouvillian, rho0: np.ndarray,
                      t: np.ndarray) -> dict:
    """Max trace deviation, Hermiticity defect and most negative eigenvalue."""
    rhos = evolve(liouv, rho0, t)
    trace_err = float(np.max(np.abs(np.trace(rhos, axis1=1, axis2=2) - 1.0)))
    herm_err = float(np.max(np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1))))))
    min_eig = float(np.min(np.linalg.eigvalsh(
        0.5 * (rhos + np.conj(np.transpose(rhos, (0, 2, 1)))))))
    return {"trace_error": trace_err, "hermiticity_error": herm_err,
            "min_eigenvalue": min_eig}
