"""Bulk two-band machinery: Bloch Hamiltonians, Floquet effective Hamiltonians,
chiral-symmetry certificates and winding numbers.

Bloch functions use the site-position gauge psi_n = e^{ik x_n}, in which the
off-diagonal amplitude of the driven chain is

    J exp[i(phi + k) a] + J exp[-i(phi + k) b],   phi = (A/omega) cos(omega t).

It equals e^{ika} times the cell-periodic amplitude
J e^{i phi a} + J e^{-i phi b} e^{-ik(a+b)}.  Windings strip that e^{ika}
factor so the loop over k in [0, 2pi/(a+b)) is closed, and are oriented so
that intercell-dominated chains (|J2| > |J1|) give +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .floquet import SCHEMES, quasienergies_from_eigenvalues, substeps
from .lattice import ModelConfig, drive_phase

WINDING_RESIDUAL_MAX = 0.01
CHIRAL_TOL = 1e-6
GAP_TOL = 1e-12
TOUCH_TOL = 1e-8


class GaplessError(ArithmeticError):
    pass


class ChiralSymmetryError(ValueError):
    def __init__(self, tau: float, certificate: float):
        super().__init__(f"chiral symmetry violated at tau={tau:.6g}: max|<sigma_z>| = {certificate:.3e}")
        self.tau = tau
        self.certificate = certificate


@dataclass(frozen=True)
class BlochHamiltonian2:
    hx: float
    hy: float
    hz: float
    off_diag: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.hz, self.hx - 1j * self.hy],
                         [self.hx + 1j * self.hy, -self.hz]], dtype=np.complex128)


@dataclass(frozen=True)
class WindingResult:
    nu: int
    raw: float
    residual: float
    chiral_certificate: float = 0.0


@dataclass(frozen=True)
class FloquetWindings:
    nu1: WindingResult
    nu2: WindingResult
    nu0: Fraction
    nu_pi: Fraction

    def __iter__(self):
        return iter((self.nu1, self.nu2, self.nu0, self.nu_pi))


@dataclass(frozen=True)
class BlochFloquet:
    """Effective two-band Floquet data on a k grid (arrays indexed by k)."""
    k: np.ndarray
    eps_plus: np.ndarray
    eps_minus: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray
    sigma_z: np.ndarray
    touching: np.ndarray
    pairing_error: float
    n_steps: int
    converged: bool

    @property
    def off_diag(self) -> np.ndarray:
        return self.hx - 1j * self.hy


@dataclass(frozen=True)
class ChiralScan:
    k: np.ndarray
    sigma_z: np.ndarray
    touching: np.ndarray
    max_abs: float

    def pairs(self) -> list[tuple[float, float]]:
        return [(float(k), float(s)) for k, s, t in zip(self.k, self.sigma_z, self.touching) if not t]


def brillouin_grid(a: float, b: float, n_k: int) -> np.ndarray:
    return 2.0 * math.pi / (a + b) * np.arange(n_k) / n_k


def phase_winding(values) -> float:
    """Sum of principal-branch phase increments around the closed loop, over 2pi."""
    z = np.asarray(values, dtype=np.complex128)
    steps = np.angle(np.roll(z, -1) / z)
    return float(steps.sum() / (2.0 * math.pi))


def _winding(raw: float, certificate: float = 0.0) -> WindingResult:
    nu = int(round(raw))
    residual = abs(raw - nu)
    if residual >= WINDING_RESIDUAL_MAX:
        raise ArithmeticError(f"winding residual {residual:.3g} too large (raw {raw:.6f}); refine n_k")
    return WindingResult(nu, raw, residual, certificate)


def static_winding(j1: float, j2: float, a: float = 1.0, b: float = 2.0,
                   n_k: int = 1001) -> WindingResult:
    """Winding of the static dimer amplitude j1 e^{ika} + j2 e^{-ikb}."""
    if j1 == 0 and j2 == 0:
        raise ValueError("j1 and j2 cannot both vanish")
    if n_k < 201:
        raise ValueError("n_k must be >= 201")
    k = brillouin_grid(a, b, n_k)
    delta = j1 * np.exp(1j * k * a) + j2 * np.exp(-1j * k * b)
    if np.min(np.abs(delta)) < GAP_TOL:
        raise GaplessError("gapless: amplitude vanishes on the k grid")
    cell = delta * np.exp(-1j * k * a)
    return _winding(phase_winding(np.conj(cell)))


def bloch_amplitude(model: ModelConfig, k, t: float):
    lat = model.lattice
    phi = drive_phase(model, t)
    k = np.asarray(k, dtype=float)
    return lat.j_hop * (np.exp(1j * (phi + k) * lat.a) + np.exp(-1j * (phi + k) * lat.b))


def bloch_hamiltonian_t(model: ModelConfig, k: float, t: float) -> BlochHamiltonian2:
    """Instantaneous defect-free rotating-frame Bloch Hamiltonian."""
    lat = model.lattice
    phi = drive_phase(model, t)
    j = lat.j_hop
    hx = j * math.cos(phi * lat.a + k * lat.a) + j * math.cos(phi * lat.b + k * lat.b)
    hy = -j * math.sin(phi * lat.a + k * lat.a) + j * math.sin(phi * lat.b + k * lat.b)
    return BlochHamiltonian2(hx, hy, 0.0, complex(bloch_amplitude(model, k, t)))


def bloch_propagator(model: ModelConfig, ks, tau: float, n_steps: int,
                     scheme: str = "yoshida6") -> np.ndarray:
    """U(k; tau + T, tau) for each k, shape (n_k, 2, 2)."""
    mids, widths, _, _ = substeps(scheme, tau, tau + model.period, n_steps)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    lat = model.lattice
    phis = model.drive.amplitude / model.drive.omega * np.cos(model.drive.omega * mids)
    arg = phis[:, None] + ks[None, :]
    beta = lat.j_hop * (np.exp(1j * arg * lat.a) + np.exp(-1j * arg * lat.b))
    return _kernels.bloch_product(beta, widths)


def _analyse(u: np.ndarray, ks: np.ndarray, period: float, n_steps: int,
             converged: bool) -> BlochFloquet:
    lam, vec = np.linalg.eig(u)
    eps = quasienergies_from_eigenvalues(lam, period).real
    # + band: eigenvalue with eps in (0, pi/T]
    plus = np.argmax(eps, axis=1)
    rows = np.arange(len(ks))
    eps_p = eps[rows, plus]
    eps_m_raw = eps[rows, 1 - plus]
    half = math.pi / period
    touching = (np.abs(eps_p) < TOUCH_TOL) | (np.abs(eps_p - half) < TOUCH_TOL)
    up = vec[rows, :, plus]
    up = up / np.linalg.norm(up, axis=1)[:, None]
    sx = 2.0 * np.real(np.conj(up[:, 0]) * up[:, 1])
    sy = 2.0 * np.imag(np.conj(up[:, 0]) * up[:, 1])
    sz = np.abs(up[:, 0]) ** 2 - np.abs(up[:, 1]) ** 2
    pair_err = np.abs(eps_m_raw + eps_p)
    pairing = float(pair_err[~touching].max()) if np.any(~touching) else 0.0
    return BlochFloquet(ks, eps_p, -eps_p, eps_p * sx, eps_p * sy, eps_p * sz, sz,
                        touching, pairing, n_steps, converged)


def bloch_floquet(model: ModelConfig, ks, tau: float = 0.0, tol: float = 1e-10,
                  start_steps: int = 256, max_steps: int = 2 ** 16,
                  scheme: str = "yoshida6") -> BlochFloquet:
    """Converged two-band Floquet data, doubling steps until eps_+ settles."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    period = model.period
    n = start_steps
    prev = _analyse(bloch_propagator(model, ks, tau, n, scheme), ks, period, n, False)
    while 2 * n <= max_steps:
        n *= 2
        cur = _analyse(bloch_propagator(model, ks, tau, n, scheme), ks, period, n, False)
        if np.max(np.abs(cur.eps_plus - prev.eps_plus)) < tol:
            return _analyse(bloch_propagator(model, ks, tau, n, scheme), ks, period, n, True)
        prev = cur
    return prev


def effective_bloch(model: ModelConfig, k: float, tau: float, tol: float = 1e-10):
    """(h^eff components at (k, tau), (eps_+, eps_-)).

    Raises GaplessError when eps_+ sits at 0 or pi/T (band touching).
    """
    data = bloch_floquet(model, [k], tau, tol)
    if data.touching[0]:
        raise GaplessError(f"band touching at k={k:.6g}: h^eff undefined")
    hx, hy, hz = float(data.hx[0]), float(data.hy[0]), float(data.hz[0])
    return BlochHamiltonian2(hx, hy, hz, complex(hx - 1j * hy)), (float(data.eps_plus[0]),
                                                                 float(data.eps_minus[0]))


def chiral_expectation_scan(model: ModelConfig, tau: float, n_k: int = 128,
                            tol: float = 1e-10) -> ChiralScan:
    """<u_+|sigma_z|u_+> over the Brillouin zone; band-touching points omitted."""
    if n_k < 64:
        raise ValueError("n_k must be >= 64")
    ks = brillouin_grid(model.lattice.a, model.lattice.b, n_k)
    data = bloch_floquet(model, ks, tau, tol)
    valid = ~data.touching
    max_abs = float(np.max(np.abs(data.sigma_z[valid]))) if np.any(valid) else 0.0
    return ChiralScan(ks, data.sigma_z, data.touching, max_abs)


def _floquet_winding(model: ModelConfig, tau: float, n_k: int) -> WindingResult:
    ks = brillouin_grid(model.lattice.a, model.lattice.b, n_k)
    data = bloch_floquet(model, ks, tau)
    cert = float(np.max(np.abs(data.sigma_z)))
    if cert >= CHIRAL_TOL:
        raise ChiralSymmetryError(tau, cert)
    h = data.off_diag
    if np.any(data.touching) or np.min(np.abs(h)) < GAP_TOL:
        raise GaplessError(f"gapless effective Hamiltonian at tau={tau:.6g}")
    cell = h * np.exp(-1j * ks * model.lattice.a)
    return _winding(phase_winding(np.conj(cell)), cert)


def floquet_windings(model: ModelConfig, n_k: int = 512) -> FloquetWindings:
    """(nu1, nu2) at tau = 0 and T/2, with nu0 = (nu1+nu2)/2, nu_pi = (nu1-nu2)/2."""
    nu1 = _floquet_winding(model, 0.0, n_k)
    nu2 = _floquet_winding(model, model.period / 2.0, n_k)
    return FloquetWindings(nu1, nu2, Fraction(nu1.nu + nu2.nu, 2), Fraction(nu1.nu - nu2.nu, 2))
