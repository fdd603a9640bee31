"""One-period propagators, converged quasienergy spectra and state evolution.

Every integrator is a product of midpoint exponentials
exp(-i H(t_mid) w dt).  ``midpoint`` uses one sub-step per step (second
order); ``suzuki4`` and ``yoshida6`` are symmetric compositions of the same
sub-step with weights summing to one (orders four and six).

In the rotated frame the Hamiltonian is S(t)^-1 Hs S(t) with S diagonal and Hs
constant, so exp(-i H(t) w dt) = S^-1 exp(-i Hs w dt) S exactly.  A period is
then one cached exponential per distinct weight interleaved with diagonal
row scalings, which the kernels in ``_kernels`` evaluate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _kernels
from .lattice import (ModelConfig, defect_gauge, defect_profile, drive_phase,
                      hamiltonian, site_positions, static_part)
from .linalg import eig_general, mat_exp, sort_order

_S4 = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
_Y1, _Y2, _Y3 = -1.17767998417887, 0.235573213359357, 0.784513610477560
_Y0 = 1.0 - 2.0 * (_Y1 + _Y2 + _Y3)

SCHEMES = {
    "midpoint": (1.0,),
    "suzuki4": (_S4, _S4, 1.0 - 4.0 * _S4, _S4, _S4),
    "yoshida6": (_Y3, _Y2, _Y1, _Y0, _Y1, _Y2, _Y3),
}
SCHEME_ORDER = {"midpoint": 2, "suzuki4": 4, "yoshida6": 6}
FRAMES = ("lab", "rotated")
MIN_STEPS = 16


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Propagator:
    u: np.ndarray
    tau: float
    n_steps: int
    scheme: str = "midpoint"
    frame: str = "rotated"


@dataclass(frozen=True)
class FloquetSpectrum:
    quasienergies: np.ndarray
    modes: np.ndarray
    eigenvalues: np.ndarray
    tau: float
    converged: bool
    drift: float
    n_steps: int
    period: float
    scheme: str = "yoshida6"
    frame: str = "rotated"
    near_defective: bool = False

    @property
    def size(self) -> int:
        return len(self.quasienergies)


def _check_frame_scheme(frame: str, scheme: str) -> None:
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {sorted(SCHEMES)}, got {scheme!r}")


def substeps(scheme: str, t0: float, t1: float, n_steps: int):
    """Midpoint times, signed widths and weight labels of every sub-step."""
    weights = np.asarray(SCHEMES[scheme])
    starts = np.concatenate([[0.0], np.cumsum(weights)[:-1]])
    h = (t1 - t0) / n_steps
    step0 = t0 + h * np.arange(n_steps)
    mids = (step0[:, None] + h * (starts + weights / 2.0)[None, :]).ravel()
    widths = np.tile(weights * h, n_steps)
    # label sub-steps by distinct weight so each exponential is built once
    uniq, labels = np.unique(np.round(weights, 15), return_inverse=True)
    return mids, widths, np.tile(labels, n_steps), uniq * h


def _frame_log(model: ModelConfig, times: np.ndarray) -> np.ndarray:
    """log s(t) for each time: rows i phi(t) x + g(t) D."""
    x = site_positions(model.lattice)
    dprof = defect_profile(model)
    phis = np.array([drive_phase(model, t) for t in times])
    gs = np.array([defect_gauge(model, t) for t in times])
    return 1j * phis[:, None] * x[None, :] + gs[:, None] * dprof[None, :]


def _evolve(model: ModelConfig, frame: str, y: np.ndarray, t0: float, t1: float,
            n_steps: int, scheme: str) -> np.ndarray:
    mids, widths, labels, uniq_widths = substeps(scheme, t0, t1, n_steps)
    if frame == "lab":
        out = np.array(y, dtype=np.complex128)
        for t, w in zip(mids, widths):
            out = mat_exp(hamiltonian(model, t), -1j * w) @ out
        return out
    hs = static_part(model)
    mats = np.stack([mat_exp(hs, -1j * w) for w in uniq_widths])
    logs = _frame_log(model, mids)
    kicks = np.empty((len(mids) + 1, model.n_sites), dtype=np.complex128)
    kicks[0] = np.exp(logs[0])
    kicks[1:-1] = np.exp(np.diff(logs, axis=0))
    kicks[-1] = np.exp(-logs[-1])
    return _kernels.chain_apply(mats, labels, kicks, y)


def propagate_period(model: ModelConfig, frame: str = "rotated", tau: float = 0.0,
                     n_steps: int = 1024, scheme: str = "midpoint") -> Propagator:
    """U(tau + T, tau) as a time-ordered product of midpoint exponentials."""
    _check_frame_scheme(frame, scheme)
    if n_steps < MIN_STEPS:
        raise ValueError(f"n_steps must be >= {MIN_STEPS}, got {n_steps}")
    eye = np.eye(model.n_sites, dtype=np.complex128)
    u = _evolve(model, frame, eye, tau, tau + model.period, int(n_steps), scheme)
    return Propagator(u, float(tau), int(n_steps), scheme, frame)


def evolve_state(model: ModelConfig, frame: str, psi0, t0: float, t1: float,
                 n_steps: int, scheme: str = "midpoint") -> np.ndarray:
    """psi(t1) from psi(t0) with ``n_steps`` steps of the chosen scheme."""
    _check_frame_scheme(frame, scheme)
    psi = np.asarray(psi0, dtype=np.complex128)
    if psi.shape != (model.n_sites,):
        raise ValueError(f"state must have length {model.n_sites}")
    if not np.any(psi):
        raise ValueError("zero initial state")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    return _evolve(model, frame, psi[:, None], t0, t1, int(n_steps), scheme)[:, 0]


def quasienergies_from_eigenvalues(lam, period: float) -> np.ndarray:
    """eps = (i/T) Log(lambda) with Re(eps) in (-pi/T, pi/T]."""
    lam = np.asarray(lam, dtype=np.complex128)
    re = -np.angle(lam) / period
    half = math.pi / period
    re = np.where(re <= -half, re + 2.0 * half, re)
    return re + 1j * np.log(np.abs(lam)) / period


def spectral_drift(eps_a, eps_b, period: float) -> float:
    """Largest quasienergy change under the optimal one-to-one matching.

    Real parts are compared modulo 2 pi / T so a mode crossing the zone edge
    between resolutions does not register as a jump.
    """
    a = np.asarray(eps_a)[:, None]
    b = np.asarray(eps_b)[None, :]
    width = 2.0 * math.pi / period
    dre = (b.real - a.real + width / 2.0) % width - width / 2.0
    cost = np.hypot(dre, b.imag - a.imag)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def spectrum_from_propagator(prop: Propagator, period: float, converged: bool = True,
                             drift: float = 0.0) -> FloquetSpectrum:
    es = eig_general(prop.u, sort=False)
    eps = quasienergies_from_eigenvalues(es.values, period)
    order = sort_order(eps)
    return FloquetSpectrum(eps[order], es.vectors[:, order], es.values[order], prop.tau,
                           converged, drift, prop.n_steps, period, prop.scheme, prop.frame,
                           es.near_defective)


def converged_spectrum(model: ModelConfig, frame: str = "rotated", tau: float = 0.0,
                       tol: float = 1e-10, max_steps: int = 2 ** 20,
                       scheme: str = "yoshida6", start_steps: int = 256) -> FloquetSpectrum:
    """Quasienergies and modes, doubling the step count until they settle.

    Stops when the matched drift between n and 2n steps is below ``tol``;
    if 2n would exceed ``max_steps`` the finest result is returned with
    ``converged=False``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_frame_scheme(frame, scheme)
    period = model.period
    n = max(int(start_steps), MIN_STEPS)
    best = spectrum_from_propagator(propagate_period(model, frame, tau, n, scheme), period)
    drift = math.inf
    while 2 * n <= max_steps:
        n *= 2
        nxt = spectrum_from_propagator(propagate_period(model, frame, tau, n, scheme), period)
        drift = spectral_drift(best.quasienergies, nxt.quasienergies, period)
        best = nxt
        if drift < tol:
            return _with_status(best, True, drift)
    return _with_status(best, False, drift)


def _with_status(spec: FloquetSpectrum, converged: bool, drift: float) -> FloquetSpectrum:
    return FloquetSpectrum(spec.quasienergies, spec.modes, spec.eigenvalues, spec.tau,
                           converged, float(drift), spec.n_steps, spec.period, spec.scheme,
                           spec.frame, spec.near_defective)
