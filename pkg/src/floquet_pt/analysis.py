"""Diagnostics on Floquet spectra: IPR, Gamma_total, thresholds, edge modes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .floquet import FloquetSpectrum, converged_spectrum, evolve_state
from .lattice import ModelConfig

# Step cap used when the threshold scan asks for spectra: close to an
# exceptional point the step-doubling never settles and a 2^20 cap would
# take hours per point.  Unconverged points are counted in the result.
THRESHOLD_MAX_STEPS = 2048


class TopologyError(ValueError):
    """Requested edge-mode quantity does not exist in this phase."""


@dataclass(frozen=True)
class ModeDiagnostics:
    index: int
    quasienergy: complex
    ipr: float
    left_weight: float
    defect_weight: float


@dataclass(frozen=True)
class ZeroMode:
    index: int
    side: str
    diagnostics: ModeDiagnostics
    vector: np.ndarray


@dataclass(frozen=True)
class ThresholdResult:
    gamma_c: float
    bracket: tuple
    status: str
    gamma_max_probed: float
    cutoff: float
    n_evaluations: int = 0
    n_unconverged: int = 0
    samples: tuple = field(default=(), repr=False)

    @property
    def map_value(self) -> float:
        """gamma_c with -1 standing in for 'unbroken up to the scan limit'."""
        return -1.0 if self.status == "unbroken-up-to-max" else self.gamma_c


@dataclass(frozen=True)
class EdgeTrace:
    times: np.ndarray
    sigma_p: np.ndarray


def _probabilities(mode) -> np.ndarray:
    psi = np.asarray(mode, dtype=np.complex128)
    w = np.abs(psi) ** 2
    tot = w.sum()
    if tot == 0:
        raise ValueError("zero vector")
    return w / tot


def ipr(mode) -> float:
    """sum |psi|^4 / (sum |psi|^2)^2."""
    p = _probabilities(mode)
    return float(np.sum(p ** 2))


def mode_diagnostics(spectrum: FloquetSpectrum, index: int, model: ModelConfig,
                     vector=None) -> ModeDiagnostics:
    vec = spectrum.modes[:, index] if vector is None else vector
    p = _probabilities(vec)
    n = model.n_sites
    return ModeDiagnostics(
        index=int(index),
        quasienergy=complex(spectrum.quasienergies[index]),
        ipr=float(np.sum(p ** 2)),
        left_weight=float(p[: n // 2].sum()),
        defect_weight=float(p[model.gain_site - 1] + p[model.loss_site - 1]),
    )


def gamma_total(spectrum: FloquetSpectrum) -> float:
    """Sum of |Im eps| over the whole spectrum."""
    return float(np.sum(np.abs(np.asarray(spectrum.quasienergies).imag)))


def floquet_gamma_total(model: ModelConfig, tol: float = 1e-10,
                        max_steps: int = THRESHOLD_MAX_STEPS):
    """Gamma_total of the converged rotated-frame spectrum and its convergence flag."""
    spec = converged_spectrum(model, tol=tol, max_steps=max_steps)
    return gamma_total(spec), spec.converged


def find_threshold(model_base: ModelConfig, gamma_max: float = 2.0, coarse_step: float = 0.02,
                   refine_tol: float = 1e-3, cutoff: float = 1e-7,
                   evaluate: Callable[[ModelConfig], tuple] | None = None,
                   qe_tol: float = 1e-10, max_steps: int = THRESHOLD_MAX_STEPS) -> ThresholdResult:
    """First onset of PT breaking along gamma.

    Ascending scan gamma = k * coarse_step up to ``gamma_max``; the first
    bracket where Gamma_total exceeds ``cutoff`` is bisected to width
    ``refine_tol``.  If the first coarse point is already broken the scan
    probes gamma = refine_tol: broken there too means status ``zero``.
    ``evaluate(model) -> (Gamma_total, converged)`` defaults to the exact
    Floquet spectrum.
    """
    if not gamma_max > 0:
        raise ValueError("gamma_max must be positive")
    if not coarse_step > refine_tol > 0:
        raise ValueError("need coarse_step > refine_tol > 0")
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if evaluate is None:
        def evaluate(m):
            return floquet_gamma_total(m, qe_tol, max_steps)

    samples = []
    unconverged = 0

    def broken(gamma: float) -> bool:
        nonlocal unconverged
        total, ok = evaluate(model_base.with_params(gamma=float(gamma)))
        unconverged += 0 if ok else 1
        samples.append((float(gamma), float(total)))
        return total > cutoff

    def result(gamma_c, bracket, status, probed):
        return ThresholdResult(float(gamma_c), tuple(float(v) for v in bracket), status,
                               float(probed), float(cutoff), len(samples), unconverged,
                               tuple(samples))

    n_coarse = int(math.floor(gamma_max / coarse_step + 1e-9))
    low = None
    high = None
    for k in range(1, n_coarse + 1):
        gamma = k * coarse_step
        if broken(gamma):
            high = gamma
            break
        low = gamma
    if high is None:
        probed = n_coarse * coarse_step
        return result(probed, (probed, math.inf), "unbroken-up-to-max", probed)
    if low is None:
        if broken(refine_tol):
            return result(0.0, (0.0, refine_tol), "zero", high)
        low = refine_tol
    while high - low > refine_tol:
        mid = 0.5 * (low + high)
        if broken(mid):
            high = mid
        else:
            low = mid
    return result(0.5 * (low + high), (low, high), "found", high)


def zero_modes(spectrum: FloquetSpectrum, model: ModelConfig, eps_tol: float | None = None,
               ipr_min: float | None = None) -> list[ZeroMode]:
    """Edge-localised modes with |eps| < eps_tol and IPR above ``ipr_min``.

    A defect-free degenerate pair comes out of the eigensolver in an
    arbitrary basis; it is rotated into the combination with maximal
    left-half weight and its orthogonal partner, left first.
    """
    n = model.n_sites
    if eps_tol is None:
        eps_tol = 1e-5 * max(model.lattice.j_hop, 1.0)
    if ipr_min is None:
        ipr_min = 3.0 / n
    picked = []
    for j, eps in enumerate(spectrum.quasienergies):
        if abs(eps) < eps_tol:
            diag = mode_diagnostics(spectrum, j, model)
            if diag.ipr > ipr_min:
                picked.append(diag)
    vectors = [spectrum.modes[:, d.index] for d in picked]
    if model.defect.gamma == 0 and len(picked) == 2:
        vectors = list(_split_pair(vectors[0], vectors[1], n // 2))
        picked = [mode_diagnostics(spectrum, d.index, model, v) for d, v in zip(picked, vectors)]
    out = [ZeroMode(d.index, "left" if d.left_weight > 0.5 else "right", d, v / np.linalg.norm(v))
           for d, v in zip(picked, vectors)]
    out.sort(key=lambda z: (z.side != "left", z.index))
    return out


def _split_pair(u_plus, u_minus, n_left: int):
    """Sublattice-polarised basis of span{u+, u-}, the left-heavier vector first.

    The pair is orthonormalised and the sublattice operator diag(+1, -1, ...)
    diagonalised inside it; with chiral symmetry the subspace is invariant,
    so the two vectors live on odd and on even sites respectively.
    """
    q, _ = np.linalg.qr(np.column_stack([u_plus, u_minus]))
    sub = np.where(np.arange(len(u_plus)) % 2 == 0, 1.0, -1.0)
    g = q.conj().T @ (sub[:, None] * q)
    _, rot = np.linalg.eigh(0.5 * (g + g.conj().T))
    a, b = (q @ rot).T
    if np.sum(np.abs(a[:n_left]) ** 2) < np.sum(np.abs(b[:n_left]) ** 2):
        a, b = b, a
    return a, b


def sigma_p_sites(n_sites: int) -> np.ndarray:
    """0-based indices of even sites m <= N/2 and their mirror partners."""
    even = np.arange(2, n_sites // 2 + 1, 2)
    return np.concatenate([even, n_sites - even + 1]) - 1


def sigma_p(state, n_sites: int) -> float:
    p = _probabilities(state)
    return float(p[sigma_p_sites(n_sites)].sum())


def sigma_p_trace(model: ModelConfig, n_samples: int = 65, steps_per_period: int = 2048,
                  spectrum: FloquetSpectrum | None = None) -> EdgeTrace:
    """Sigma_P of the left zero mode sampled at n_samples times in [0, T].

    The mode is taken from the converged rotated-frame spectrum at tau=0
    and propagated segment by segment with the sixth-order scheme, about
    ``steps_per_period`` steps per period.
    """
    if model.defect.gamma != 0:
        raise ValueError("sigma_p_trace needs a defect-free model (gamma = 0)")
    if model.n_sites % 2:
        raise ValueError("sigma_p_trace needs an even number of sites")
    if n_samples < 16:
        raise ValueError("n_samples must be >= 16")
    if spectrum is None:
        spectrum = converged_spectrum(model, frame="rotated", tau=0.0)
    left = [z for z in zero_modes(spectrum, model) if z.side == "left"]
    if not left:
        raise TopologyError("no zero-energy edge mode: the model is in a topologically trivial phase")
    period = model.period
    times = np.linspace(0.0, period, n_samples)
    seg_steps = max(1, int(math.ceil(steps_per_period / (n_samples - 1))))
    psi = left[0].vector
    values = [sigma_p(psi, model.n_sites)]
    for t0, t1 in zip(times[:-1], times[1:]):
        psi = evolve_state(model, "rotated", psi, t0, t1, seg_steps, scheme="yoshida6")
        values.append(sigma_p(psi, model.n_sites))
    return EdgeTrace(times, np.asarray(values))


def conjugate_pairing_error(quasienergies: Sequence[complex]) -> float:
    """Distance between the multisets {eps} and {eps*} under optimal matching."""
    eps = np.asarray(quasienergies)
    cost = np.abs(eps[:, None] - np.conj(eps)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
