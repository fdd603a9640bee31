"""Driven dimerised chain with a reflection-symmetric gain/loss pair.

Sites are 1-based in the physics-facing API (m0, loss site N - m0 + 1) and
0-based in arrays.  Bond n joins sites n and n+1 and has length ``a`` for odd
n and ``b`` for even n; the first site sits at x = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

CONFIG_KEYS = ("n_sites", "a", "b", "j_hop", "amplitude", "omega", "m0",
               "gamma", "co_driven", "theta")


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    a: float = 1.0
    b: float = 2.0
    j_hop: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 4:
            raise ValueError(f"n_sites must be an integer >= 4, got {self.n_sites}")
        for name in ("a", "b"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"bond length {name} must be positive, got {val}")
        if not (math.isfinite(self.j_hop) and self.j_hop > 0):
            raise ValueError(f"j_hop must be positive, got {self.j_hop}")

    @property
    def bond_lengths(self) -> np.ndarray:
        n = np.arange(1, self.n_sites)
        return np.where(n % 2 == 1, float(self.a), float(self.b))


@dataclass(frozen=True)
class DriveSpec:
    amplitude: float = 0.0
    omega: float = 20.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be > 0, got {self.omega}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega


@dataclass(frozen=True)
class DefectSpec:
    m0: int = 1
    gamma: float = 0.0
    co_driven: bool = False
    theta: float = 0.0

    def __post_init__(self):
        if int(self.m0) != self.m0 or self.m0 < 1:
            raise ValueError(f"m0 must be a positive integer, got {self.m0}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


@dataclass(frozen=True)
class ModelConfig:
    lattice: LatticeSpec
    drive: DriveSpec
    defect: DefectSpec

    def __post_init__(self):
        n = self.lattice.n_sites
        m0 = self.defect.m0
        if m0 > (n + 1) // 2:
            raise ValueError(f"m0={m0} outside 1..{(n + 1) // 2} for N={n}")
        if m0 == n - m0 + 1:
            raise ValueError(f"m0={m0} puts gain and loss on the same site for N={n}")

    # convenience accessors
    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    @property
    def period(self) -> float:
        return self.drive.period

    @property
    def gain_site(self) -> int:
        return self.defect.m0

    @property
    def loss_site(self) -> int:
        return self.lattice.n_sites - self.defect.m0 + 1

    def with_params(self, **kw) -> "ModelConfig":
        """Copy with flat keys (``gamma=``, ``m0=``, ``amplitude=`` ...) replaced."""
        flat = self.to_dict()
        unknown = set(kw) - set(CONFIG_KEYS)
        if unknown:
            raise KeyError(f"unknown model keys {sorted(unknown)}")
        flat.update(kw)
        return ModelConfig.from_dict(flat)

    def to_dict(self) -> dict:
        out = {}
        for part in (self.lattice, self.drive, self.defect):
            out.update(asdict(part))
        return {k: out[k] for k in CONFIG_KEYS}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        missing = [k for k in ("n_sites", "omega") if k not in d]
        if missing:
            raise KeyError(f"missing model keys {missing}")
        return cls(
            LatticeSpec(int(d["n_sites"]), float(d.get("a", 1.0)),
                        float(d.get("b", 2.0)), float(d.get("j_hop", 1.0))),
            DriveSpec(float(d.get("amplitude", 0.0)), float(d["omega"])),
            DefectSpec(int(d.get("m0", 1)), float(d.get("gamma", 0.0)),
                       bool(d.get("co_driven", False)), float(d.get("theta", 0.0))),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls.from_dict(json.loads(text))


def make_model(n_sites=60, a=1.0, b=2.0, j_hop=1.0, amplitude=0.0, omega=20.0,
               m0=1, gamma=0.0, co_driven=False, theta=0.0) -> ModelConfig:
    """Flat-keyword constructor; same keys as the JSON form."""
    return ModelConfig.from_dict(dict(n_sites=n_sites, a=a, b=b, j_hop=j_hop,
                                      amplitude=amplitude, omega=omega, m0=m0,
                                      gamma=gamma, co_driven=co_driven, theta=theta))


def site_positions(lattice: LatticeSpec) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(lattice.bond_lengths)])


def defect_profile(model: ModelConfig) -> np.ndarray:
    """+1 on the gain site, -1 on the loss site, 0 elsewhere."""
    d = np.zeros(model.n_sites)
    d[model.gain_site - 1] = 1.0
    d[model.loss_site - 1] = -1.0
    return d


def hopping_matrix(lattice: LatticeSpec) -> np.ndarray:
    n = lattice.n_sites
    h = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = lattice.j_hop
    h[idx + 1, idx] = lattice.j_hop
    return h


def defect_diagonal(model: ModelConfig, t: float) -> np.ndarray:
    """Imaginary gain/loss potential on the diagonal at time t."""
    df = model.defect
    strength = df.gamma * (math.cos(model.drive.omega * t - df.theta) if df.co_driven else 1.0)
    return 1j * strength * defect_profile(model)


def hamiltonian(model: ModelConfig, t: float) -> np.ndarray:
    """Lab-frame Hamiltonian: hopping, linear drive potential and defects."""
    h = hopping_matrix(model.lattice)
    x = site_positions(model.lattice)
    drive = model.drive.amplitude * math.sin(model.drive.omega * t) * x
    h[np.diag_indices_from(h)] = drive + defect_diagonal(model, t)
    return h


def drive_phase(model: ModelConfig, t: float) -> float:
    """(A/omega) cos(omega t): phase per unit length picked up in the rotating frame."""
    return model.drive.amplitude / model.drive.omega * math.cos(model.drive.omega * t)


def defect_gauge(model: ModelConfig, t: float) -> float:
    """gamma sin(omega t - theta)/omega for a co-driven pair, else 0."""
    df = model.defect
    if not df.co_driven:
        return 0.0
    return df.gamma * math.sin(model.drive.omega * t - df.theta) / model.drive.omega


def frame_diagonal(model: ModelConfig, t: float) -> np.ndarray:
    """Diagonal s(t) of the frame map S(t) with H_rot = S^-1 H_static S.

    s_n = exp(i phi(t) x_n + g(t) D_n); unitary unless the pair is co-driven.
    """
    x = site_positions(model.lattice)
    return np.exp(1j * drive_phase(model, t) * x + defect_gauge(model, t) * defect_profile(model))


def static_part(model: ModelConfig) -> np.ndarray:
    """Time-independent matrix conjugated by the frame map.

    Static defects stay on its diagonal; co-driven defects live entirely in
    the frame map.
    """
    h = hopping_matrix(model.lattice)
    if not model.defect.co_driven:
        h[np.diag_indices_from(h)] = 1j * model.defect.gamma * defect_profile(model)
    return h


def rotated_hamiltonian(model: ModelConfig, t: float) -> np.ndarray:
    """Rotating-frame Hamiltonian built bond by bond.

    Bond n carries J exp(i phi d_n) exp(c_n g) above the diagonal and
    J exp(-i phi d_n) exp(-c_n g) below, with c_n = D_{n+1} - D_n; the real
    factors only appear on bonds touching a co-driven defect site.
    """
    lat = model.lattice
    n = lat.n_sites
    phi = drive_phase(model, t)
    g = defect_gauge(model, t)
    dprof = defect_profile(model)
    c = np.diff(dprof)
    d = lat.bond_lengths
    up = lat.j_hop * np.exp(1j * phi * d + c * g)
    down = lat.j_hop * np.exp(-1j * phi * d - c * g)
    h = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = up
    h[idx + 1, idx] = down
    if not model.defect.co_driven:
        h[np.diag_indices_from(h)] = 1j * model.defect.gamma * dprof
    return h


def reflection(n: int) -> np.ndarray:
    return np.eye(n)[::-1]


def time_reversal_residual(model: ModelConfig, t0: float, n_samples: int) -> float:
    """max_t ||H*(t0+t) - H(t0-t)||_F / ||H(t0+t)||_F over t in (0, T/2]."""
    if not model.defect.co_driven:
        raise ValueError("time_reversal_residual needs a co-driven defect pair")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    half = model.period / 2.0
    worst = 0.0
    for k in range(1, n_samples + 1):
        t = k * half / n_samples
        hp = hamiltonian(model, t0 + t)
        hm = hamiltonian(model, t0 - t)
        worst = max(worst, np.linalg.norm(hp.conj() - hm) / np.linalg.norm(hp))
    return float(worst)


def hidden_symmetry_residual(state, lattice: LatticeSpec) -> tuple[float, float]:
    """Mirror asymmetry of |psi| restricted to even and to odd sites.

    r = sum(|psi_n| - |psi_{N-n+1}|)^2 / sum(|psi_n|^2 + |psi_{N-n+1}|^2)
    over the sites of one parity; 0 if that parity carries no weight.
    """
    amp = np.abs(np.asarray(state, dtype=np.complex128))
    if amp.shape != (lattice.n_sites,):
        raise ValueError(f"state length {amp.shape} != {lattice.n_sites}")
    if not np.any(amp):
        raise ValueError("zero state")
    mirrored = amp[::-1]
    site = np.arange(1, lattice.n_sites + 1)
    out = []
    for parity in (0, 1):
        sel = site % 2 == parity
        den = np.sum(amp[sel] ** 2 + mirrored[sel] ** 2)
        out.append(float(np.sum((amp[sel] - mirrored[sel]) ** 2) / den) if den > 0 else 0.0)
    return out[0], out[1]
