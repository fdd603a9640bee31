"""Dense complex kernels: product, exponential and general eigensystems.

Everything here works on square ``complex128`` numpy arrays.  The
exponential is a Pade-13 scaling-and-squaring implementation that makes no
Hermiticity assumption; the eigensolver wraps LAPACK ``zgeev`` and enforces a
residual contract on the result.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

# Frobenius-relative accuracy of mat_exp is guaranteed for ||scale*m||_2 <= 20;
# beyond EXP_NORM_LIMIT (1-norm) the squaring phase is refused outright.
EXP_ACCURATE_NORM = 20.0
EXP_NORM_LIMIT = 1.0e5

RESIDUAL_FACTOR = 1e-10
DEFECTIVE_CONDITION = 1e8
TIE_TOL = 1e-9

_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0,
        1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


class LinalgError(ArithmeticError):
    """Raised when a kernel cannot honour its accuracy contract."""


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` as a finite square complex matrix and return a copy."""
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def matrix_hash(m: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(m, dtype=np.complex128).tobytes()).hexdigest()[:16]


def mat_mul(a, b) -> np.ndarray:
    """Product of two square complex matrices of equal dimension."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def _pade_parts(x: np.ndarray, order: int, powers: dict):
    c = _PADE[order]
    ident = np.eye(x.shape[0], dtype=x.dtype)
    if order == 13:
        x2, x4, x6 = powers[2], powers[4], powers[6]
        u = x @ (x6 @ (c[13] * x6 + c[11] * x4 + c[9] * x2)
                 + c[7] * x6 + c[5] * x4 + c[3] * x2 + c[1] * ident)
        v = (x6 @ (c[12] * x6 + c[10] * x4 + c[8] * x2)
             + c[6] * x6 + c[4] * x4 + c[2] * x2 + c[0] * ident)
        return u, v
    odd = c[1] * ident
    even = c[0] * ident
    for k in range(2, order + 1, 2):
        even = even + c[k] * powers[k]
        odd = odd + c[k + 1] * powers[k]
    return x @ odd, even


def mat_exp(m, scale: complex = 1.0) -> np.ndarray:
    """Return exp(scale * m).

    Scaling and squaring with the smallest diagonal Pade approximant of
    degree 3, 5, 7, 9 or 13 whose backward-error bound covers the 1-norm.
    Relative Frobenius error stays below 1e-12 for ||scale*m||_2 <= 20.
    """
    x = as_matrix(m) * complex(scale)
    if not np.all(np.isfinite(x)):
        raise ValueError("scale*m has non-finite entries")
    n = x.shape[0]
    norm1 = np.abs(x).sum(axis=0).max()
    if norm1 > EXP_NORM_LIMIT:
        raise LinalgError(f"1-norm {norm1:.3g} exceeds the exponential envelope {EXP_NORM_LIMIT:g}")
    if norm1 == 0.0:
        return np.eye(n, dtype=np.complex128)

    powers = {2: x @ x}
    for order in (3, 5, 7, 9):
        if order >= 5:
            powers[order - 1] = powers[order - 3] @ powers[2]
        if norm1 <= _THETA[order]:
            u, v = _pade_parts(x, order, powers)
            return np.linalg.solve(v - u, v + u)

    s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    xs = x / 2.0 ** s
    scaled = {2: powers[2] / 4.0 ** s}
    scaled[4] = scaled[2] @ scaled[2]
    scaled[6] = scaled[4] @ scaled[2]
    u, v = _pade_parts(xs, 13, scaled)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def sort_order(values, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Permutation sorting by ascending real part, ties by imaginary part.

    Real parts closer than ``tie_tol`` to their predecessor form one tie
    group, so conjugate pairs are always ordered (-Im, +Im).
    """
    vals = np.asarray(values, dtype=np.complex128)
    order = np.argsort(vals.real, kind="stable")
    re = vals.real[order]
    out = []
    start = 0
    for i in range(1, len(order) + 1):
        if i == len(order) or re[i] - re[i - 1] > tie_tol:
            group = order[start:i]
            out.extend(group[np.argsort(vals.imag[group], kind="stable")])
            start = i
    return np.asarray(out, dtype=np.intp)


@dataclass(frozen=True)
class Eigensystem:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    condition: float
    near_defective: bool

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ np.linalg.inv(v)


def eig_general(m, sort: bool = True) -> Eigensystem:
    """Right eigensystem of a general complex matrix.

    LAPACK zgeev does the work (Hessenberg reduction plus shifted QR, with
    its own iteration cap).  Vectors come back with unit 2-norm; residuals
    ||M v - lambda v|| must stay below 1e-10 ||M||_F or LinalgError is
    raised.  Ordering follows :func:`sort_order` unless ``sort`` is false.
    """
    mat = as_matrix(m)
    try:
        w, v = np.linalg.eig(mat)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"eigensolver did not converge (matrix {matrix_hash(mat)})") from exc
    v = v / np.linalg.norm(v, axis=0)
    if sort:
        idx = sort_order(w)
        w, v = w[idx], v[:, idx]
    res = np.linalg.norm(mat @ v - v * w, axis=0)
    fro = np.linalg.norm(mat)
    if np.any(res > RESIDUAL_FACTOR * max(fro, np.finfo(float).tiny)):
        raise LinalgError(
            f"eigen residual {res.max():.3e} above contract for matrix {matrix_hash(mat)}")
    sv = np.linalg.svd(v, compute_uv=False)
    cond = float(np.inf if sv[-1] == 0 else sv[0] / sv[-1])
    return Eigensystem(w, v, res, cond, bool(cond > DEFECTIVE_CONDITION))
