"""Pure numpy versions of the hot loops (reference and fallback)."""

import numpy as np


def chain_apply(mats, idx, kicks, y):
    """diag(k_J) M[i_J-1] ... diag(k_1) M[i_0] diag(k_0) @ y.

    mats: (m, N, N) complex; idx: (J,) ints into mats; kicks: (J+1, N)
    complex row scalings; y: (N, K) complex.  Returns a new (N, K) array.
    """
    out = kicks[0][:, None] * y
    for j, i in enumerate(idx):
        out = mats[i] @ out
        out *= kicks[j + 1][:, None]
    return out


def bloch_product(beta, h):
    """Time-ordered product of exact 2x2 exponentials, batched over k.

    Step s applies exp(-i h[s] [[0, beta], [conj(beta), 0]]) with
    beta = beta[s, :].  Returns (n_k, 2, 2), earliest step rightmost.
    """
    n_k = beta.shape[1]
    u = np.zeros((n_k, 2, 2), dtype=np.complex128)
    u[:, 0, 0] = u[:, 1, 1] = 1.0
    for s in range(beta.shape[0]):
        bs = beta[s]
        mod = np.abs(bs)
        c = np.cos(mod * h[s])
        sinc = np.where(mod > 0, np.sin(mod * h[s]) / np.where(mod > 0, mod, 1.0), h[s])
        e01 = -1j * sinc * bs
        e10 = -1j * sinc * np.conj(bs)
        u00 = c * u[:, 0, 0] + e01 * u[:, 1, 0]
        u01 = c * u[:, 0, 1] + e01 * u[:, 1, 1]
        u10 = e10 * u[:, 0, 0] + c * u[:, 1, 0]
        u11 = e10 * u[:, 0, 1] + c * u[:, 1, 1]
        u[:, 0, 0], u[:, 0, 1], u[:, 1, 0], u[:, 1, 1] = u00, u01, u10, u11
    return u
