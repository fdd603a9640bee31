"""Integer-order Bessel functions J_l and modified I_l (Miller's algorithm)."""

from __future__ import annotations

import math

import numpy as np

J_ORDER_LIMIT = 200
J_ARG_LIMIT = 100.0
I_ORDER_LIMIT = 200
I_ARG_LIMIT = 50.0
_BIG = 1e250
# below this argument the power series is used (no cancellation, no overflow)
SERIES_SWITCH = 0.5


def _check(l: int, x: float, lmax: int, xmax: float, name: str) -> None:
    if int(l) != l:
        raise ValueError(f"{name}: order must be an integer, got {l}")
    if abs(l) > lmax or not abs(x) <= xmax:
        raise ValueError(f"{name}: (l={l}, x={x}) outside |l|<={lmax}, |x|<={xmax}")


def _backward(x: float, top: int, lmax: int, sign: float):
    """Backward recurrence f_{k-1} = (2k/x) f_k + sign*f_{k+1}, rescaled.

    sign=-1 gives the J family, sign=+1 the I family.  Returns the
    unnormalised values f_0..f_lmax and the two partial sums used by the
    normalisation identities (even-index sum and full sum).
    """
    vals = np.zeros(lmax + 1)
    f_next, f_cur = 0.0, 1e-300
    even_sum = 0.0
    full_sum = 0.0
    for k in range(top, 0, -1):
        if k <= lmax:
            vals[k] = f_cur
        if k % 2 == 0:
            even_sum += f_cur
        full_sum += f_cur
        f_prev = (2.0 * k / x) * f_cur + sign * f_next
        f_next, f_cur = f_cur, f_prev
        if abs(f_cur) > _BIG:
            f_cur /= _BIG
            f_next /= _BIG
            vals /= _BIG
            even_sum /= _BIG
            full_sum /= _BIG
    vals[0] = f_cur
    return vals, even_sum, full_sum


def _start_index(order: int, x: float) -> int:
    base = max(order, int(math.ceil(abs(x))))
    top = base + 40 + int(math.sqrt(40.0 * base + 1.0)) + int(abs(x))
    return top + (top % 2)


def _small_x_series(lmax: int, x: float, sign: float) -> np.ndarray:
    """Power series sum_m sign^m (x/2)^(2m+l) / (m! (m+l)!) for small x >= 0."""
    out = np.zeros(lmax + 1)
    out[0] = 1.0
    if 0.5 * x == 0.0:
        return out
    q = 0.25 * x * x
    log_half = math.log(0.5 * x)
    for l in range(lmax + 1):
        log_lead = l * log_half - math.lgamma(l + 1)
        if log_lead < -745.0:
            break  # every higher order underflows too
        term = math.exp(log_lead)
        total = term
        m = 0
        while abs(term) > 1e-17 * abs(total):
            m += 1
            term *= sign * q / (m * (m + l))
            total += term
        out[l] = total
    return out


def bessel_j_orders(lmax: int, x: float) -> np.ndarray:
    """J_0(x) .. J_lmax(x) for x >= 0, normalised by J_0 + 2*sum J_2k = 1."""
    if x < SERIES_SWITCH:
        return _small_x_series(lmax, x, -1.0)
    vals, even_sum, _ = _backward(x, _start_index(lmax, x), lmax, -1.0)
    return vals / (vals[0] + 2.0 * even_sum)


def bessel_i_orders(lmax: int, x: float) -> np.ndarray:
    """I_0(x) .. I_lmax(x) for x >= 0, normalised by I_0 + 2*sum I_k = e^x."""
    if x < SERIES_SWITCH:
        return _small_x_series(lmax, x, 1.0)
    vals, _, full_sum = _backward(x, _start_index(lmax, x), lmax, 1.0)
    # scale via logs so that e^x never has to be formed for the largest x
    norm = vals[0] + 2.0 * full_sum
    return vals * math.exp(x - math.log(norm)) if norm > 0 else vals


def bessel_j(l: int, x: float) -> float:
    """Bessel function of the first kind J_l(x), absolute error <= 1e-13.

    Envelope |l| <= 200, |x| <= 100.
    """
    _check(l, x, J_ORDER_LIMIT, J_ARG_LIMIT, "bessel_j")
    l = int(l)
    order = abs(l)
    val = bessel_j_orders(order, abs(x))[order]
    # J_{-l} = (-1)^l J_l and J_l(-x) = (-1)^l J_l(x)
    flips = (order if l < 0 else 0) + (order if x < 0 else 0)
    return float(-val if flips % 2 else val)


def bessel_i(l: int, x: float) -> float:
    """Modified Bessel function I_l(x), relative error <= 1e-12.

    Envelope |l| <= 200, |x| <= 50.
    """
    _check(l, x, I_ORDER_LIMIT, I_ARG_LIMIT, "bessel_i")
    order = abs(int(l))
    val = bessel_i_orders(order, abs(x))[order]
    # I_{-l} = I_l and I_l(-x) = (-1)^l I_l(x)
    return float(-val if (x < 0 and order % 2) else val)
