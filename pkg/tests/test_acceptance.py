"""Acceptance criteria 1-10.  Each test prints one PASS/FAIL line."""

import math
import time

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import j0

from floquet_pt.analysis import (conjugate_pairing_error, find_threshold, mode_diagnostics,
                                 sigma_p_trace, zero_modes)
from floquet_pt.effective import (double_drive_effective_chain, effective_spectrum,
                                  fold_to_zone, hf_couplings, hf_effective_chain)
from floquet_pt.floquet import (converged_spectrum, propagate_period, spectral_drift,
                                spectrum_from_propagator)
from floquet_pt.lattice import make_model
from floquet_pt.linalg import sort_order
from floquet_pt.special import bessel_i, bessel_j
from floquet_pt.topology import (GaplessError, chiral_expectation_scan, floquet_windings,
                                 static_winding)

pytestmark = pytest.mark.acceptance


def model(n=60, ratio=2.0, omega=20.0, **kw):
    return make_model(n_sites=n, amplitude=ratio * omega, omega=omega, **kw)


def sorted_folded(values, period):
    vals = fold_to_zone(values, period)
    return vals[sort_order(vals)]


# ---------------------------------------------------------------- 1

def test_criterion_01_static_phase_boundary(verdict):
    start = time.perf_counter()
    step = 0.02
    ratios = np.round(np.arange(0, 161) * step, 12)
    nus, skipped = {}, []
    for r in ratios:
        j1, j2 = hf_couplings(r)
        try:
            nus[r] = static_winding(j1, j2, 1.0, 2.0).nu
        except (GaplessError, ArithmeticError):
            skipped.append(r)  # exactly |J1| = |J2|: gapless, winding undefined
    runtime = time.perf_counter() - start

    # Bessel oracle (scipy j0, independent of the in-house series)
    def f(r):
        return abs(j0(2 * r)) - abs(j0(r))
    expected = {r: int(f(r) > 0) for r in nus}
    wrong = [r for r in nus if nus[r] != expected[r]]
    fine = np.linspace(1e-6, 3.2, 32001)
    vals = np.array([f(r) for r in fine])
    crossings = [brentq(f, fine[i], fine[i + 1]) for i in np.nonzero(np.diff(np.sign(vals)))[0]]
    # boundaries of the nu=1 set found on the grid
    grid = sorted(nus)
    edges = [0.5 * (a + b) for a, b in zip(grid[:-1], grid[1:]) if nus[a] != nus[b]]
    matched = len(edges) == len(crossings) and all(
        abs(e - c) <= step for e, c in zip(edges, crossings))
    degenerate_ok = all(abs(f(r)) < 1e-9 for r in skipped)
    ok = not wrong and matched and degenerate_ok and runtime < 1.0
    verdict(1, ok, f"mismatches={len(wrong)}, grid edges={np.round(edges, 3).tolist()}, "
                   f"oracle crossings={np.round(crossings, 4).tolist()}, "
                   f"gapless points={skipped}, runtime={runtime:.2f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_02_threshold_parity(verdict):
    start = time.perf_counter()
    res2 = {m0: find_threshold(model(m0=m0)) for m0 in range(1, 8)}
    res3 = {m0: find_threshold(model(ratio=3.0, m0=m0)) for m0 in range(1, 8)}
    runtime = time.perf_counter() - start
    checks = {
        "odd zero": all(res2[m].status == "zero" for m in (1, 3, 5)),
        "even found >= 0.05": all(res2[m].status == "found" and res2[m].gamma_c >= 0.05
                                  for m in (2, 4, 6)),
        "m0=7 found": res2[7].status == "found" and res2[7].gamma_c > 0,
        "A/w=3 all found": all(r.status == "found" for r in res3.values()),
        "runtime": runtime < 600,
    }
    ok = all(checks.values())
    summary = " ".join(f"{m}:{r.status}/{r.gamma_c:.3g}" for m, r in res2.items())
    summary3 = " ".join(f"{m}:{r.status}/{r.gamma_c:.3g}" for m, r in res3.items())
    failed = [k for k, v in checks.items() if not v]
    verdict(2, ok, f"A/w=2 [{summary}] A/w=3 [{summary3}] failed={failed} "
                   f"runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_03_mode_structure(verdict):
    start = time.perf_counter()
    m = model(m0=2, gamma=0.5)
    spec = converged_spectrum(m)
    eps = spec.quasienergies
    zero = [j for j in range(spec.size) if abs(eps[j]) < 1e-6 and abs(eps[j].imag) < 1e-8]
    complex_idx = [j for j in range(spec.size) if abs(eps[j].imag) > 1e-3]
    # every complex mode outside the zero set; two conjugate pairs
    extra = [j for j in complex_idx if j not in zero]
    pairs_ok = len(extra) == 4 and conjugate_pairing_error(eps[extra]) < 1e-8
    gain_weight_ok = False
    if pairs_ok:
        gain = [j for j in extra if eps[j].imag > 0]
        gain_weight_ok = all(mode_diagnostics(spec, j, m).defect_weight > 0.2 for j in gain)
    left = [z for z in zero_modes(spec, m) if z.side == "left"]
    even_weight = (float(np.sum(np.abs(left[0].vector[1::2]) ** 2)) if left else math.nan)
    runtime = time.perf_counter() - start
    near = np.sort_complex(eps[np.argsort(np.abs(eps))[:2]])
    ok = (len(zero) == 2 and pairs_ok and gain_weight_ok and even_weight < 1e-6
          and runtime < 60)
    verdict(3, ok, f"zero modes={len(zero)} (two smallest |eps|: {np.round(near, 6).tolist()}), "
                   f"|Im|>1e-3 modes={len(complex_idx)}, pairs ok={pairs_ok}, "
                   f"gain weight ok={gain_weight_ok}, left even weight={even_weight:.2g}, "
                   f"runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_04_chiral_certificate(verdict):
    start = time.perf_counter()
    table = {}
    for omega in (1.0, 2.0, 10.0, 20.0):
        m = make_model(n_sites=60, amplitude=2.0, omega=omega)
        for frac in (0.0, 0.25, 0.5, 0.75):
            table[omega, frac] = chiral_expectation_scan(m, frac * m.period).max_abs
    runtime = time.perf_counter() - start
    checks = {
        "tau in {0,T/2} < 1e-6": all(table[w, f] < 1e-6 for w in (1.0, 2.0, 10.0, 20.0)
                                     for f in (0.0, 0.5)),
        "w=1 tau in {T/4,3T/4} > 1e-2": table[1.0, 0.25] > 1e-2 and table[1.0, 0.75] > 1e-2,
        "w=20 all tau < 1e-6": all(table[20.0, f] < 1e-6 for f in (0.0, 0.25, 0.5, 0.75)),
        "runtime": runtime < 60,
    }
    ok = all(checks.values())
    cells = " ".join(f"w={w:g},tau={f}T:{v:.1e}" for (w, f), v in table.items())
    verdict(4, ok, f"failed={[k for k, v in checks.items() if not v]} [{cells}] "
                   f"runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_05_sigma_p_dichotomy(verdict):
    start = time.perf_counter()
    high = sigma_p_trace(model(omega=20.0), 65)
    low = sigma_p_trace(model(omega=1.0), 65)
    runtime = time.perf_counter() - start
    half = int(np.argmin(np.abs(low.times - low.times[-1] / 2)))
    checks = {
        "w=20 max < 1e-5": high.sigma_p.max() < 1e-5,
        "w=1 t=0 < 1e-4": low.sigma_p[0] < 1e-4,
        "w=1 t=T/2 < 1e-4": low.sigma_p[half] < 1e-4,
        "w=1 max > 1e-2": low.sigma_p.max() > 1e-2,
        "runtime": runtime < 120,
    }
    ok = all(checks.values())
    verdict(5, ok, f"w=20 max={high.sigma_p.max():.2e}; w=1 t=0:{low.sigma_p[0]:.2e} "
                   f"t=T/2:{low.sigma_p[half]:.2e} max={low.sigma_p.max():.2e}; "
                   f"failed={[k for k, v in checks.items() if not v]} runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 6

def test_criterion_06_low_frequency_zero_threshold(verdict):
    start = time.perf_counter()
    base = model(omega=1.0)
    hosts_edges = len(zero_modes(converged_spectrum(base), base)) > 0
    res = {m0: find_threshold(model(omega=1.0, m0=m0)) for m0 in (1, 2, 3, 4)}
    runtime = time.perf_counter() - start
    all_zero = all(r.status == "zero" and r.gamma_c < 1e-3 for r in res.values())
    ok = (all_zero or not hosts_edges) and runtime < 600
    verdict(6, ok, f"boundary states present={hosts_edges}, "
                   + " ".join(f"m0={m}:{r.status}" for m, r in res.items())
                   + f" runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 7

def bessel_zero(order_zero_index, spacing):
    """A/omega at which J0(A spacing / omega) vanishes (mpmath oracle)."""
    return float(mpmath.besseljzero(0, order_zero_index)) / spacing


def test_criterion_07_odd_lattice_cdt(verdict):
    start = time.perf_counter()
    # a-bond zero (a=1) at 2.405, b-bond zeros (b=2) at 1.202 and 2.760
    ratios = (bessel_zero(1, 2.0), bessel_zero(1, 1.0), bessel_zero(2, 2.0))
    cdt = {}
    for r in ratios:
        for m0 in range(1, 11):
            cdt[r, m0] = find_threshold(model(n=61, ratio=r, m0=m0)).status
    parity = {m0: find_threshold(model(n=61, m0=m0)) for m0 in range(1, 7)}
    runtime = time.perf_counter() - start
    cdt_ok = all(s == "zero" for s in cdt.values())
    parity_ok = all((parity[m].status == "zero") == (m % 2 == 1) and
                    (m % 2 == 1 or parity[m].status == "found") for m in parity)
    ok = cdt_ok and parity_ok and runtime < 1200
    bad = [k for k, s in cdt.items() if s != "zero"]
    verdict(7, ok, f"CDT ratios={np.round(ratios, 4).tolist()} non-zero cells={bad}; "
                   f"A/w=2 parity "
                   + " ".join(f"{m}:{r.status}/{r.gamma_c:.3g}" for m, r in parity.items())
                   + f" runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 8

DOUBLE_DRIVE_SCAN = dict(gamma_max=100.0, coarse_step=2.0, refine_tol=1e-2)


def test_criterion_08_double_drive(verdict):
    start = time.perf_counter()
    quad = find_threshold(model(m0=2, co_driven=True, theta=math.pi / 2))
    g20 = find_threshold(model(m0=2, co_driven=True), **DOUBLE_DRIVE_SCAN)
    g10 = find_threshold(model(omega=10.0, m0=2, co_driven=True), **DOUBLE_DRIVE_SCAN)
    single20 = find_threshold(model(m0=2))
    single10 = find_threshold(model(omega=10.0, m0=2))
    runtime = time.perf_counter() - start
    checks = {
        "theta=pi/2 zero": quad.status == "zero",
        "found": g20.status == "found" and g10.status == "found",
        "g20 > g10 > 0": g20.gamma_c > g10.gamma_c > 0,
        "exceed single drive": g20.gamma_c > single20.gamma_c and g10.gamma_c > single10.gamma_c,
        "runtime": runtime < 900,
    }
    ok = all(checks.values())
    verdict(8, ok, f"theta=pi/2:{quad.status}; gamma_c(w=20)={g20.gamma_c:.3g} ({g20.status}), "
                   f"gamma_c(w=10)={g10.gamma_c:.3g} ({g10.status}); single drive "
                   f"w=20:{single20.status}/{single20.gamma_c:.3g} "
                   f"w=10:{single10.status}/{single10.gamma_c:.3g}; "
                   f"failed={[k for k, v in checks.items() if not v]} runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_09_effective_equivalence(verdict):
    start = time.perf_counter()
    hf_dev = {}
    for ratio in (1.0, 2.0, 3.0):
        for gamma in (0.0, 0.2):
            m = model(ratio=ratio, m0=2, gamma=gamma)
            exact = converged_spectrum(m).quasienergies
            eff = sorted_folded(effective_spectrum(hf_effective_chain(m)), m.period)
            hf_dev[ratio, gamma] = float(np.abs(exact - eff).max())
    dd_dev, dd_imag = {}, {}
    for gamma in (0.5, 1.0):
        m = model(omega=40.0, m0=2, gamma=gamma, co_driven=True)
        vals = effective_spectrum(double_drive_effective_chain(m))
        dd_imag[gamma] = float(np.abs(vals.imag).max())
        exact = converged_spectrum(m).quasienergies
        dd_dev[gamma] = float(np.abs(exact - sorted_folded(vals, m.period)).max())
    runtime = time.perf_counter() - start
    ok = (max(hf_dev.values()) <= 1e-2 and max(dd_imag.values()) < 1e-12
          and max(dd_dev.values()) <= 2e-2 and runtime < 120)
    verdict(9, ok, f"hf max dev={max(hf_dev.values()):.2e}, double-drive max|Im|="
                   f"{max(dd_imag.values()):.1e}, double-drive dev={max(dd_dev.values()):.2e}, "
                   f"runtime={runtime:.0f}s")
    assert ok


# ---------------------------------------------------------------- 10

def test_criterion_10_property_suite(verdict):
    start = time.perf_counter()
    results = {}

    m = model()
    u = propagate_period(m, "rotated", 0.0, 4096).u
    results["unitarity"] = np.linalg.norm(u.conj().T @ u - np.eye(60)) < 1e-9

    drifts = []
    for mm in (model(m0=2, gamma=0.3), model(n=20, omega=5.0, m0=3, gamma=0.4, co_driven=True)):
        a = converged_spectrum(mm, "lab", max_steps=2 ** 15)
        b = converged_spectrum(mm, "rotated")
        drifts.append(spectral_drift(a.quasienergies, b.quasienergies, mm.period))
    results["gauge invariance"] = max(drifts) < 1e-8

    pair_err = max(conjugate_pairing_error(converged_spectrum(model(m0=m0, gamma=g)).quasienergies)
                   for m0, g in ((1, 0.3), (2, 0.5), (3, 1.0)))
    results["conjugate pairs"] = pair_err < 1e-8

    stable = True
    for ratio in (0.5, 2.0, 3.0):
        j1, j2 = hf_couplings(ratio)
        a, b = static_winding(j1, j2, n_k=1001), static_winding(j1, j2, n_k=2002)
        stable &= a.nu == b.nu and abs(a.raw - b.raw) < 1e-3
    fa = floquet_windings(model(ratio=1.0, omega=1.0), 256)
    fb = floquet_windings(model(ratio=1.0, omega=1.0), 512)
    stable &= (fa.nu1.nu, fa.nu2.nu) == (fb.nu1.nu, fb.nu2.nu)
    results["winding refinement"] = bool(stable)

    mr = model(n=20)
    eps = [spectrum_from_propagator(propagate_period(mr, "rotated", 0.0, n), mr.period).quasienergies
           for n in (1024, 2048, 4096)]
    ratio = (spectral_drift(eps[0], eps[1], mr.period) / spectral_drift(eps[1], eps[2], mr.period))
    results["order-2 ratio"] = abs(ratio - 4.0) < 0.5

    mpmath.mp.dps = 60
    worst = 0.0
    for l, x in ((0, 2.0), (1, 7.5), (5, 0.3), (20, 15.0), (3, 40.0)):
        worst = max(worst, abs(bessel_j(l, x) - float(mpmath.besselj(l, x))))
        ref = mpmath.besseli(l, min(x, 20.0))
        worst = max(worst, abs(bessel_i(l, min(x, 20.0)) / float(ref) - 1.0))
    results["series oracle"] = worst < 1e-12

    runtime = time.perf_counter() - start
    results["runtime"] = runtime < 60
    ok = all(results.values())
    verdict(10, ok, f"gauge drift={max(drifts):.1e}, pairing={pair_err:.1e}, "
                    f"order ratio={ratio:.3f}, Bessel worst={worst:.1e}, "
                    f"failed={[k for k, v in results.items() if not v]} runtime={runtime:.0f}s")
    assert ok
