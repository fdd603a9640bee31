import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import jv

from floquet_pt.analysis import zero_modes
from floquet_pt.effective import hf_couplings
from floquet_pt.floquet import converged_spectrum
from floquet_pt.lattice import make_model
from floquet_pt.topology import (ChiralSymmetryError, GaplessError, bloch_floquet,
                                 bloch_hamiltonian_t, brillouin_grid, chiral_expectation_scan,
                                 effective_bloch, floquet_windings, phase_winding,
                                 static_winding)


# decay length ~ 3J / gap must be well below N = 60
BULK_GAP_MIN = 0.05


def bulk(ratio=2.0, omega=20.0, amplitude=None, **kw):
    amp = ratio * omega if amplitude is None else amplitude
    return make_model(n_sites=60, amplitude=amp, omega=omega, **kw)


class TestPhaseWinding:
    @pytest.mark.parametrize("w", [-2, -1, 0, 1, 3])
    def test_circle(self, w):
        t = np.linspace(0, 2 * math.pi, 400, endpoint=False)
        assert phase_winding(np.exp(1j * w * t) + (0 if w else 2)) == pytest.approx(w, abs=1e-12)


class TestStaticWinding:
    def test_flat_limit(self):
        assert static_winding(1.0, 0.0).nu == 0

    def test_intercell_dominated(self):
        r = static_winding(*hf_couplings(2.0))
        assert r.nu == 1 and r.residual < 1e-10 and r.chiral_certificate == 0.0

    def test_intracell_dominated(self):
        assert static_winding(*hf_couplings(3.0)).nu == 0

    def test_gapless(self):
        with pytest.raises(GaplessError, match="gapless"):
            static_winding(1.0, -1.0, 1.0, 1.0, 1000)

    @pytest.mark.parametrize("kw", [dict(j1=0.0, j2=0.0), dict(j1=1.0, j2=0.5, n_k=200)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            static_winding(**kw)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 3.0), st.floats(0.05, 3.0), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
    def test_matches_magnitude_rule(self, j1, j2, a, b):
        if abs(abs(j1) - abs(j2)) < 1e-3:
            return
        assert static_winding(j1, j2, a, b).nu == (1 if abs(j2) > abs(j1) else 0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 3.2))
    def test_grid_refinement(self, ratio):
        j1, j2 = hf_couplings(ratio)
        if abs(abs(j1) - abs(j2)) < 1e-2:
            return
        a = static_winding(j1, j2, n_k=1001)
        b = static_winding(j1, j2, n_k=2002)
        assert a.nu == b.nu and abs(a.raw - b.raw) < 1e-3


class TestBlochHamiltonian:
    def test_static_k0(self):
        h = bloch_hamiltonian_t(bulk(amplitude=0.0), 0.0, 0.3)
        assert (h.hx, h.hy, h.hz) == pytest.approx((2.0, 0.0, 0.0))

    def test_quarter_period(self):
        m = bulk()
        k = 0.7
        h = bloch_hamiltonian_t(m, k, m.period / 4)
        static = bloch_hamiltonian_t(bulk(amplitude=0.0), k, 0.0)
        assert abs(h.off_diag - static.off_diag) < 1e-14

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-3, 3), st.floats(0, 1))
    def test_reconstruction(self, k, t):
        h = bloch_hamiltonian_t(bulk(), k, t)
        assert abs(h.off_diag - (h.hx - 1j * h.hy)) < 1e-14
        ev = np.linalg.eigvalsh(h.matrix())
        np.testing.assert_allclose(ev, [-abs(h.off_diag), abs(h.off_diag)], atol=1e-13)


class TestEffectiveBloch:
    def test_high_frequency_matches_average(self):
        m = bulk()
        k = 0.4
        h, (ep, em) = effective_bloch(m, k, 0.0)
        j1, j2 = hf_couplings(2.0)
        avg = abs(j1 + j2 * np.exp(-3j * k))
        assert ep == pytest.approx(avg, abs=1e-2)
        assert em == -ep

    @pytest.mark.parametrize("tau_frac", [0.0, 0.25, 0.5, 0.75])
    def test_high_frequency_hz_small(self, tau_frac):
        m = bulk()
        for k in (0.1, 0.9, 1.7):
            h, (ep, _) = effective_bloch(m, k, tau_frac * m.period)
            assert abs(h.hz) < 1e-6 * max(1.0, abs(ep))

    def test_particle_hole_pairing(self):
        m = bulk(omega=1.0)
        for tau in (0.0, m.period / 2):
            data = bloch_floquet(m, brillouin_grid(1, 2, 64), tau)
            assert data.pairing_error < 1e-9

    def test_touching_flagged(self):
        # A=0 uniform chain at k = pi/3 has Delta = 0: both bands at eps = 0
        m = make_model(n_sites=60, amplitude=0.0, omega=20.0, a=1.0, b=1.0)
        with pytest.raises(GaplessError):
            effective_bloch(m, math.pi / 2 * 2 / 2, 0.0)


class TestChiralScan:
    @pytest.mark.parametrize("omega", [1.0, 2.0, 10.0, 20.0])
    @pytest.mark.parametrize("tau_frac", [0.0, 0.5])
    def test_chiral_frames(self, omega, tau_frac):
        m = bulk(amplitude=2.0, omega=omega)
        assert chiral_expectation_scan(m, tau_frac * m.period).max_abs < 1e-6

    @pytest.mark.parametrize("tau_frac", [0.25, 0.75])
    def test_low_frequency_broken(self, tau_frac):
        m = bulk(amplitude=2.0, omega=1.0)
        assert chiral_expectation_scan(m, tau_frac * m.period).max_abs > 1e-2

    @pytest.mark.parametrize("tau_frac", [0.25, 0.75])
    def test_high_frequency_flat(self, tau_frac):
        m = bulk(amplitude=2.0, omega=20.0)
        assert chiral_expectation_scan(m, tau_frac * m.period).max_abs < 1e-6

    def test_pairs_and_size(self):
        scan = chiral_expectation_scan(bulk(), 0.0, 64)
        assert len(scan.k) == 64 and len(scan.pairs()) == int(np.sum(~scan.touching))

    def test_rejects_coarse_grid(self):
        with pytest.raises(ValueError):
            chiral_expectation_scan(bulk(), 0.0, 32)


class TestFloquetWindings:
    @pytest.mark.parametrize("ratio,nu", [(2.0, 1), (3.0, 0), (0.5, 0)])
    def test_high_frequency(self, ratio, nu):
        fw = floquet_windings(bulk(ratio=ratio), 256)
        assert (fw.nu0, fw.nu_pi) == (nu, 0)

    @pytest.mark.parametrize("ratio,nu0", [(0.5, 1), (1.0, 2), (2.0, 1), (3.0, 0)])
    def test_low_frequency(self, ratio, nu0):
        fw = floquet_windings(bulk(ratio=ratio, omega=1.0), 256)
        assert fw.nu1.nu == fw.nu2.nu
        assert (fw.nu0, fw.nu_pi) == (nu0, 0)

    def test_grid_refinement(self):
        m = bulk(ratio=1.0, omega=1.0)
        a = floquet_windings(m, 256)
        b = floquet_windings(m, 512)
        assert [r.nu for r in (a.nu1, a.nu2)] == [r.nu for r in (b.nu1, b.nu2)]
        assert abs(a.nu1.raw - b.nu1.raw) < 1e-3 and abs(a.nu2.raw - b.nu2.raw) < 1e-3

    @pytest.mark.parametrize("ratio", [0.3, 0.8, 1.5, 2.0, 2.2, 2.6, 3.0])
    def test_high_frequency_consistency(self, ratio):
        j1, j2 = hf_couplings(ratio)
        assert floquet_windings(bulk(ratio=ratio), 256).nu0 == static_winding(j1, j2).nu

    def test_rational_halves(self):
        fw = floquet_windings(bulk(), 256)
        assert fw.nu0.denominator in (1, 2) and list(fw)[2] == fw.nu0

    @pytest.mark.parametrize("omega", [20.0, 1.0])
    @pytest.mark.parametrize("ratio", [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    def test_bulk_edge_correspondence(self, ratio, omega):
        m = bulk(ratio=ratio, omega=omega)
        data = bloch_floquet(m, brillouin_grid(1, 2, 256), 0.0)
        gap = float(np.min(np.abs(data.eps_plus)))
        if gap < BULK_GAP_MIN:
            pytest.skip(f"zero-energy gap {gap:.2g}: edge-mode decay length exceeds N=60")
        nu0 = floquet_windings(m, 256).nu0
        # count localised states inside the bulk gap; finite-size splitting can exceed 1e-5
        modes = zero_modes(converged_spectrum(m), m, eps_tol=gap / 2)
        assert len(modes) == 2 * abs(nu0)
