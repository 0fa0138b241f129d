import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcurv.curvature import (TWO_PI, CurvatureBand, PhiParams, band_to_V, curvature_flat, curvature_fs,
                                expected_kappa_jet, jet_mean_V, phi_closed, phi_mc, sample_exact_jet,
                                vitter_V)
from randcurv.errors import SingularPoint
from randcurv.projective import Jet2, directional_jet, sample_kostlan
from randcurv.rng import RngStream

F0_JET = Jet2(0, 0.5, 0.5, 0, 0, 1)


def _random_jet(g):
    v = g.standard_normal(10)
    return Jet2(0, *(v[:5] + 1j * v[5:]))


class TestPointwise:
    def test_f0_extreme(self):
        assert vitter_V(F0_JET) == pytest.approx(2.0)
        assert curvature_flat(F0_JET) == pytest.approx(-2.0)

    def test_flat_second_order(self):
        assert vitter_V(Jet2(0, 1 + 2j, -0.3, 0, 0, 0)) == 0
        assert curvature_flat(Jet2(0, 1, 0, 0, 0, 0)) == 0

    def test_singular(self):
        with pytest.raises(SingularPoint):
            vitter_V(Jet2(0, 0, 0, 0, 0, 1))

    def test_f0_boundary_point(self):
        # on zw = 1/4 with |z|^2 = t on the unit sphere: t + 1/(16 t) = 1
        t = (2 - math.sqrt(3)) / 4
        z = math.sqrt(t)
        w = 1 / (4 * z)
        assert curvature_flat(Jet2(0, w, z, 0, 0, 1)) == pytest.approx(-0.25)

    def test_line_has_curvature_two_pi(self):
        assert curvature_fs(Jet2(0, 0.3, 1j, 0, 0, 0)) == pytest.approx(TWO_PI)

    def test_fs_zero_when_V_is_two(self):
        assert curvature_fs(F0_JET) == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32), mod=st.floats(1e-6, 1e6), arg=st.floats(0, 2 * math.pi))
    def test_scale_invariance(self, seed, mod, arg):
        jet = _random_jet(np.random.default_rng(seed))
        lam = mod * complex(math.cos(arg), math.sin(arg))
        assert vitter_V(jet.scaled(lam)) == pytest.approx(vitter_V(jet), rel=1e-12)

    def test_scale_invariance_bulk(self):
        g = np.random.default_rng(1)
        n = 10**6
        v = g.standard_normal((10, n))
        jet = Jet2(np.zeros(n), *(v[:5] + 1j * v[5:]))
        lam = np.exp(g.uniform(-5, 5, n) + 1j * g.uniform(0, 2 * np.pi, n))
        a = vitter_V(jet)
        b = vitter_V(jet.scaled(lam))
        assert np.max(np.abs(a - b) / np.maximum(a, 1e-300)) <= 1e-12

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32))
    def test_frame_invariance(self, seed):
        g = np.random.default_rng(seed)
        jet = _random_jet(g)
        U, _ = np.linalg.qr(g.standard_normal((2, 2)) + 1j * g.standard_normal((2, 2)))
        grad = np.array([jet.fz, jet.fw]) @ U
        H = np.array([[jet.fzz, jet.fzw], [jet.fzw, jet.fww]])
        H = U.T @ H @ U
        rot = Jet2(0, grad[0], grad[1], H[0, 0], H[1, 1], H[0, 1])
        assert vitter_V(rot) == pytest.approx(vitter_V(jet), rel=1e-10)

    def test_upper_bound(self):
        g = np.random.default_rng(2)
        v = g.standard_normal((10, 10**5))
        jet = Jet2(np.zeros(10**5), *(v[:5] + 1j * v[5:]))
        assert np.all(curvature_fs(jet) <= TWO_PI)


class TestBands:
    def test_fs_band(self):
        d = 7
        lo, hi = band_to_V(CurvatureBand.fs(1, 4, d), "fs")
        assert lo == pytest.approx(d / math.pi) and hi == pytest.approx(4 * d / math.pi)

    def test_flat_band(self):
        assert band_to_V(CurvatureBand(-2, -0.25), "flat") == (0.25, 2)

    def test_negative_band(self):
        d = 12
        lo, hi = band_to_V(CurvatureBand(-4 * d, -d / 8), "fs")
        assert lo == pytest.approx(d / (8 * math.pi) + 2) and hi == pytest.approx(4 * d / math.pi + 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            CurvatureBand(1, 1)
        with pytest.raises(ValueError):
            PhiParams(2, 1)


class TestExactJets:
    def test_variances(self):
        jet = sample_exact_jet(2, RngStream(4), n=10**5)
        for val, target in ((jet.fzw, 2.0), (jet.fzz, 4.0), (jet.fz, 2.0)):
            x = np.abs(val) ** 2
            assert abs(x.mean() - target) < 3 * x.std() / math.sqrt(len(x))

    def test_matches_polynomial_jets(self):
        # second moments of jets read off sampled Kostlan polynomials at e0
        d, n = 4, 10**4
        s = RngStream(5)
        E = tuple(np.eye(3, dtype=complex))
        jets = [directional_jet(sample_kostlan(d, s.derive("p", i)), E) for i in range(n)]
        law = {"fz": d, "fw": d, "fzz": 2 * d * (d - 1), "fww": 2 * d * (d - 1), "fzw": d * (d - 1)}
        for name, var in law.items():
            x = np.abs([getattr(j, name) for j in jets]) ** 2
            assert abs(x.mean() - var) < 3 * x.std() / math.sqrt(n)

    def test_single_draw(self):
        jet = sample_exact_jet(3, RngStream(1))
        assert isinstance(jet.fz, complex) and jet.f0 == 0


class TestPhi:
    def test_closed_form_limits(self):
        assert phi_closed(PhiParams(1e-12)) == pytest.approx(1, abs=1e-12)
        assert phi_closed(PhiParams(TWO_PI)) == pytest.approx(1 / 8)
        assert phi_closed(PhiParams(1, 4)) == pytest.approx(0.41394, abs=1e-5)

    def test_mc_matches_closed(self):
        est = phi_mc(PhiParams(0.5, 2), 2 * 10**5, RngStream(8))
        assert est.within(phi_closed(PhiParams(0.5, 2)), 3)

    def test_additivity(self):
        n = 2 * 10**5
        a = phi_mc(PhiParams(1, 3), n, RngStream(1))
        b = phi_mc(PhiParams(3, 9), n, RngStream(2))
        c = phi_mc(PhiParams(1, 9), n, RngStream(3))
        assert abs(a.mean + b.mean - c.mean) < 3 * math.sqrt(a.stderr**2 + b.stderr**2 + c.stderr**2)

    def test_thread_independence(self):
        a = phi_mc(PhiParams(1, 4), 3 * 2**16 + 5, RngStream(9), threads=1)
        b = phi_mc(PhiParams(1, 4), 3 * 2**16 + 5, RngStream(9), threads=3)
        assert a == b


class TestKappaJet:
    def test_total_mass(self):
        est = expected_kappa_jet(5, CurvatureBand(-math.inf, TWO_PI), 10**5, RngStream(1))
        assert est.mean == 1.0

    def test_large_degree_near_limit(self):
        d = 1000
        est = expected_kappa_jet(d, CurvatureBand.fs(1, 4, d), 5 * 10**5, RngStream(2))
        exact = phi_closed(PhiParams(d / (d - 1), 4 * d / (d - 1)))
        assert est.within(exact, 3)
        assert abs(est.mean - phi_closed(PhiParams(1, 4))) < 3 * est.stderr + 5 / d

    def test_area_biased_mean(self):
        est = jet_mean_V(3, 3 * 10**5, RngStream(3))
        assert est.within(2.0, 3)

    def test_k_max_recorded(self):
        est = expected_kappa_jet(4, CurvatureBand.fs(1, 4, 4), 10**4, RngStream(1))
        assert est.k_max <= TWO_PI
