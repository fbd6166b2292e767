"""Energy functionals, canonical relations, residuals, axial recovery."""

import numpy as np
import pytest

from cdbeam import linalg
from cdbeam.energy import (
    canonical_stress,
    gap_and_residuals,
    primal_gradient,
    primal_hessian,
    pure_complementary,
    recover_axial,
    reformulated_complementary,
    stationary_stress,
    total_complementary,
    total_potential,
)
from cdbeam.fem import assemble, shape_functions
from cdbeam.model import LoadCase, Mesh, SupportSpec

from conftest import make_system


class TestCanonicalStress:
    def test_zero_strain(self, props):
        assert canonical_stress(0.0, props, 0.01) == pytest.approx(-10.0)

    def test_stress_free_strain(self, props):
        eps0 = 3 * 0.01 / (2 * props.alpha)
        assert canonical_stress(eps0, props, 0.01) == pytest.approx(0.0, abs=1e-12)

    def test_reference_point(self, props):
        assert canonical_stress(0.01, props, 0.01) == pytest.approx(-9.09)


class TestStationaryStress:
    def test_zero_deflection_gives_uniform_compression(self, props):
        sys = make_system(props, m=6, lam=0.01)
        sig = stationary_stress(np.zeros(sys.n_red), sys)
        np.testing.assert_allclose(sig, -props.E * 0.01, rtol=1e-12)

    def test_zero_deflection_zero_load(self, props):
        sys = make_system(props, m=4, lam=0.0)
        sig = stationary_stress(np.zeros(sys.n_red), sys)
        np.testing.assert_allclose(sig, 0.0, atol=1e-15)

    def test_defining_property(self, props):
        rng = np.random.default_rng(30)
        sys = make_system(props, m=5)
        for _ in range(5):
            w = rng.normal(size=sys.n_red) * 0.2
            sig = stationary_stress(w, sys)
            res = np.linalg.norm(sys.strain_b(w) - sys.K @ sig - sys.lam_vec)
            assert res <= 1e-12


class TestTotalPotential:
    def test_zero_everything(self, props):
        sys = make_system(props, m=4, lam=0.0)
        assert total_potential(np.zeros(sys.n_red), sys) == pytest.approx(0.0, abs=1e-14)

    def test_zero_deflection_closed_form(self, props):
        sys = make_system(props, m=2, lam=0.01)
        val = total_potential(np.zeros(sys.n_red), sys)
        lamv = sys.lam_vec
        ref = 0.5 * lamv @ linalg.solve_sym(sys.K, lamv) - sys.c
        assert val == pytest.approx(ref, abs=1e-12)
        # for the uniform mesh the closed form collapses to zero exactly
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_max_property(self, props):
        rng = np.random.default_rng(31)
        sys = make_system(props, m=5)
        w = rng.normal(size=sys.n_red) * 0.1
        best = total_potential(w, sys)
        for _ in range(100):
            sig = rng.normal(size=6) * 10
            assert best >= total_complementary(w, sig, sys) - 1e-12


class TestTotalComplementary:
    def test_zero_pair(self, props):
        sys = make_system(props, m=4)
        assert total_complementary(
            np.zeros(sys.n_red), np.zeros(5), sys
        ) == pytest.approx(-sys.c)

    def test_stationary_stress_attains_potential(self, props):
        rng = np.random.default_rng(32)
        sys = make_system(props, m=6)
        w = rng.normal(size=sys.n_red) * 0.15
        sig = stationary_stress(w, sys)
        assert total_complementary(w, sig, sys) == pytest.approx(total_potential(w, sys), rel=1e-13)

    def test_continuum_quadrature_oracle(self, props):
        """Term-by-term Gauss quadrature of the continuum functional at m=3."""
        rng = np.random.default_rng(33)
        m = 3
        sys = make_system(props, m=m, lam=0.007, f=0.23)
        w = rng.normal(size=sys.n_red) * 0.1
        sig = rng.normal(size=m + 1) * 3
        wf = sys.inject(w)
        lam, E, alpha, EI = 0.007, props.E, props.alpha, props.EI
        xs, ws = np.polynomial.legendre.leggauss(6)
        Le = sys.mesh.Le
        total = 0.0
        for e in range(m):
            we = wf[2 * e : 2 * e + 4]
            se = sig[e : e + 2]
            for x, wt in zip(xs, ws):
                Nw, d1, d2, Ns = shape_functions(x, Le)
                wpp = d2 @ we
                wp = d1 @ we
                wv = Nw @ we
                sv = Ns @ se
                integrand = (
                    0.5 * EI * wpp**2
                    + 0.5 * sv * wp**2
                    - 3.0 / (4 * E * alpha) * (sv + E * lam) ** 2
                    - 0.23 * wv
                )
                total += wt * integrand * Le / 2
        got = total_complementary(w, sig, sys)
        assert got == pytest.approx(total, rel=1e-10)


class TestPureComplementary:
    def test_no_lateral_load(self, props):
        sys = make_system(props, m=4, f=0.0, lam=0.003)
        sig = np.full(5, 1.7)
        ref = -0.5 * sig @ sys.K @ sig - sys.lam_vec @ sig - sys.c
        assert pure_complementary(sig, sys) == pytest.approx(ref, rel=1e-12)

    def test_equals_xi_at_equilibrium_deflection(self, props):
        rng = np.random.default_rng(34)
        m = 3
        sys = make_system(props, m=m)
        sig = np.abs(rng.normal(size=m + 1))  # positive stress keeps G PSD
        G = sys.gap_matrix(sig)
        w = linalg.solve_sym(G, sys.f_vec)
        assert pure_complementary(sig, sys) == pytest.approx(
            total_complementary(w, sig, sys), rel=1e-10
        )

    def test_singular_gap_matrix_raises(self, props):
        # a free-free beam has rigid modes: G(0) = G0 is exactly singular
        sys = assemble(props, LoadCase.uniform(0.1, 0.0), SupportSpec.custom(()), Mesh(4, 1.0))
        with pytest.raises(linalg.SingularMatrixError):
            pure_complementary(np.zeros(5), sys)


class TestReformulatedComplementary:
    def test_zero_deflection(self, props):
        sys = make_system(props, m=4, lam=0.004)
        sig = np.full(5, 0.9)
        G = sys.gap_matrix(sig)
        ref = (
            -0.5 * sys.f_vec @ linalg.solve_sym(G, sys.f_vec)
            - 0.5 * sys.lam_vec @ sig
            - sys.c
        )
        got = reformulated_complementary(sig, np.zeros(sys.n_red), sys)
        assert got == pytest.approx(ref, rel=1e-12)

    def test_zero_stress_drops_geometric_term(self, props):
        rng = np.random.default_rng(35)
        sys = make_system(props, m=4, lam=0.002)
        w = rng.normal(size=sys.n_red)
        sig = np.zeros(5)
        ref = (
            -0.5 * sys.f_vec @ linalg.solve_sym(sys.G0, sys.f_vec)
            - 0.5 * sys.lam_vec @ sig
            - sys.c
        )
        assert reformulated_complementary(sig, w, sys) == pytest.approx(ref, rel=1e-12)


class TestGapAndResiduals:
    def test_zero_deflection(self, props):
        sys = make_system(props, m=5)
        rep = gap_and_residuals(np.zeros(sys.n_red), stationary_stress(np.zeros(sys.n_red), sys), sys)
        assert rep.gap_quadratic == 0.0
        assert rep.res_equilibrium == pytest.approx(np.linalg.norm(sys.f_vec))

    def test_positive_gap_for_psd_stress(self, props):
        rng = np.random.default_rng(36)
        sys = make_system(props, m=5)
        sig = np.abs(rng.normal(size=6)) + 0.1
        w = rng.normal(size=sys.n_red)
        rep = gap_and_residuals(w, sig, sys)
        assert rep.gap_quadratic > 0

    def test_pi_d_flag_for_singular_gap(self, props):
        sys = assemble(props, LoadCase.uniform(0.1, 0.0), SupportSpec.custom(()), Mesh(4, 1.0))
        rep = gap_and_residuals(np.zeros(sys.n_red), np.zeros(5), sys)
        assert not rep.pi_d_defined
        assert np.isnan(rep.pi_d)


class TestDerivatives:
    def test_gradient_at_zero(self, props):
        sys = make_system(props, m=5)
        np.testing.assert_allclose(primal_gradient(np.zeros(sys.n_red), sys), -sys.f_vec)

    def test_gradient_vs_finite_differences(self, props):
        rng = np.random.default_rng(37)
        sys = make_system(props, m=6)
        for _ in range(5):
            w = rng.normal(size=sys.n_red) * 0.1
            g = primal_gradient(w, sys)
            h = 1e-6 * (1 + np.linalg.norm(w))
            gfd = np.zeros_like(g)
            for i in range(len(w)):
                e = np.zeros_like(w)
                e[i] = h
                gfd[i] = (total_potential(w + e, sys) - total_potential(w - e, sys)) / (2 * h)
            assert np.linalg.norm(g - gfd) <= 1e-6 * (1 + np.linalg.norm(gfd))

    def test_hessian_vs_finite_differences(self, props):
        rng = np.random.default_rng(38)
        sys = make_system(props, m=5)
        w = rng.normal(size=sys.n_red) * 0.1
        H = primal_hessian(w, sys)
        h = 1e-6 * (1 + np.linalg.norm(w))
        Hfd = np.zeros_like(H)
        for i in range(len(w)):
            e = np.zeros_like(w)
            e[i] = h
            Hfd[:, i] = (primal_gradient(w + e, sys) - primal_gradient(w - e, sys)) / (2 * h)
        assert np.linalg.norm(H - Hfd) <= 1e-5 * (1 + np.linalg.norm(Hfd))


class TestRecoverAxial:
    def test_zero_deflection(self, props):
        lam = 0.01
        sys = make_system(props, m=5, lam=lam)
        u = recover_axial(np.zeros(sys.n_red), sys)
        uL = -lam * props.L / (2 * props.h * (1 + props.mu))
        assert u[0] == 0.0
        assert u[-1] == pytest.approx(uL, rel=1e-12)

    def test_zero_deflection_zero_load(self, props):
        sys = make_system(props, m=5, lam=0.0)
        np.testing.assert_allclose(recover_axial(np.zeros(sys.n_red), sys), 0.0, atol=1e-15)

    def test_single_element_cubic_oracle(self, props):
        """One element carrying the cubic w(x) = x^2 (1 - x): integrate u' exactly."""
        lam = 0.006
        sys = assemble(
            props,
            LoadCase.uniform(0.0, lam),
            SupportSpec.custom(()),
            Mesh(2, 1.0),
        )
        # nodal values of w(x) = x^2 (1-x) and slopes w'(x) = 2x - 3x^2 at x=0,.5,1
        wfull = np.zeros(sys.n_full)
        for j, x in enumerate([0.0, 0.5, 1.0]):
            wfull[2 * j] = x**2 * (1 - x)
            wfull[2 * j + 1] = 2 * x - 3 * x**2
        w = sys.extract(wfull)
        u = recover_axial(w, sys)
        # oracle: dense-sampled trapezoid of the exact integrand
        xs = np.linspace(0.0, 1.0, 20001)
        wp = 2 * xs - 3 * xs**2
        integrand = 0.5 * (1 + props.mu) * wp**2 + lam / (2 * props.h * (1 + props.mu))
        uL = -np.trapezoid(integrand, xs)
        assert u[-1] == pytest.approx(uL, rel=1e-8)
