import math

import numpy as np
import pytest

from rcgeo import dsl, jets, scenarios, surface, verify

from conftest import make_surface, rows_by_name


class TestSphereClosedForms:
    # polar chart of the radius-r sphere, outward normal

    def test_mean_and_extrinsic_curvature(self):
        for r in (1.0, 2.5):
            t = scenarios.build("sphere", {"r": r})
            s = make_surface(t, [1.1, 0.7])
            assert s.H0 == pytest.approx(-2.0 / r, abs=1e-12)
            assert s.Ke0 == pytest.approx(1.0 / (r * r), abs=1e-12)

    def test_umbilic(self, sphere_target):
        for u in ([0.5, 0.4], [1.4, 2.2], [2.4, 5.0]):
            s = make_surface(sphere_target, u)
            assert np.max(np.abs(s.W0 - 0.5 * s.H0 * np.eye(2))) < 1e-12

    def test_normal_is_radial_and_gauss_map_matches(self, sphere_target):
        s = make_surface(sphere_target, [0.9, 1.3])
        r = np.linalg.norm(s.psi0)
        assert np.max(np.abs(s.N0 - s.psi0 / r)) < 1e-12
        # identity ambient frame: frame coefficients equal chart components
        assert np.max(np.abs(s.ghat0 - s.N0)) < 1e-12

    def test_weingarten_against_normal_finite_differences(self, sphere_target):
        u = np.array([1.0, 0.8])
        s = make_surface(sphere_target, u)
        h = 1e-5
        for a in range(2):
            up, um = u.copy(), u.copy()
            up[a] += h
            um[a] -= h
            dN = (
                make_surface(sphere_target, up, order=2).N0
                - make_surface(sphere_target, um, order=2).N0
            ) / (2.0 * h)
            want = -s.t0 @ s.W0[:, a]
            assert np.max(np.abs(dN - want)) < 1e-8

    def test_induced_connection_torsion_free_in_euclidean_chart(self, sphere_target):
        s = make_surface(sphere_target, [1.2, 0.5])
        assert np.max(np.abs(s.torsion_m0)) < 1e-13
        assert np.max(np.abs(s.gamma_m0 - s.gamma_m_lc0)) < 1e-13
        assert np.max(np.abs(s.II0 - s.II_lc)) < 1e-13


class TestRotatingPlaneClosedForms:
    def closed_forms(self, target, u):
        s = make_surface(target, u)
        expr = dsl.parse_expr(target.expectations["rotating_plane_formulas"]["theta"])
        e = np.asarray(target.expectations["rotating_plane_formulas"]["e"], float)
        bindings = {name: s.psi[i] for i, name in enumerate(("x", "y", "z"))}
        g = jets.gradient(dsl.eval_expr(expr, bindings))
        return s, float(g[0]), float(g[1]), e

    def test_ii_h_star_tau(self, rotating_target):
        for u in ([0.3, -0.2], [0.7, 0.5], [-0.6, 0.1]):
            s, th1, th2, e = self.closed_forms(rotating_target, u)
            II = np.array([[th1 * e[1], -th1 * e[0]], [th2 * e[1], -th2 * e[0]]])
            assert np.max(np.abs(s.II0 - II)) < 1e-12
            assert s.H0 == pytest.approx(th1 * e[1] - th2 * e[0], abs=1e-12)
            assert s.star_tau0 == pytest.approx(-th1 * e[0] - th2 * e[1], abs=1e-12)
            assert np.max(np.abs(s.h0 - np.eye(2))) < 1e-13

    def test_induced_torsion(self, rotating_target):
        s, th1, th2, e = self.closed_forms(rotating_target, [0.4, -0.3])
        want = e[2] * np.array([th1, th2])
        assert np.max(np.abs(s.torsion_m0[:, 0, 1] - want)) < 1e-12
        assert np.max(np.abs(s.torsion_m0[:, 1, 0] + want)) < 1e-12

    def test_axis_in_plane_kills_induced_torsion(self):
        t = scenarios.build("rotating-frame", {"e1": 1.0, "e2": 0.0, "e3": 0.0})
        s = make_surface(t, [0.4, -0.3])
        assert np.max(np.abs(s.torsion_m0)) < 1e-13
        assert np.max(np.abs(s.gamma_m0 - s.gamma_m_lc0)) < 1e-13


class TestSO3Sigma:
    @pytest.mark.parametrize("theta", [math.pi / 3, math.pi / 2, 2 * math.pi / 3])
    def test_mean_curvature(self, theta):
        t = scenarios.build("so3-sigma", {"theta": theta})
        for u in ([0.8, 0.9], [1.7, 3.1], [2.3, 5.5]):
            s = make_surface(t, u)
            assert s.H0 == pytest.approx(-1.0 / math.tan(theta / 2.0), abs=1e-9)

    def test_star_tau_and_weingarten_split(self, so3_target):
        for u in ([0.9, 1.3], [1.8, 4.2]):
            s = make_surface(so3_target, u)
            assert s.star_tau0 == pytest.approx(-1.0, abs=1e-12)
            Wt = s.hinv0 @ s.W0.T @ s.h0
            Ws = 0.5 * (s.W0 + Wt)
            Wa = 0.5 * (s.W0 - Wt)
            assert np.max(np.abs(Ws - 0.5 * s.H0 * np.eye(2))) < 1e-12
            assert np.max(np.abs(2.0 * Wa - s.star_tau0 * s.J0)) < 1e-12
            # frame-connection W differs from the metric one by the skew part
            assert np.max(np.abs(Ws - s.W_lc0)) < 1e-12

    def test_round_metric_scaled(self, so3_target):
        # |psi| = theta is constant, so the chart sphere has radius theta
        s = make_surface(so3_target, [1.1, 2.0])
        assert np.linalg.norm(s.psi0) == pytest.approx(
            so3_target.params["theta"], abs=1e-12
        )


class TestChartStructures:
    def test_onb_and_complex_structure(self, rotating_graph_target, so3_target):
        for target, u in ((rotating_graph_target, [0.4, 0.7]), (so3_target, [1.2, 2.5])):
            s = make_surface(target, u)
            onb = s.onb0  # row i = parameter components of the i-th vector
            gram = np.array(
                [[onb[i] @ s.h0 @ onb[j] for j in range(2)] for i in range(2)]
            )
            assert np.max(np.abs(gram - np.eye(2))) < 1e-12
            J = s.J0
            assert np.max(np.abs(J @ J + np.eye(2))) < 1e-12
            assert np.max(np.abs(J.T @ s.h0 @ J - s.h0)) < 1e-12

    def test_tangent_decompose_round_trip(self, sphere_target):
        s = make_surface(sphere_target, [1.3, 0.9])
        rng = np.random.default_rng(7)
        for _ in range(5):
            v = rng.normal(size=3)
            a, mu = surface.tangent_decompose(s, v)
            back = s.t0 @ a + mu * s.N0
            assert np.max(np.abs(back - v)) < 1e-12

    def test_weingarten_layout(self, rotating_graph_target):
        s = make_surface(rotating_graph_target, [0.5, -0.2])
        assert np.max(np.abs(s.W0 - s.hinv0 @ s.II0.T)) < 1e-13
        assert s.H0 == pytest.approx(np.trace(s.W0), abs=1e-13)
        assert s.Ke0 == pytest.approx(np.linalg.det(s.W0), abs=1e-13)


class TestIsothermalHopf:
    def test_stereo_isothermal_umbilic_hopf_zero(self):
        t = scenarios.build("sphere-stereo")
        s = make_surface(t, [0.3, -0.4])
        assert surface.isothermal_defect(s) < 1e-13
        re, im = surface.hopf_coefficient(s)
        assert abs(jets.value_of(re)) < 1e-12
        assert abs(jets.value_of(im)) < 1e-12
        assert surface.hopf_antiholomorphic_derivative(s) < 1e-10

    def test_enneper_hopf_constant(self):
        t = scenarios.build("enneper")
        for u in ([0.2, 0.1], [-0.3, 0.25]):
            s = make_surface(t, u)
            assert abs(s.H0) < 1e-12  # minimal
            assert surface.hopf_antiholomorphic_derivative(s) < 1e-9

    def test_polar_chart_is_not_isothermal(self, sphere_target):
        s = make_surface(sphere_target, [0.9, 1.1])
        assert surface.isothermal_defect(s) > 1e-2
        with pytest.raises(surface.NonIsothermalError):
            surface.hopf_coefficient(s)

    def test_cone_hopf_nonvacuous(self, cone_target):
        s = make_surface(cone_target, [0.7, 0.1])
        assert surface.isothermal_defect(s) < 1e-12
        re, im = surface.hopf_coefficient(s)
        assert abs(jets.value_of(re)) > 1e-3  # genuinely nonzero coefficient
        assert np.max(np.abs(jets.gradient(re))) > 1e-3  # and nonconstant
        # H is nonconstant on the cone, so the coefficient is not holomorphic
        assert surface.hopf_antiholomorphic_derivative(s) > 1e-3
        report = verify.run_suite(cone_target, grid=4)
        rows = rows_by_name(report)
        assert rows["hopf_symmetric_part"]["status"] == "pass"
        assert rows["cauchy_riemann_equiv"]["status"] == "pass"
        assert not verify.suite_failed(report)


class TestPerturbation:
    def test_with_perturbed_ii(self, rotating_graph_target):
        s = make_surface(rotating_graph_target, [0.5, 0.3])
        q = surface.with_perturbed_ii(s, pair=(0, 1), eps=1e-3)
        assert q.II0[0, 1] - s.II0[0, 1] == pytest.approx(1e-3, abs=1e-15)
        assert np.max(np.abs(q.h0 - s.h0)) == 0.0
        assert np.max(np.abs(q.ghat0 - s.ghat0)) == 0.0
        assert np.max(np.abs(q.W0 - q.hinv0 @ q.II0.T)) < 1e-13
        assert q.H0 != s.H0 or abs(q.star_tau0 - s.star_tau0) > 1e-5


class TestErrors:
    def test_rank_deficient_map(self):
        text = scenarios.euclidean_scene_text(("u", "u", "0"), ((0.0, 1.0, 3), (0.0, 1.0, 3)))
        scene = dsl.parse_scene(text)
        with pytest.raises(surface.RankDeficientError):
            surface.surface_eval(scene, np.array([0.5, 0.5]), 2)

    def test_order_guard(self, sphere_target):
        with pytest.raises(surface.SurfaceError):
            make_surface(sphere_target, [1.0, 1.0], order=1)
