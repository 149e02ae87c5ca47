import math

import numpy as np
import pytest

from rcgeo import ambient, dsl, jets, scenarios

IDENTITY_SCENE = """[ambient]
dim = 3
coords = x, y, z
frame = "1", "0", "0"; "0", "1", "0"; "0", "0", "1"

[surface]
params = u, v
map = "u", "v", "0"
orient = 1

[domain]
u = -1, 1, 3
v = -1, 1, 3
"""


def rotating_scene(theta="sin(x)*cos(y) + z/2", e=(1.0, 2.0, 2.0)):
    e = np.asarray(e, dtype=float)
    text = scenarios.rotating_frame_scene_text(theta=theta, e=e / np.linalg.norm(e))
    return dsl.parse_scene(text)


class TestIdentityFrame:
    def test_everything_flat(self):
        scene = dsl.parse_scene(IDENTITY_SCENE)
        amb = ambient.ambient_eval(scene, np.array([0.2, -0.4, 0.9]), 3)
        assert np.allclose(amb.G0, np.eye(3))
        assert np.max(np.abs(amb.gamma0)) == 0.0
        assert np.max(np.abs(amb.torsion0)) == 0.0
        assert np.max(np.abs(amb.curv)) == 0.0
        assert np.max(np.abs(amb.ricci)) == 0.0
        assert amb.orient_sign == 1.0


class TestRotatingFrame:
    def test_closed_form_torsion_axis_aligned(self):
        # theta = z about e = (0,0,1): Gamma^c_ab = -theta_a hat(e)^c_b
        scene = rotating_scene(theta="z", e=(0.0, 0.0, 1.0))
        amb = ambient.ambient_eval(scene, np.array([0.3, 0.1, -0.2]), 3)
        hat_e = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        for c in range(3):
            for a in range(3):
                for b in range(3):
                    want = -(1.0 if a == 2 else 0.0) * hat_e[c, b]
                    assert amb.gamma0[c, a, b] == pytest.approx(want, abs=1e-12)
        # T(d2, d3) = -d1
        assert amb.torsion0[0, 1, 2] == pytest.approx(-1.0, abs=1e-12)
        assert amb.torsion0[1, 1, 2] == pytest.approx(0.0, abs=1e-12)
        assert amb.torsion0[2, 1, 2] == pytest.approx(0.0, abs=1e-12)

    def test_connection_against_finite_differences(self):
        scene = rotating_scene()
        x = np.array([0.25, -0.3, 0.4])
        amb = ambient.ambient_eval(scene, x, 3)
        h = 1e-5

        def eps_at(p):
            return ambient.ambient_eval(scene, p, 2).eps0

        for a in range(3):
            xp, xm = x.copy(), x.copy()
            xp[a] += h
            xm[a] -= h
            d_eps = (eps_at(xp) - eps_at(xm)) / (2.0 * h)
            gamma_fd = amb.F0 @ d_eps
            assert np.max(np.abs(gamma_fd - amb.gamma0[:, a, :])) < 1e-8

    def test_flat_and_metric_compatible(self):
        scene = rotating_scene()
        for x in ([0.1, 0.2, 0.3], [-0.4, 0.5, -0.1], [0.0, 0.0, 0.0]):
            amb = ambient.ambient_eval(scene, np.array(x), 3)
            assert np.max(np.abs(amb.curv)) < 1e-12
            assert ambient.frame_orthonormality_defect(amb) < 1e-12
            assert ambient.metric_compatibility_defect(amb) < 1e-12
            assert ambient.contorsion_identity_defect(amb) < 1e-12
            assert ambient.curvature_contorsion_defect(amb) < 1e-12

    def test_constant_theta_is_torsion_free(self):
        scene = rotating_scene(theta="1.1")
        amb = ambient.ambient_eval(scene, np.array([0.3, -0.2, 0.5]), 2)
        assert np.max(np.abs(amb.torsion0)) < 1e-14
        assert np.max(np.abs(amb.gamma0)) < 1e-14

    def test_generic_torsion_not_totally_skew(self):
        scene = rotating_scene()
        amb = ambient.ambient_eval(scene, np.array([0.25, -0.3, 0.4]), 2)
        is_skew, defect, scale = ambient.detect_totally_skew(amb)
        assert not is_skew
        assert defect > 1e-3 * max(1.0, scale)


class TestSO3Chart:
    def test_orthonormal_flat_skew(self):
        bundle = scenarios.SO3Bundle(math.pi / 2)
        for x in ([0.3, 0.2, 0.4], [-0.5, 0.1, 0.6], [0.05, -0.02, 0.01]):
            amb = ambient.ambient_eval(bundle, np.array(x), 3)
            assert ambient.frame_orthonormality_defect(amb) < 1e-12
            assert np.max(np.abs(amb.curv)) < 1e-11
            is_skew, defect, scale = ambient.detect_totally_skew(amb)
            assert is_skew, (defect, scale)

    def test_torsion_scale_is_minus_one(self):
        bundle = scenarios.SO3Bundle(math.pi / 2)
        for x in ([0.3, 0.2, 0.4], [-0.5, 0.1, 0.6]):
            amb = ambient.ambient_eval(bundle, np.array(x), 3)
            f, residual = ambient.skew_torsion_scale(amb)
            assert f == pytest.approx(-1.0, abs=1e-12)
            assert residual < 1e-12
            fj = ambient.skew_torsion_scale_jet(amb)
            assert np.max(np.abs(jets.gradient(fj))) < 1e-10

    def test_nabla_torsion_against_finite_differences(self):
        bundle = scenarios.SO3Bundle(math.pi / 2)
        x = np.array([0.25, -0.15, 0.35])
        amb = ambient.ambient_eval(bundle, x, 3)
        h = 1e-5

        def torsion_at(p):
            return ambient.ambient_eval(bundle, p, 2).torsion0

        g0 = amb.gamma0
        T0 = amb.torsion0
        for a in range(3):
            xp, xm = x.copy(), x.copy()
            xp[a] += h
            xm[a] -= h
            dT = (torsion_at(xp) - torsion_at(xm)) / (2.0 * h)
            want = dT.copy()
            for c in range(3):
                for d in range(3):
                    for e in range(3):
                        want[c, d, e] += sum(g0[c, a, f] * T0[f, d, e] for f in range(3))
                        want[c, d, e] -= sum(g0[f, a, d] * T0[c, f, e] for f in range(3))
                        want[c, d, e] -= sum(g0[f, a, e] * T0[c, d, f] for f in range(3))
            assert np.max(np.abs(want - amb.nabla_torsion[a])) < 1e-8

    def test_ricci_lc_is_half_metric(self):
        bundle = scenarios.SO3Bundle(math.pi / 2)
        amb = ambient.ambient_eval(bundle, np.array([0.3, 0.2, 0.4]), 3)
        assert np.max(np.abs(amb.ricci_lc - 0.5 * amb.G0)) < 1e-11

    def test_chart_limit_guard(self):
        bundle = scenarios.SO3Bundle(math.pi / 2)
        with pytest.raises(scenarios.ScenarioError):
            ambient.ambient_eval(bundle, np.array([3.0, 1.0, 0.5]), 2)


class TestErrors:
    def test_order_guard(self):
        scene = dsl.parse_scene(IDENTITY_SCENE)
        with pytest.raises(ambient.InsufficientOrderError):
            ambient.ambient_eval(scene, np.zeros(3), 1)

    def test_singular_frame(self):
        text = IDENTITY_SCENE.replace(
            'frame = "1", "0", "0"; "0", "1", "0"; "0", "0", "1"',
            'frame = "1", "0", "0"; "0", "1", "0"; "0", "0", "x"',
        )
        scene = dsl.parse_scene(text)
        with pytest.raises(ambient.SingularFrameError):
            ambient.ambient_eval(scene, np.array([0.0, 0.5, 0.5]), 2)
        amb = ambient.ambient_eval(scene, np.array([2.0, 0.5, 0.5]), 2)
        assert amb.G0[2, 2] == pytest.approx(0.25)
