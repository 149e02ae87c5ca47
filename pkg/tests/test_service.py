import warnings

import numpy as np
import pytest

from rcgeo import scenarios, verify

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from rcgeo.service import app

client = TestClient(app, raise_server_exceptions=False)


def detail(resp) -> dict:
    return resp.json()["detail"]


class TestScenarios:
    def test_listing(self):
        resp = client.get("/scenarios")
        assert resp.status_code == 200
        listing = resp.json()["scenarios"]
        assert {d["name"] for d in listing} >= {"plane", "sphere", "so3-sigma"}
        for d in listing:
            assert set(d) == {"name", "summary", "defaults"}


class TestEval:
    def test_sphere_closed_form(self):
        resp = client.post(
            "/eval",
            json={"scenario": "sphere", "at": {"u": 1.1, "v": 0.7}},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["scene"] == "sphere"
        assert body["at"] == {"u": 1.1, "v": 0.7}
        assert body["jet_order"] == 3
        q = body["quantities"]
        assert q["H"][0] == pytest.approx(-2.0, abs=1e-12)
        assert q["Ke"][0] == pytest.approx(1.0, abs=1e-12)
        assert np.asarray(q["metric"]).shape == (3, 3)
        # polar chart: hopf needs an isothermal chart, silently dropped
        assert "hopf" not in q
        assert "laplacian_gauss_induced" in q

    def test_quantity_subset(self):
        resp = client.post(
            "/eval",
            json={
                "scenario": "sphere",
                "at": {"u": 1.0, "v": 1.0},
                "quantities": ["H", "gauss"],
            },
        )
        assert resp.status_code == 200
        assert set(resp.json()["quantities"]) == {"H", "gauss"}

    def test_scenario_params(self):
        resp = client.post(
            "/eval",
            json={
                "scenario": "sphere",
                "params": {"r": 2.0},
                "at": {"u": 1.0, "v": 1.0},
                "quantities": ["H"],
            },
        )
        assert resp.json()["quantities"]["H"][0] == pytest.approx(-1.0, abs=1e-12)

    def test_scene_text_flow(self):
        text = scenarios.euclidean_scene_text(
            ("u", "v", "0"), ((-1.0, 1.0, 3), (-1.0, 1.0, 3))
        )
        resp = client.post(
            "/eval",
            json={"scene_text": text, "at": {"u": 0.2, "v": 0.1}, "quantities": ["H"]},
        )
        assert resp.status_code == 200
        assert resp.json()["quantities"]["H"][0] == pytest.approx(0.0, abs=1e-14)

    def test_unknown_quantity(self):
        resp = client.post(
            "/eval",
            json={
                "scenario": "sphere",
                "at": {"u": 1.0, "v": 1.0},
                "quantities": ["curvture"],
            },
        )
        assert resp.status_code == 400
        assert "unknown quantity" in detail(resp)["message"]

    def test_outside_domain(self):
        resp = client.post(
            "/eval", json={"scenario": "sphere", "at": {"u": 99.0, "v": 1.0}}
        )
        assert resp.status_code == 400
        assert (
            detail(resp)["message"]
            == "point outside domain: u = 99.0 not in [0.3, 2.8]"
        )

    def test_wrong_parameter_names(self):
        resp = client.post(
            "/eval", json={"scenario": "sphere", "at": {"u": 1.0, "w": 1.0}}
        )
        assert resp.status_code == 400
        assert "must bind exactly" in detail(resp)["message"]

    def test_parse_error_carries_position(self):
        resp = client.post(
            "/eval",
            json={"scene_text": "[ambient]\ndim = ((", "at": {"u": 0.0}},
        )
        assert resp.status_code == 400
        d = detail(resp)
        assert "position" in d or "line" in d

    def test_scene_and_scenario_exclusive(self):
        for extra in ({}, {"scenario": "sphere", "scene_text": "x"}):
            resp = client.post("/eval", json={"at": {"u": 1.0, "v": 1.0}, **extra})
            assert resp.status_code == 400
            assert "exactly one" in detail(resp)["message"]

    def test_unknown_scenario(self):
        resp = client.post(
            "/eval", json={"scenario": "torus", "at": {"u": 1.0, "v": 1.0}}
        )
        assert resp.status_code == 400
        assert "unknown scenario" in detail(resp)["message"]

    def test_order_guard(self):
        resp = client.post(
            "/eval", json={"scenario": "sphere", "at": {"u": 1.0, "v": 1.0}, "order": 9}
        )
        assert resp.status_code == 400
        assert "jet order" in detail(resp)["message"]

    def test_low_order_drops_laplacians(self):
        base = {"scenario": "sphere", "at": {"u": 1.0, "v": 1.0}, "order": 2}
        resp = client.post("/eval", json=base)
        assert resp.status_code == 200
        assert "laplacian_gauss_induced" not in resp.json()["quantities"]
        resp = client.post(
            "/eval", json={**base, "quantities": ["laplacian_gauss_induced"]}
        )
        assert resp.status_code == 400
        assert "jet order" in detail(resp)["message"]

    def test_explicit_hopf_on_polar_chart(self):
        resp = client.post(
            "/eval",
            json={
                "scenario": "sphere",
                "at": {"u": 1.0, "v": 1.0},
                "quantities": ["hopf"],
            },
        )
        assert resp.status_code == 400
        assert "isothermal" in detail(resp)["message"]

    def test_hopf_on_isothermal_chart(self):
        resp = client.post(
            "/eval",
            json={
                "scenario": "sphere-stereo",
                "at": {"u": 0.2, "v": -0.3},
                "quantities": ["hopf", "star_tau", "J"],
            },
        )
        assert resp.status_code == 200
        q = resp.json()["quantities"]
        assert abs(q["hopf"][0]) < 1e-12 and abs(q["hopf"][1]) < 1e-12
        assert np.asarray(q["J"]).shape == (2, 2)


class TestVerify:
    def test_plane_report(self):
        resp = client.post("/verify", json={"scenario": "plane", "grid": 3, "seed": 1})
        assert resp.status_code == 200
        report = resp.json()
        assert report["scene"] == "plane"
        assert report["laplacian_sign"] == "+trace"
        assert not verify.suite_failed(report)

    def test_perturbation_fails_suite(self):
        resp = client.post(
            "/verify",
            json={
                "scenario": "rotating-frame",
                "grid": 3,
                "seed": 1,
                "perturb_ii": 1e-3,
            },
        )
        assert resp.status_code == 200
        report = resp.json()
        assert report["perturb_ii"] == 1e-3
        assert verify.suite_failed(report)

    def test_check_selection(self):
        resp = client.post(
            "/verify",
            json={"scenario": "sphere", "grid": 2, "checks": ["codazzi"]},
        )
        assert resp.status_code == 200
        assert [r["name"] for r in resp.json()["checks"]] == ["codazzi"]

    def test_unknown_check(self):
        resp = client.post(
            "/verify", json={"scenario": "sphere", "checks": ["codazi"]}
        )
        assert resp.status_code == 400
        assert "unknown check" in detail(resp)["message"]

    def test_grid_and_points_exclusive(self):
        resp = client.post(
            "/verify",
            json={"scenario": "sphere", "grid": 3, "points": [[1.0, 1.0]]},
        )
        assert resp.status_code == 400
        assert "at most one" in detail(resp)["message"]

    def test_points_path(self):
        resp = client.post(
            "/verify",
            json={
                "scenario": "sphere",
                "points": [[1.0, 1.0], [1.5, 2.0]],
                "checks": ["codazzi"],
            },
        )
        assert resp.status_code == 200
        assert resp.json()["checks"][0]["points"] == 2

    def test_bad_tol(self):
        resp = client.post("/verify", json={"scenario": "sphere", "tol": -1.0})
        assert resp.status_code == 400
        assert "tolerance" in detail(resp)["message"]
