import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from rcgeo import cli

from conftest import make_surface


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestScenariosCommand:
    def test_list(self, capsys):
        code, out, err = run(capsys, ["scenarios", "list"])
        assert code == 0
        assert err == ""
        for name in ("plane", "sphere", "so3-sigma", "rotating-frame"):
            assert name in out
        assert "defaults:" in out

    def test_run_needs_name(self, capsys):
        code, out, err = run(capsys, ["scenarios", "run"])
        assert code == 2
        assert "needs a scenario name" in err

    def test_run_so3_at_pi_third(self, capsys):
        theta = math.pi / 3
        code, out, err = run(
            capsys,
            [
                "scenarios",
                "run",
                "so3-sigma",
                "--param",
                f"theta={theta}",
                "--grid",
                "3",
                "--tol",
                "1e-6",
                "--seed",
                "0",
            ],
        )
        assert code == 0, err
        assert "0 failed (scene so3-sigma, order 3)" in out


class TestEvalCommand:
    def test_scene_file_closed_forms(self, capsys, tmp_path, rotating_target):
        scene = tmp_path / "rot.scene"
        scene.write_text(rotating_target.scene_text)
        code, out, err = run(
            capsys,
            [
                "eval",
                "--scene",
                str(scene),
                "--at",
                "u=0.3,v=-0.2",
                "--quantities",
                "H,star_tau,II",
                "--format",
                "json",
            ],
        )
        assert code == 0, err
        got = json.loads(out)
        s = make_surface(rotating_target, [0.3, -0.2])
        assert got["H"][0] == pytest.approx(s.H0, abs=1e-12)
        assert got["star_tau"][0] == pytest.approx(s.star_tau0, abs=1e-12)
        assert np.max(np.abs(np.asarray(got["II"]) - s.II0)) < 1e-12

    def test_plane_mean_curvature_text(self, capsys):
        code, out, err = run(
            capsys,
            ["eval", "--scenario", "plane", "--at", "u=0.2,v=0.1", "--quantities", "H"],
        )
        assert code == 0
        assert "point: u = 0.2, v = 0.1" in out
        assert "H = 0" in out

    def test_text_format_full(self, capsys):
        code, out, err = run(
            capsys, ["eval", "--scenario", "sphere", "--at", "u=1.0,v=1.0"]
        )
        assert code == 0
        assert "H = -2" in out
        assert "metric = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]" in out

    def test_outside_domain_exit_2(self, capsys):
        code, out, err = run(
            capsys, ["eval", "--scenario", "sphere", "--at", "u=99,v=1"]
        )
        assert code == 2
        assert "point outside domain: u = 99.0 not in [0.3, 2.8]" in err

    def test_parse_error_has_position(self, capsys, tmp_path, rotating_target):
        scene = tmp_path / "bad.scene"
        scene.write_text(rotating_target.scene_text.replace("sin(x)", "sin(x", 1))
        code, out, err = run(
            capsys, ["eval", "--scene", str(scene), "--at", "u=0,v=0"]
        )
        assert code == 2
        assert "position" in err

    def test_scene_error_has_line(self, capsys, tmp_path):
        scene = tmp_path / "bad.scene"
        scene.write_text("[ambient]\ndim = 3\ncoords = x, y, z\n")
        code, out, err = run(
            capsys, ["eval", "--scene", str(scene), "--at", "u=0,v=0"]
        )
        assert code == 2
        assert "[line" in err

    def test_missing_scene_and_scenario(self, capsys):
        code, out, err = run(capsys, ["eval", "--at", "u=0,v=0"])
        assert code == 2
        assert "--scene PATH or --scenario NAME" in err

    def test_bad_at_values(self, capsys):
        code, out, err = run(
            capsys, ["eval", "--scenario", "plane", "--at", "u=abc,v=0"]
        )
        assert code == 2
        assert "not a number" in err
        code, out, err = run(capsys, ["eval", "--scenario", "plane", "--at", "u;v"])
        assert code == 2
        assert "--at" in err

    def test_bad_order(self, capsys):
        code, out, err = run(
            capsys,
            ["eval", "--scenario", "plane", "--at", "u=0,v=0", "--order", "5"],
        )
        assert code == 2
        assert "--order must be in [2, 4]" in err

    def test_unreadable_scene_file(self, capsys, tmp_path):
        code, out, err = run(
            capsys,
            ["eval", "--scene", str(tmp_path / "missing.scene"), "--at", "u=0,v=0"],
        )
        assert code == 2
        assert "cannot read scene file" in err


class TestVerifyCommand:
    def test_sphere_suite_passes(self, capsys):
        code, out, err = run(
            capsys, ["verify", "--scenario", "sphere", "--grid", "3", "--seed", "1"]
        )
        assert code == 0, err
        assert "0 failed" in out
        assert "(scene sphere, order 3)" in out

    def test_out_is_deterministic(self, capsys, tmp_path):
        f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
        for f in (f1, f2):
            code, out, err = run(
                capsys,
                [
                    "verify",
                    "--scenario",
                    "graph",
                    "--grid",
                    "3",
                    "--seed",
                    "7",
                    "--out",
                    str(f),
                ],
            )
            assert code == 0
        assert f1.read_bytes() == f2.read_bytes()
        report = json.loads(f1.read_text())
        assert report["scene"] == "graph"
        assert report["seed"] == 7

    def test_perturbation_exit_1(self, capsys):
        code, out, err = run(
            capsys,
            [
                "verify",
                "--scenario",
                "rotating-frame",
                "--grid",
                "3",
                "--seed",
                "1",
                "--perturb-ii",
                "1e-3",
            ],
        )
        assert code == 1
        assert " failed" in out
        assert "0 failed" not in out

    def test_check_selection(self, capsys):
        code, out, err = run(
            capsys,
            [
                "verify",
                "--scenario",
                "plane",
                "--grid",
                "2",
                "--checks",
                "codazzi,frame_orthonormality",
            ],
        )
        assert code == 0
        assert "codazzi" in out
        assert "theorem_A_1" not in out

    def test_unknown_check_exit_2(self, capsys):
        code, out, err = run(
            capsys,
            ["verify", "--scenario", "plane", "--checks", "no_such", "--grid", "2"],
        )
        assert code == 2
        assert "unknown check" in err

    def test_grid_points_exclusive(self, capsys, tmp_path):
        pts = tmp_path / "pts.json"
        pts.write_text("[[0.5, 0.5]]")
        code, out, err = run(
            capsys,
            [
                "verify",
                "--scenario",
                "plane",
                "--grid",
                "2",
                "--points",
                str(pts),
            ],
        )
        assert code == 2
        assert "at most one" in err

    def test_points_file(self, capsys, tmp_path):
        pts = tmp_path / "pts.json"
        pts.write_text("[[1.0, 1.0], [1.4, 2.0]]")
        code, out, err = run(
            capsys,
            [
                "verify",
                "--scenario",
                "sphere",
                "--points",
                str(pts),
                "--checks",
                "codazzi",
            ],
        )
        assert code == 0
        assert "codazzi" in out

    def test_bad_grid_and_tol(self, capsys):
        code, out, err = run(
            capsys, ["verify", "--scenario", "plane", "--grid", "0"]
        )
        assert code == 2
        assert "--grid" in err
        code, out, err = run(
            capsys, ["verify", "--scenario", "plane", "--tol=-1e-6"]
        )
        assert code == 2
        assert "--tol" in err


class TestInstalledEntryPoint:
    def test_console_script(self):
        exe = shutil.which("rcgeo")
        assert exe, "console script rcgeo not on PATH"
        proc = subprocess.run(
            [exe, "scenarios", "list"], capture_output=True, text=True, timeout=120
        )
        assert proc.returncode == 0
        assert "sphere" in proc.stdout
        assert proc.stderr == ""
