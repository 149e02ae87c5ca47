import math
import random

import numpy as np
import pytest

from rcgeo import dsl, jets, scenarios, verify

# -- finite-difference oracles ------------------------------------------


def central_first(f, x, i, h=1e-4):
    xp = np.array(x, dtype=float)
    xm = np.array(x, dtype=float)
    xp[i] += h
    xm[i] -= h
    return (f(xp) - f(xm)) / (2.0 * h)


def central_second(f, x, i, j, h=1e-4):
    if i == j:
        xp = np.array(x, dtype=float)
        xm = np.array(x, dtype=float)
        xp[i] += h
        xm[i] -= h
        return (f(xp) - 2.0 * f(np.asarray(x, dtype=float)) + f(xm)) / (h * h)
    out = 0.0
    for si in (1.0, -1.0):
        for sj in (1.0, -1.0):
            xx = np.array(x, dtype=float)
            xx[i] += si * h
            xx[j] += sj * h
            out += si * sj * f(xx)
    return out / (4.0 * h * h)


# -- random expression ASTs ---------------------------------------------

SAFE_FNS = ("sin", "cos", "exp", "sinh", "cosh")


def random_ast(rng: random.Random, var_names, depth: int, fns=None):
    """Random expression tree; constants nonnegative so parse(print(e)) == e."""
    fns = SAFE_FNS if fns is None else fns
    if depth <= 0 or rng.random() < 0.3:
        kind = rng.random()
        if kind < 0.5:
            return dsl.Var(rng.choice(var_names))
        if kind < 0.9:
            return dsl.Const(round(rng.uniform(0.1, 3.0), 3))
        return dsl.PI
    roll = rng.random()
    if roll < 0.25:
        return dsl.Unary(rng.choice(fns), random_ast(rng, var_names, depth - 1, fns))
    if roll < 0.35:
        return dsl.Unary("neg", random_ast(rng, var_names, depth - 1, fns))
    if roll < 0.45:
        return dsl.Binary(
            "^",
            random_ast(rng, var_names, depth - 1, fns),
            dsl.Const(float(rng.choice((2, 3)))),
        )
    op = rng.choice(("+", "-", "*", "/"))
    return dsl.Binary(
        op,
        random_ast(rng, var_names, depth - 1, fns),
        random_ast(rng, var_names, depth - 1, fns),
    )


def evaluable_ast(rng, var_names, point, order=2, depth=3, fns=None):
    """Rejection-sample an AST that evaluates to a well-conditioned jet."""
    while True:
        e = random_ast(rng, var_names, depth, fns)
        bindings = {
            name: jets.variable(i, point[i], len(var_names), order)
            for i, name in enumerate(var_names)
        }
        try:
            j = dsl.eval_expr(e, bindings)
        except (dsl.EvalError, jets.JetDomainError, jets.JetShapeError):
            continue
        coeffs = np.asarray(j.coeffs, dtype=float)
        if not np.all(np.isfinite(coeffs)):
            continue
        if np.max(np.abs(coeffs)) > 50.0 or np.max(np.abs(coeffs)) < 1e-3:
            continue
        return e


def status_ok(row) -> bool:
    return row["status"] in ("pass", "vacuous")


def rows_by_name(report) -> dict:
    return {row["name"]: row for row in report["checks"]}


# -- shared scene/suite fixtures ----------------------------------------


@pytest.fixture(scope="session")
def rotating_target():
    return scenarios.build("rotating-frame")


@pytest.fixture(scope="session")
def rotating_graph_target():
    return scenarios.build(
        "rotating-frame", {"surface": "graph", "f": "0.1*sin(u)*sin(v)"}
    )


@pytest.fixture(scope="session")
def so3_target():
    return scenarios.build("so3-sigma")


@pytest.fixture(scope="session")
def sphere_target():
    return scenarios.build("sphere")


@pytest.fixture(scope="session")
def graph_target():
    return scenarios.build("graph")


@pytest.fixture(scope="session")
def rotating_report(rotating_target):
    return verify.run_suite(rotating_target, grid=5)


@pytest.fixture(scope="session")
def rotating_graph_report(rotating_graph_target):
    return verify.run_suite(rotating_graph_target, grid=5)


@pytest.fixture(scope="session")
def so3_report(so3_target):
    return verify.run_suite(so3_target, grid=5)


@pytest.fixture(scope="session")
def sphere_report(sphere_target):
    return verify.run_suite(sphere_target, grid=5)


@pytest.fixture(scope="session")
def graph_report(graph_target):
    return verify.run_suite(graph_target, grid=5)


def make_surface(target, u, order=3):
    from rcgeo import surface

    return surface.surface_eval(target.scene, np.asarray(u, dtype=float), order)


@pytest.fixture(scope="session")
def cone_target():
    """Cone in conformal coordinates: isothermal, torsion-free, H nonconstant.

    psi(u, v) = (e^{kv} cos u, e^{kv} sin u, c e^{kv}) with c = sqrt(1-k^2)/k
    has |psi_u| = |psi_v| = e^{kv} and psi_u . psi_v = 0.
    """
    k = 0.8
    c = math.sqrt(1.0 - k * k) / k
    text = scenarios.euclidean_scene_text(
        (
            f"exp({k}*v) * cos(u)",
            f"exp({k}*v) * sin(u)",
            f"{c} * exp({k}*v)",
        ),
        ((0.2, 1.2, 5), (-0.4, 0.4, 5)),
    )
    scene = dsl.parse_scene(text)
    t = verify.make_scene_target(scene, name="cone")
    t.ambient_box.extend([(0.4, 2.0), (0.2, 1.6), (0.6, 2.2)])
    return t
