"""Built-in ambient frames and surfaces with known closed-form behavior.

Each scenario builds a Target: a scene object (either a parsed scene
document or the special SO(3) bundle below), a set of named numeric
expectations used by the verification suite, and a chart box for
ambient-level grid checks.  Scenarios are the ground truth fixtures:
their expected values are closed forms, not outputs of this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dsl, jets, linalg

CHART_LIMIT = math.pi - 0.1


class ScenarioError(ValueError):
    pass


@dataclass
class Target:
    name: str
    scene: object
    params: dict
    expectations: dict = field(default_factory=dict)
    ambient_box: list = field(default_factory=list)
    scene_text: str = None


# SO(3) with the left-invariant frame of the standard so(3) basis, in
# the identity-centered exponential chart x -> exp(hat(x)).  The frame
# matrix is the inverse of the left-trivialized differential of exp,
#   B(x) = I - c1 hat(x) + c2 hat(x)^2,
#   c1 = (1 - cos r)/r^2,  c2 = (r - sin r)/r^3,  r = |x|,
# evaluated as series in s = r^2 near the origin to keep jets finite.

_SERIES_TERMS = 14


def _c1_c2(s):
    if jets.value_of(s) < 0.25:
        c1 = 0.0
        c2 = 0.0
        for k in range(_SERIES_TERMS - 1, -1, -1):
            sign = -1.0 if k % 2 else 1.0
            c1 = sign / math.factorial(2 * k + 2) + s * c1
            c2 = sign / math.factorial(2 * k + 3) + s * c2
        return c1, c2
    r = jets.sqrt(s)
    c1 = (1.0 - jets.cos(r)) / s
    c2 = (r - jets.sin(r)) / (s * r)
    return c1, c2


def so3_frame_jets(coord_jets):
    """Frame matrix of the left-invariant SO(3) frame at a chart point."""
    x, y, z = coord_jets
    s = x * x + y * y + z * z
    if jets.value_of(s) >= CHART_LIMIT**2:
        raise ScenarioError(
            f"point with |x| = {math.sqrt(jets.value_of(s)):.3f} is outside the "
            f"identity-centered chart (|x| < {CHART_LIMIT:.3f})"
        )
    c1, c2 = _c1_c2(s)
    hat = np.empty((3, 3), dtype=object)
    hat[0, 0], hat[0, 1], hat[0, 2] = 0.0, -z, y
    hat[1, 0], hat[1, 1], hat[1, 2] = z, 0.0, -x
    hat[2, 0], hat[2, 1], hat[2, 2] = -y, x, 0.0
    hat2 = linalg.mat_mul(hat, hat)
    B = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            B[i, j] = (1.0 if i == j else 0.0) - c1 * hat[i, j] + c2 * hat2[i, j]
    return linalg.lu_invert(B)


class SO3Bundle:
    """Scene-like object for the surface of theta-rotations inside SO(3).

    The surface is u, v -> theta * (sin u cos v, sin u sin v, cos u) in
    the exponential chart: all rotations by the fixed angle theta.
    """

    dim = 3
    coords = ("x", "y", "z")

    def __init__(self, theta: float, orient: float = 1.0):
        if not 0.1 <= theta <= 2.0 * math.pi / 3.0:
            raise ScenarioError(
                f"theta = {theta} outside supported range [0.1, 2*pi/3]"
            )
        self.theta = float(theta)
        self.orient = float(orient)
        self.surface_params = ("u", "v")
        self.domain = {"u": (0.35, 2.75, 5), "v": (0.15, 6.1, 5)}

    def frame_jets(self, coord_jets):
        return so3_frame_jets(coord_jets)

    def surface_jets(self, param_jets):
        u, v = param_jets
        th = self.theta
        su = jets.sin(u)
        return [
            th * (su * jets.cos(v)),
            th * (su * jets.sin(v)),
            th * jets.cos(u),
        ]


def _fmt(x: float) -> str:
    """Shortest clean literal for scene text."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _linear_combo(const: float, terms) -> str:
    """Render const + sum(coef * name) skipping zero coefficients."""
    parts = []
    if const != 0.0:
        parts.append(_fmt(const))
    for coef, name in terms:
        if coef == 0.0:
            continue
        parts.append(name if coef == 1.0 else f"{_fmt(coef)}*{name}")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


def rotating_frame_scene_text(
    theta: str = "sin(x)*cos(y) + z/2",
    e=(1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0),
    surface=("u", "v", "0"),
    domain=((-0.6, 0.6, 5), (-0.6, 0.6, 5)),
    orient: float = 1.0,
) -> str:
    """Scene whose frame is the point-dependent rotation by theta about e."""
    e = np.asarray(e, dtype=float)
    nrm = float(np.linalg.norm(e))
    if nrm < 1e-12:
        raise ScenarioError("axis e must be nonzero")
    e = e / nrm
    A = linalg.values(linalg.hat(e))
    A2 = A @ A
    lines = ["[defs]", f'th = "{theta}"', 's = "sin(th)"', 'c = "1 - cos(th)"', ""]
    lines.append("[ambient]")
    lines.append("dim = 3")
    lines.append("coords = x, y, z")
    rows = []
    for i in range(3):
        entries = []
        for j in range(3):
            const = 1.0 if i == j else 0.0
            expr = _linear_combo(const, [(A[i, j], "s"), (A2[i, j], "c")])
            entries.append(f'"{expr}"')
        rows.append(", ".join(entries))
    lines.append("frame = " + "; ".join(rows))
    lines.append("")
    lines.append("[surface]")
    lines.append("params = u, v")
    lines.append("map = " + ", ".join(f'"{c}"' for c in surface))
    lines.append(f"orient = {_fmt(orient)}")
    lines.append("")
    lines.append("[domain]")
    for name, (lo, hi, ns) in zip(("u", "v"), domain):
        lines.append(f"{name} = {_fmt(lo)}, {_fmt(hi)}, {int(ns)}")
    return "\n".join(lines) + "\n"


def euclidean_scene_text(
    surface, domain, orient: float = 1.0, params=("u", "v"), dim: int = 3
) -> str:
    rows = []
    for i in range(dim):
        rows.append(", ".join('"1"' if i == j else '"0"' for j in range(dim)))
    lines = ["[ambient]", f"dim = {dim}", "coords = " + ", ".join("xyzw"[:dim])]
    lines.append("frame = " + "; ".join(rows))
    lines.append("")
    lines.append("[surface]")
    lines.append("params = " + ", ".join(params))
    lines.append("map = " + ", ".join(f'"{c}"' for c in surface))
    lines.append(f"orient = {_fmt(orient)}")
    lines.append("")
    lines.append("[domain]")
    for name, (lo, hi, ns) in zip(params, domain):
        lines.append(f"{name} = {_fmt(lo)}, {_fmt(hi)}, {int(ns)}")
    return "\n".join(lines) + "\n"


def so3_scene_text(theta: float, orient: float) -> str:
    """Closed-form scene text for the SO(3) frame, valid away from r = 0.

    Uses the inverse in the form I + hat(x)/2 + kap * hat(x)^2 with
    kap = 1/r^2 - (1 + cos r)/(2 r sin r); cross-checked against the
    series evaluation in tests.
    """
    half = repr(0.5)
    lines = [
        "[defs]",
        'r2 = "x*x + y*y + z*z"',
        'r = "sqrt(r2)"',
        'kap = "1/r2 - (1 + cos(r))/(2*r*sin(r))"',
        "",
        "[ambient]",
        "dim = 3",
        "coords = x, y, z",
    ]
    hat = [["0", "-z", "y"], ["z", "0", "-x"], ["-y", "x", "0"]]
    coords = ("x", "y", "z")
    rows = []
    for i in range(3):
        entries = []
        for j in range(3):
            terms = []
            if i == j:
                terms.append(f"1 - kap*r2 + kap*{coords[i]}*{coords[j]}")
            else:
                terms.append(f"kap*{coords[i]}*{coords[j]}")
                terms.append(f"{half}*({hat[i][j]})")
            entries.append('"' + " + ".join(terms) + '"')
        rows.append(", ".join(entries))
    lines.append("frame = " + "; ".join(rows))
    lines.append("")
    lines.append("[surface]")
    lines.append("params = u, v")
    th = repr(float(theta))
    lines.append(
        f'map = "{th}*sin(u)*cos(v)", "{th}*sin(u)*sin(v)", "{th}*cos(u)"'
    )
    lines.append(f"orient = {_fmt(orient)}")
    lines.append("")
    lines.append("[domain]")
    lines.append("u = 0.35, 2.75, 5")
    lines.append("v = 0.15, 6.1, 5")
    return "\n".join(lines) + "\n"


# orientation sign for the sigma-theta surface, fixed so that the
# computed mean curvature matches -cot(theta/2)
SO3_SIGMA_ORIENT = 1.0


def _build_so3_sigma(theta: float = math.pi / 2) -> Target:
    theta = float(theta)
    bundle = SO3Bundle(theta, orient=SO3_SIGMA_ORIENT)
    expectations = {
        "ambient_skew_scale": {"value": -1.0, "tol": 1e-9},
        "mean_curvature_const": {
            "value": -1.0 / math.tan(theta / 2.0),
            "tol": 1e-6,
        },
        "star_tau_const": {"value": -1.0, "tol": 1e-8},
        "surface_torsion_free": {"tol": 1e-8},
        "gauss_homothety": {
            "factor": 1.0 / (2.0 * (1.0 - math.cos(theta))),
            "tol": 1e-6,
        },
        "gauss_harmonic": {"tol": 1e-5},
        "ricci_lc_half_metric": {"tol": 1e-8},
        "weingarten_split": {"tol": 1e-8},
        "umbilic": {"tol": 1e-7},
    }
    box = [(0.15, 0.75), (0.1, 0.7), (0.2, 0.8)]
    return Target(
        name="so3-sigma",
        scene=bundle,
        params={"theta": theta},
        expectations=expectations,
        ambient_box=box,
        scene_text=so3_scene_text(theta, SO3_SIGMA_ORIENT),
    )


def _build_rotating_frame(
    theta: str = "sin(x)*cos(y) + z/2",
    e1: float = 1.0 / 3.0,
    e2: float = 2.0 / 3.0,
    e3: float = 2.0 / 3.0,
    surface: str = "plane",
    f: str = "0.2*(u^2 - v^2)",
) -> Target:
    e = np.asarray([e1, e2, e3], dtype=float)
    e = e / float(np.linalg.norm(e))
    if surface == "plane":
        smap = ("u", "v", "0")
    elif surface == "graph":
        smap = ("u", "v", f)
    else:
        raise ScenarioError(f"surface must be plane or graph, got {surface!r}")
    text = rotating_frame_scene_text(theta=theta, e=tuple(e), surface=smap)
    scene = dsl.parse_scene(text)
    expectations = {}
    if surface == "plane":
        expectations["rotating_plane_formulas"] = {
            "theta": theta,
            "e": e.tolist(),
            "tol": 1e-8,
        }
    box = [(-0.5, 0.5)] * 3
    return Target(
        name="rotating-frame",
        scene=scene,
        params={
            "theta": theta,
            "e1": e[0],
            "e2": e[1],
            "e3": e[2],
            "surface": surface,
            "f": f,
        },
        expectations=expectations,
        ambient_box=box,
        scene_text=text,
    )


def _build_plane() -> Target:
    text = euclidean_scene_text(("u", "v", "0"), ((-1, 1, 5), (-1, 1, 5)))
    scene = dsl.parse_scene(text)
    return Target(
        name="plane",
        scene=scene,
        params={},
        expectations={
            "mean_curvature_const": {"value": 0.0, "tol": 1e-12},
            "surface_torsion_free": {"tol": 1e-12},
            "gauss_harmonic": {"tol": 1e-12},
        },
        ambient_box=[(-1.0, 1.0)] * 3,
        scene_text=text,
    )


def _build_sphere(r: float = 1.0) -> Target:
    r = float(r)
    if r <= 0:
        raise ScenarioError("radius must be positive")
    rr = _fmt(r)
    text = euclidean_scene_text(
        (
            f"{rr}*sin(u)*cos(v)",
            f"{rr}*sin(u)*sin(v)",
            f"{rr}*cos(u)",
        ),
        ((0.3, 2.8, 5), (0.1, 6.2, 5)),
    )
    scene = dsl.parse_scene(text)
    return Target(
        name="sphere",
        scene=scene,
        params={"r": r},
        expectations={
            "mean_curvature_const": {"value": -2.0 / r, "tol": 1e-9},
            "surface_torsion_free": {"tol": 1e-10},
            "gauss_harmonic": {"tol": 1e-7},
            "gauss_energy_const": {"value": 2.0 / r**2, "tol": 1e-7},
        },
        ambient_box=[(-1.0, 1.0)] * 3,
        scene_text=text,
    )


def _build_graph(f: str = "0.25*(u^2 - v^2) + 0.1*u*v") -> Target:
    text = euclidean_scene_text(("u", "v", f), ((-0.8, 0.8, 5), (-0.8, 0.8, 5)))
    scene = dsl.parse_scene(text)
    return Target(
        name="graph",
        scene=scene,
        params={"f": f},
        expectations={"surface_torsion_free": {"tol": 1e-10}},
        ambient_box=[(-1.0, 1.0)] * 3,
        scene_text=text,
    )


def _build_sphere_stereo() -> Target:
    w = "(1 + u^2 + v^2)"
    text = euclidean_scene_text(
        (f"2*u/{w}", f"2*v/{w}", f"(u^2 + v^2 - 1)/{w}"),
        ((-1.2, 1.2, 5), (-1.2, 1.2, 5)),
        orient=-1.0,
    )
    scene = dsl.parse_scene(text)
    return Target(
        name="sphere-stereo",
        scene=scene,
        params={},
        expectations={
            "mean_curvature_const": {"value": -2.0, "tol": 1e-8},
            "isothermal": {"tol": 1e-8},
            "hopf_holomorphic": {"tol": 1e-7},
            "gauss_harmonic": {"tol": 1e-7},
        },
        ambient_box=[(-1.0, 1.0)] * 3,
        scene_text=text,
    )


def _build_enneper() -> Target:
    text = euclidean_scene_text(
        (
            "u - u^3/3 + u*v^2",
            "-v + v^3/3 - u^2*v",
            "u^2 - v^2",
        ),
        ((-0.7, 0.7, 5), (-0.7, 0.7, 5)),
    )
    scene = dsl.parse_scene(text)
    return Target(
        name="enneper",
        scene=scene,
        params={},
        expectations={
            "mean_curvature_const": {"value": 0.0, "tol": 1e-8},
            "isothermal": {"tol": 1e-8},
            "hopf_holomorphic": {"tol": 1e-7},
        },
        ambient_box=[(-1.0, 1.0)] * 3,
        scene_text=text,
    )


@dataclass
class Scenario:
    name: str
    summary: str
    defaults: dict
    builder: object


SCENARIOS = {
    "plane": Scenario(
        "plane", "flat plane in Euclidean 3-space, identity frame", {}, _build_plane
    ),
    "sphere": Scenario(
        "sphere",
        "round sphere of radius r in Euclidean 3-space (polar chart)",
        {"r": 1.0},
        _build_sphere,
    ),
    "graph": Scenario(
        "graph",
        "graph z = f(u, v) in Euclidean 3-space",
        {"f": "0.25*(u^2 - v^2) + 0.1*u*v"},
        _build_graph,
    ),
    "rotating-frame": Scenario(
        "rotating-frame",
        "frame rotated by angle theta(x) about a fixed axis e; plane or graph surface",
        {
            "theta": "sin(x)*cos(y) + z/2",
            "e1": 1.0 / 3.0,
            "e2": 2.0 / 3.0,
            "e3": 2.0 / 3.0,
            "surface": "plane",
            "f": "0.2*(u^2 - v^2)",
        },
        _build_rotating_frame,
    ),
    "so3-sigma": Scenario(
        "so3-sigma",
        "surface of all theta-rotations inside SO(3) with left-invariant frame",
        {"theta": math.pi / 2},
        _build_so3_sigma,
    ),
    "sphere-stereo": Scenario(
        "sphere-stereo",
        "unit sphere in an isothermal (stereographic) chart",
        {},
        _build_sphere_stereo,
    ),
    "enneper": Scenario(
        "enneper",
        "Enneper minimal surface in Euclidean 3-space (isothermal chart)",
        {},
        _build_enneper,
    ),
}


def list_scenarios():
    return [
        {"name": s.name, "summary": s.summary, "defaults": dict(s.defaults)}
        for s in SCENARIOS.values()
    ]


def build(name: str, params: dict = None) -> Target:
    if name not in SCENARIOS:
        known = ", ".join(sorted(SCENARIOS))
        raise ScenarioError(f"unknown scenario {name!r} (known: {known})")
    spec = SCENARIOS[name]
    merged = dict(spec.defaults)
    for key, val in (params or {}).items():
        if key not in spec.defaults:
            raise ScenarioError(
                f"scenario {name!r} does not take parameter {key!r}"
            )
        merged[key] = type(spec.defaults[key])(val) if not isinstance(
            spec.defaults[key], str
        ) else str(val)
    return spec.builder(**merged)
