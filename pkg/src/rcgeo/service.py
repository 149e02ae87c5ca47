"""HTTP layer: scenes and scenario names in, evaluations and reports out.

Endpoints:
  GET  /scenarios  -> registry listing
  POST /eval       -> quantities at one parameter point
  POST /verify     -> identity-suite report

All domain and parse failures map to HTTP 400 with a structured detail
object (message plus position/line when the source is scene text), so a
client can distinguish usage errors from identity failures, which are
ordinary 200 responses carrying a report with failing rows.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, ambient, dsl, jets, linalg, operators, scenarios, surface, verify

app = FastAPI(title="rcgeo", version=__version__)


class EvalRequest(BaseModel):
    scene_text: Optional[str] = None
    scenario: Optional[str] = None
    params: dict = Field(default_factory=dict)
    at: dict
    order: int = verify.DEFAULT_JET_ORDER
    quantities: Optional[list] = None


class VerifyRequest(BaseModel):
    scene_text: Optional[str] = None
    scenario: Optional[str] = None
    params: dict = Field(default_factory=dict)
    grid: Optional[int] = None
    points: Optional[list] = None
    order: int = verify.DEFAULT_JET_ORDER
    tol: Optional[float] = None
    checks: Optional[list] = None
    seed: Optional[int] = None
    perturb_ii: Optional[float] = None


def _bad(message: str, **extra):
    raise HTTPException(status_code=400, detail={"message": message, **extra})


def _resolve_target(scene_text, scenario, params):
    if (scene_text is None) == (scenario is None):
        _bad("provide exactly one of scene_text or scenario")
    try:
        if scenario is not None:
            return scenarios.build(scenario, dict(params) if params else None)
        scene = dsl.parse_scene(scene_text)
        return verify.make_scene_target(scene)
    except dsl.ParseError as exc:
        _bad(str(exc), position=exc.pos)
    except dsl.SceneError as exc:
        _bad(str(exc), line=exc.line)
    except (scenarios.ScenarioError, dsl.EvalError, ValueError) as exc:
        _bad(str(exc))


def _point_from(scene, at: dict) -> np.ndarray:
    names = list(scene.surface_params)
    missing = [n for n in names if n not in at]
    extra = [k for k in at if k not in names]
    if missing or extra:
        _bad(
            f"point must bind exactly the surface parameters {names}; "
            f"missing {missing}, unknown {extra}"
        )
    u = np.array([float(at[n]) for n in names])
    for n, v in zip(names, u):
        lo, hi, _ = scene.domain[n]
        if not (lo - 1e-9 <= v <= hi + 1e-9):
            _bad(f"point outside domain: {n} = {v} not in [{lo}, {hi}]")
    return u


# quantity name -> (needs_order_3, n2_only, extractor)
def _quantity_table():
    def lap(conn):
        def get(s):
            return operators.gauss_laplacian(s, conn).lap_sphere

        return get

    def hopf(s):
        re, im = surface.hopf_coefficient(s)
        return [jets.value_of(re), jets.value_of(im)]

    return {
        "metric": (False, False, lambda s: s.amb.G0),
        "induced_metric": (False, False, lambda s: s.h0),
        "christoffels": (False, False, lambda s: s.amb.gamma0),
        "christoffels_lc": (False, False, lambda s: s.amb.gamma_lc0),
        "torsion": (False, False, lambda s: s.amb.torsion0),
        "contorsion": (False, False, lambda s: s.amb.contorsion0),
        "curvature": (False, False, lambda s: s.amb.curv),
        "ricci": (False, False, lambda s: s.amb.ricci),
        "normal": (False, False, lambda s: s.N0),
        "gauss": (False, False, lambda s: s.ghat0),
        "II": (False, False, lambda s: s.II0),
        "weingarten": (False, False, lambda s: s.W0),
        "H": (False, False, lambda s: [s.H0]),
        "Ke": (False, False, lambda s: [s.Ke0]),
        "tau": (False, False, lambda s: s.tau0),
        "star_tau": (False, True, lambda s: [s.star_tau0]),
        "induced_torsion": (False, False, lambda s: s.torsion_m0),
        "J": (False, True, lambda s: s.J0),
        "laplacian_gauss_induced": (True, False, lap("induced")),
        "laplacian_gauss_lc": (True, False, lap("lc")),
        "grad_H": (True, False, lambda s: operators.grad_scalar(s, s.H)),
        "hopf": (False, True, hopf),
    }


QUANTITIES = _quantity_table()
_EVAL_ERRORS = (
    ambient.AmbientError,
    surface.SurfaceError,
    linalg.LinalgError,
    dsl.EvalError,
    jets.JetShapeError,
    jets.JetDomainError,
)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return float(value)


def compute_quantities(surf, names=None, order: int = verify.DEFAULT_JET_ORDER) -> dict:
    """Evaluate named quantities; None means every applicable one."""
    explicit = names is not None
    if not explicit:
        names = list(QUANTITIES)
    out = {}
    for name in names:
        if name not in QUANTITIES:
            known = ", ".join(QUANTITIES)
            _bad(f"unknown quantity {name!r} (known: {known})")
        needs3, n2_only, get = QUANTITIES[name]
        if needs3 and order < 3:
            if explicit:
                _bad(f"quantity {name!r} needs jet order >= 3")
            continue
        if n2_only and surf.n != 2:
            if explicit:
                _bad(f"quantity {name!r} is defined for two-dimensional surfaces only")
            continue
        try:
            out[name] = _jsonable(get(surf))
        except surface.NonIsothermalError as exc:
            if explicit:
                _bad(f"quantity {name!r}: {exc}")
            continue
    return out


@app.get("/scenarios")
def get_scenarios():
    return {"scenarios": scenarios.list_scenarios()}


@app.post("/eval")
def post_eval(req: EvalRequest):
    if not (2 <= req.order <= jets.MAX_ORDER):
        _bad(f"jet order must be in [2, {jets.MAX_ORDER}], got {req.order}")
    target = _resolve_target(req.scene_text, req.scenario, req.params)
    u = _point_from(target.scene, req.at)
    try:
        surf = surface.surface_eval(target.scene, u, req.order)
        quantities = compute_quantities(surf, req.quantities, req.order)
    except _EVAL_ERRORS as exc:
        _bad(f"evaluation failed at {dict(req.at)}: {exc}")
    return {
        "scene": target.name,
        "at": {n: float(req.at[n]) for n in target.scene.surface_params},
        "jet_order": req.order,
        "quantities": quantities,
    }


@app.post("/verify")
def post_verify(req: VerifyRequest):
    target = _resolve_target(req.scene_text, req.scenario, req.params)
    if req.grid is not None and req.points is not None:
        _bad("provide at most one of grid or points")
    try:
        report = verify.run_suite(
            target,
            checks=req.checks,
            jet_order=req.order,
            tol=req.tol,
            grid=req.grid,
            points=req.points,
            seed=req.seed,
            perturb_ii=req.perturb_ii,
        )
    except verify.VerifyError as exc:
        _bad(str(exc))
    except _EVAL_ERRORS as exc:
        _bad(f"suite evaluation failed: {exc}")
    return report
