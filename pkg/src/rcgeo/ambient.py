"""Ambient geometry of a global moving frame.

Given a frame field (an invertible matrix F whose column j holds the
chart components of frame vector j), the induced metric is G = eps^T eps
with eps = F^{-1}, and two connections are evaluated: the flat
metric-compatible connection that parallelizes the frame (Christoffels
Gamma^c_ab = sum_i F^c_i d_a eps^i_b) and the Levi-Civita connection of
G.  Torsion, contorsion, curvature, Ricci tensors, and the covariant
derivative of torsion all come out of jet arithmetic; no finite
differences are involved.

Index conventions: gamma[c][a][b] is the coefficient of the c-th
coordinate field in the derivative along direction a of coordinate
field b; curvature[d][c][a][b] is component d of R(d_a, d_b) d_c with
R(X,Y)Z = D_X D_Y Z - D_Y D_X Z - D_[X,Y] Z; ricci(X, Y) is the trace
of Z -> R(Z, X) Y.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets, linalg
from .jets import Jet


class AmbientError(ValueError):
    pass


class SingularFrameError(AmbientError):
    """Frame matrix not invertible at the evaluation point."""


class InsufficientOrderError(AmbientError):
    pass


@dataclass
class AmbientEval:
    """All ambient fields at one chart point.

    Jet-valued tensors keep enough derivative information for the
    curvature and torsion-derivative extractions below; the float
    attributes are the value parts (and plain-value curvature tensors)
    that downstream checks consume.
    """

    point: np.ndarray
    dim: int
    order: int
    orient_sign: float
    F: np.ndarray  # (dim, dim) jets
    eps: np.ndarray
    G: np.ndarray
    Ginv: np.ndarray
    gamma: np.ndarray  # (dim, dim, dim) jets, frame connection
    gamma_lc: np.ndarray  # Levi-Civita
    torsion: np.ndarray  # jets, gamma antisymmetrized in the lower slots
    contorsion: np.ndarray  # jets, gamma - gamma_lc
    curv: np.ndarray = field(repr=False, default=None)  # floats [d][c][a][b]
    curv_lc: np.ndarray = field(repr=False, default=None)
    ricci: np.ndarray = None
    ricci_lc: np.ndarray = None
    nabla_torsion: np.ndarray = field(repr=False, default=None)  # [a][c][d][e]

    # float views
    F0: np.ndarray = None
    eps0: np.ndarray = None
    G0: np.ndarray = None
    Ginv0: np.ndarray = None
    gamma0: np.ndarray = None
    gamma_lc0: np.ndarray = None
    torsion0: np.ndarray = None
    contorsion0: np.ndarray = None


def _curvature_values(gamma, dim):
    """R[d][c][a][b] from Christoffel jets (values and first partials)."""
    g0 = linalg.values(gamma)
    dg = np.empty((dim, dim, dim, dim))  # dg[e][c][a][b] = d_e gamma^c_ab
    for c in range(dim):
        for a in range(dim):
            for b in range(dim):
                grad = jets.gradient(gamma[c, a, b])
                dg[:, c, a, b] = grad
    R = np.zeros((dim, dim, dim, dim))
    for d in range(dim):
        for c in range(dim):
            for a in range(dim):
                for b in range(dim):
                    v = dg[a, d, b, c] - dg[b, d, a, c]
                    for e in range(dim):
                        v += g0[d, a, e] * g0[e, b, c] - g0[d, b, e] * g0[e, a, c]
                    R[d, c, a, b] = v
    return R


def _ricci_from_curv(R, dim):
    ric = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(dim):
            ric[a, b] = sum(R[c, b, c, a] for c in range(dim))
    return ric


def ambient_eval(scene, x, jet_order: int = jets.DEFAULT_ORDER) -> AmbientEval:
    """Evaluate the ambient structure at chart point x.

    scene is anything with .dim and .frame_jets(coord_jets); jet_order
    must be at least 2 so that curvature (one derivative of the
    Christoffels, two of the frame) is available.
    """
    if jet_order < 2:
        raise InsufficientOrderError(
            f"ambient evaluation needs jet order >= 2, got {jet_order}"
        )
    dim = scene.dim
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise AmbientError(f"point has shape {x.shape}, expected ({dim},)")
    coords = jets.variables(x, dim, jet_order)
    F = scene.frame_jets(coords)
    if F.shape != (dim, dim):
        raise AmbientError(f"frame matrix has shape {F.shape}")
    try:
        eps = linalg.lu_invert(F)
    except linalg.SingularMatrixError as exc:
        raise SingularFrameError(f"frame not invertible at {x.tolist()}: {exc}") from exc
    G = linalg.mat_mul(eps.T, eps)
    Ginv = linalg.lu_invert(G)
    detF = jets.value_of(linalg.det(F))
    orient_sign = 1.0 if detF > 0 else -1.0

    gamma = np.empty((dim, dim, dim), dtype=object)
    for c in range(dim):
        for a in range(dim):
            for b in range(dim):
                s = None
                for i in range(dim):
                    term = F[c, i] * jets.partial(eps[i, b], a)
                    s = term if s is None else s + term
                gamma[c, a, b] = s

    dG = np.empty((dim, dim, dim), dtype=object)  # dG[a][d][b] = d_a G_db
    for a in range(dim):
        for d in range(dim):
            for b in range(dim):
                dG[a, d, b] = jets.partial(G[d, b], a)
    gamma_lc = np.empty((dim, dim, dim), dtype=object)
    for c in range(dim):
        for a in range(dim):
            for b in range(dim):
                s = None
                for d in range(dim):
                    term = Ginv[c, d] * (dG[a, d, b] + dG[b, d, a] - dG[d, a, b])
                    s = term if s is None else s + term
                gamma_lc[c, a, b] = s * 0.5

    torsion = np.empty((dim, dim, dim), dtype=object)
    contorsion = np.empty((dim, dim, dim), dtype=object)
    for c in range(dim):
        for a in range(dim):
            for b in range(dim):
                torsion[c, a, b] = gamma[c, a, b] - gamma[c, b, a]
                contorsion[c, a, b] = gamma[c, a, b] - gamma_lc[c, a, b]

    curv = _curvature_values(gamma, dim)
    curv_lc = _curvature_values(gamma_lc, dim)

    g0 = linalg.values(gamma)
    t0 = linalg.values(torsion)
    # (nabla_a T)^c_de with the frame connection
    nabla_t = np.empty((dim, dim, dim, dim))
    dT = np.empty((dim, dim, dim, dim))
    for c in range(dim):
        for d in range(dim):
            for e in range(dim):
                dT[:, c, d, e] = jets.gradient(torsion[c, d, e])
    for a in range(dim):
        for c in range(dim):
            for d in range(dim):
                for e in range(dim):
                    v = dT[a, c, d, e]
                    for f in range(dim):
                        v += (
                            g0[c, a, f] * t0[f, d, e]
                            - g0[f, a, d] * t0[c, f, e]
                            - g0[f, a, e] * t0[c, d, f]
                        )
                    nabla_t[a, c, d, e] = v

    return AmbientEval(
        point=x,
        dim=dim,
        order=jet_order,
        orient_sign=orient_sign,
        F=F,
        eps=eps,
        G=G,
        Ginv=Ginv,
        gamma=gamma,
        gamma_lc=gamma_lc,
        torsion=torsion,
        contorsion=contorsion,
        curv=curv,
        curv_lc=curv_lc,
        ricci=_ricci_from_curv(curv, dim),
        ricci_lc=_ricci_from_curv(curv_lc, dim),
        nabla_torsion=nabla_t,
        F0=linalg.values(F),
        eps0=linalg.values(eps),
        G0=linalg.values(G),
        Ginv0=linalg.values(Ginv),
        gamma0=g0,
        gamma_lc0=linalg.values(gamma_lc),
        torsion0=t0,
        contorsion0=linalg.values(contorsion),
    )


def frame_orthonormality_defect(amb: AmbientEval) -> float:
    """max |F^T G F - I|, zero when the frame is G-orthonormal."""
    M = amb.F0.T @ amb.G0 @ amb.F0 - np.eye(amb.dim)
    return float(np.max(np.abs(M)))


def metric_compatibility_defect(amb: AmbientEval) -> float:
    """max over both connections of |d_a G_bc - Gamma*G - Gamma*G|."""
    dim = amb.dim
    dG = np.empty((dim, dim, dim))
    for b in range(dim):
        for c in range(dim):
            dG[:, b, c] = jets.gradient(amb.G[b, c])
    worst = 0.0
    for g0 in (amb.gamma0, amb.gamma_lc0):
        for a in range(dim):
            for b in range(dim):
                for c in range(dim):
                    v = dG[a, b, c]
                    for d in range(dim):
                        v -= g0[d, a, b] * amb.G0[d, c] + g0[d, a, c] * amb.G0[b, d]
                    worst = max(worst, abs(v))
    return worst


def contorsion_identity_defect(amb: AmbientEval) -> float:
    """Defect of 2<Z,C(X,Y)> = <Z,T(X,Y)> + <X,T(Z,Y)> + <Y,T(Z,X)>."""
    G0, C0, T0 = amb.G0, amb.contorsion0, amb.torsion0
    dim = amb.dim
    lower_C = np.einsum("zc,cab->zab", G0, C0)  # <d_z, C(d_a, d_b)>
    lower_T = np.einsum("zc,cab->zab", G0, T0)
    worst = 0.0
    for z in range(dim):
        for a in range(dim):
            for b in range(dim):
                rhs = 0.5 * (lower_T[z, a, b] + lower_T[a, z, b] + lower_T[b, z, a])
                worst = max(worst, abs(lower_C[z, a, b] - rhs))
    return worst


def curvature_contorsion_defect(amb: AmbientEval) -> float:
    """Defect of R = R_lc + (D C) terms + C*C terms (all value level)."""
    dim = amb.dim
    C0 = amb.contorsion0
    glc = amb.gamma_lc0
    dC = np.empty((dim, dim, dim, dim))
    for c in range(dim):
        for a in range(dim):
            for b in range(dim):
                dC[:, c, a, b] = jets.gradient(amb.contorsion[c, a, b])
    nabla_C = np.empty((dim, dim, dim, dim))  # (D_a C)^d_bc
    for a in range(dim):
        for d in range(dim):
            for b in range(dim):
                for c in range(dim):
                    v = dC[a, d, b, c]
                    for e in range(dim):
                        v += (
                            glc[d, a, e] * C0[e, b, c]
                            - glc[e, a, b] * C0[d, e, c]
                            - glc[e, a, c] * C0[d, b, e]
                        )
                    nabla_C[a, d, b, c] = v
    worst = 0.0
    for d in range(dim):
        for c in range(dim):
            for a in range(dim):
                for b in range(dim):
                    rhs = amb.curv_lc[d, c, a, b] + nabla_C[a, d, b, c] - nabla_C[b, d, a, c]
                    for e in range(dim):
                        rhs += C0[d, a, e] * C0[e, b, c] - C0[d, b, e] * C0[e, a, c]
                    worst = max(worst, abs(amb.curv[d, c, a, b] - rhs))
    return worst


def detect_totally_skew(amb: AmbientEval, tol: float = 1e-9):
    """Test whether the torsion is totally antisymmetric when lowered.

    Returns (is_skew, defect, scale) where defect is the largest
    violation of <X, T(X,Y)> = 0 = <Y, T(X,Y)> over coordinate fields.
    scale is the overall torsion magnitude; a scale below tol means the
    predicate is vacuous (torsion-free).
    """
    lower = np.einsum("zc,cab->zab", amb.G0, amb.torsion0)
    scale = float(np.max(np.abs(lower))) if lower.size else 0.0
    defect = 0.0
    for a in range(amb.dim):
        for b in range(amb.dim):
            defect = max(defect, abs(lower[a, a, b]), abs(lower[b, a, b]))
    return defect <= tol * max(1.0, scale), defect, scale


def skew_torsion_scale(amb: AmbientEval):
    """For dimension 3, the function f with T(X,Y) = f * cross(X, Y).

    Returns (f, residual) where residual is the worst component defect
    of T - f * cross over coordinate pairs; f is taken from the largest
    cross component.  Requires a totally skew torsion direction to be
    meaningful; the caller decides what to do with the residual.
    """
    if amb.dim != 3:
        raise AmbientError("skew torsion scale needs ambient dimension 3")
    basis = np.eye(3, dtype=object)
    cross = np.zeros((3, 3, 3))  # cross[c][a][b] = (d_a x d_b)^c
    for a in range(3):
        for b in range(3):
            v = linalg.metric_cross(amb.G, amb.orient_sign, basis[a], basis[b])
            cross[:, a, b] = linalg.values(v)
    idx = np.unravel_index(np.argmax(np.abs(cross)), cross.shape)
    f = amb.torsion0[idx] / cross[idx]
    residual = float(np.max(np.abs(amb.torsion0 - f * cross)))
    return float(f), residual


def skew_torsion_scale_jet(amb: AmbientEval):
    """The scale f as a jet (for its chart derivatives)."""
    if amb.dim != 3:
        raise AmbientError("skew torsion scale needs ambient dimension 3")
    basis = np.eye(3, dtype=object)
    best, best_val = None, 0.0
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            v = linalg.metric_cross(amb.G, amb.orient_sign, basis[a], basis[b])
            for c in range(3):
                val = abs(jets.value_of(v[c]))
                if val > best_val:
                    best_val = val
                    best = (c, a, b, v[c])
    if best is None or best_val == 0.0:
        raise AmbientError("degenerate cross products; cannot extract scale")
    c, a, b, denom = best
    return amb.torsion[c, a, b] / denom
