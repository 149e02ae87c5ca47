"""Identity checks: every named residual the engine certifies.

Each check compares two independently computed sides of one geometric
identity over a grid of evaluation points and reports the worst
absolute difference together with the magnitude of the terms involved,
so a pass on a trivially zero identity is flagged as vacuous instead of
silently green.  Check order, point order, and serialization are all
deterministic: running the same suite twice on the same inputs yields
byte-identical reports.

Vectors are compared in identification (frame coefficient) coordinates
with the Euclidean norm; tensors componentwise with the max norm.  The
sign convention throughout: the Laplacian is the trace of the Hessian
(no minus), recorded in the report as "+trace".
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import ambient, dsl, jets, linalg, operators, surface
from .ambient import ambient_eval
from .scenarios import Target
from .surface import surface_eval

LAPLACIAN_SIGN = "+trace"
BASE_TOLERANCE = 1e-6
DEFAULT_JET_ORDER = 3

# tolerance ladder: algebraic identities, identities using one
# derivative of constructed fields, identities using two
_ALG = 1e-10
_FIRST = 1e-8
_SECOND = 1e-6

_TORSION_FREE_TOL = 1e-9
_ISOTHERMAL_TOL = 1e-8
_PARALLEL_TOL = 1e-8


class VerifyError(ValueError):
    pass


class UnknownCheckError(VerifyError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("unknown check name(s): " + ", ".join(self.names))


def _enorm(v) -> float:
    """Euclidean norm, for vectors in identification coordinates."""
    a = np.asarray(v, dtype=float)
    return float(np.sqrt(np.sum(a * a)))


def _tnorm(t) -> float:
    """Max-norm, for componentwise tensor comparisons."""
    a = np.asarray(t, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _cross_values(amb) -> np.ndarray:
    """cross[c][a][b] = (d_a x d_b)^c for the metric cross product."""
    basis = np.eye(3, dtype=object)
    cross = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            v = linalg.metric_cross(amb.G, amb.orient_sign, basis[a], basis[b])
            cross[:, a, b] = linalg.values(v)
    return cross


# -- cached per-point evaluations ---------------------------------------


class AmbientPoint:
    def __init__(self, scene, x, order: int):
        self.amb = ambient_eval(scene, np.asarray(x, dtype=float), order)

    @cached_property
    def skew(self):
        return ambient.detect_totally_skew(self.amb)

    @cached_property
    def cross(self):
        return _cross_values(self.amb)

    @cached_property
    def scale_jet(self):
        return ambient.skew_torsion_scale_jet(self.amb)


class SurfacePoint:
    def __init__(self, scene, u, order: int, perturb=None):
        s = surface_eval(scene, u, order)
        if perturb is not None:
            s = surface.with_perturbed_ii(s, eps=perturb)
        self.surf = s

    @cached_property
    def lap_ind(self):
        return operators.gauss_laplacian(self.surf, "induced")

    @cached_property
    def lap_lc(self):
        return operators.gauss_laplacian(self.surf, "lc")

    @cached_property
    def wf(self):
        return operators.weingarten_family(self.surf)

    @cached_property
    def dg(self):
        """(n, dim) rows: d_a ghat (connection independent)."""
        s = self.surf
        out = np.empty((s.n, s.dim))
        for i in range(s.dim):
            g = jets.gradient(s.ghat[i])
            out[:, i] = g
        return out

    @cached_property
    def Wt_jets(self):
        """Transpose endomorphism of W as jets: (W^t)^c_b = h^{cd} W^e_d h_eb."""
        s = self.surf
        n = s.n
        out = np.empty((n, n), dtype=object)
        for c in range(n):
            for b in range(n):
                acc = None
                for d in range(n):
                    for e in range(n):
                        term = s.hinv[c, d] * s.W[e, d] * s.h[e, b]
                        acc = term if acc is None else acc + term
                out[c, b] = acc
        return out

    @cached_property
    def Wa2_jets(self):
        """2 W^a = W - W^t as jets."""
        s = self.surf
        n = s.n
        out = np.empty((n, n), dtype=object)
        for c in range(n):
            for b in range(n):
                out[c, b] = s.W[c, b] - self.Wt_jets[c, b]
        return out

    @cached_property
    def hw_jets(self):
        """H I + 2 W^a as jets."""
        s = self.surf
        n = s.n
        out = np.empty((n, n), dtype=object)
        for c in range(n):
            for b in range(n):
                acc = self.Wa2_jets[c, b]
                if c == b:
                    acc = acc + s.H
                out[c, b] = acc
        return out

    @cached_property
    def div_hw_ind(self):
        return operators.div_endomorphism(self.surf, self.hw_jets, "induced")

    @cached_property
    def div_hw_lc(self):
        return operators.div_endomorphism(self.surf, self.hw_jets, "lc")

    @cached_property
    def nabla_W_ind(self):
        return operators.nabla_endomorphism(self.surf, self.surf.W, "induced")

    @cached_property
    def grad_H(self):
        return operators.grad_scalar(self.surf, self.surf.H)

    @cached_property
    def grad_st(self):
        return operators.grad_scalar(self.surf, self.surf.star_tau)

    @cached_property
    def trT_sharp(self):
        return operators.trace_T_sharp(self.surf)

    @cached_property
    def trT_form(self):
        return operators.trace_T_form(self.surf)

    @cached_property
    def trWT_sharp(self):
        return operators.tr_AT_sharp(self.surf, self.surf.W0)

    @cached_property
    def amb_torsion_pull(self):
        """(tau_amb[a][b], chart[a][b][:]) with tau_amb = <N, T_amb(t_a, t_b)>."""
        s = self.surf
        dim, n = s.dim, s.n
        T0 = s.amb.torsion0
        NG = s.amb.G0 @ s.N0
        out = np.zeros((n, n))
        chart = np.zeros((n, n, dim))
        for a in range(n):
            for b in range(n):
                v = np.zeros(dim)
                for i in range(dim):
                    acc = 0.0
                    for j in range(dim):
                        for k in range(dim):
                            acc += T0[i, j, k] * s.t0[j, a] * s.t0[k, b]
                    v[i] = acc
                chart[a, b] = v
                out[a, b] = float(NG @ v)
        return out, chart

    @cached_property
    def skew(self):
        return ambient.detect_totally_skew(self.surf.amb)

    def push(self, v) -> np.ndarray:
        return operators.phi_push(self.surf, v)

    def frame_of_chart(self, v) -> np.ndarray:
        return self.surf.amb.eps0 @ np.asarray(v, dtype=float)


def _tr_M_T2(s, A0, B0) -> np.ndarray:
    """tr_M T(A., B.) = sum_i T(A E_i, B E_i) in parameter components."""
    n = s.n
    out = np.zeros(n)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                for d in range(n):
                    for e in range(n):
                        out[c] += (
                            s.hinv0[a, b] * s.torsion_m0[c, d, e] * A0[d, a] * B0[e, b]
                        )
    return out


# -- ambient check bodies -----------------------------------------------


def _ck_frame_orthonormality(ap: AmbientPoint):
    return ambient.frame_orthonormality_defect(ap.amb), 1.0


def _ck_metric_compatibility(ap: AmbientPoint):
    amb = ap.amb
    scale = _tnorm(amb.G0) * max(_tnorm(amb.gamma0), _tnorm(amb.gamma_lc0))
    return ambient.metric_compatibility_defect(amb), scale


def _ck_contorsion_identity(ap: AmbientPoint):
    amb = ap.amb
    scale = max(_tnorm(amb.torsion0), _tnorm(amb.contorsion0))
    return ambient.contorsion_identity_defect(amb), scale


def _ck_ambient_flatness(ap: AmbientPoint):
    amb = ap.amb
    dmax = 0.0
    for c in range(amb.dim):
        for a in range(amb.dim):
            for b in range(amb.dim):
                dmax = max(dmax, _tnorm(jets.gradient(amb.gamma[c, a, b])))
    scale = dmax + amb.dim * _tnorm(amb.gamma0) ** 2
    return _tnorm(amb.curv), scale


def _ck_curvature_contorsion(ap: AmbientPoint):
    amb = ap.amb
    scale = max(_tnorm(amb.curv), _tnorm(amb.curv_lc), _tnorm(amb.contorsion0) ** 2)
    return ambient.curvature_contorsion_defect(amb), scale


def _ck_totally_skew_predicate(ap: AmbientPoint):
    _, defect, scale = ap.skew
    return defect, scale


def _ck_curvature_f_cross(ap: AmbientPoint):
    amb = ap.amb
    cross = ap.cross
    fj = ap.scale_jet
    f0 = jets.value_of(fj)
    df = jets.gradient(fj)
    worst = 0.0
    for d in range(3):
        for c in range(3):
            for a in range(3):
                for b in range(3):
                    # (d_a x d_b) x d_c, component d
                    u = cross[:, a, b]
                    uxc = sum(u[e] * cross[d, e, c] for e in range(3))
                    rhs = (
                        amb.curv_lc[d, c, a, b]
                        + 0.25 * f0 * f0 * uxc
                        + 0.5 * (df[a] * cross[d, b, c] - df[b] * cross[d, a, c])
                    )
                    worst = max(worst, abs(amb.curv[d, c, a, b] - rhs))
    scale = max(_tnorm(amb.curv_lc), abs(f0) ** 2 * _tnorm(cross) ** 2)
    return worst, scale


def _ck_ricci_f_cross(ap: AmbientPoint):
    amb = ap.amb
    cross = ap.cross
    fj = ap.scale_jet
    f0 = jets.value_of(fj)
    df = jets.gradient(fj)
    worst = 0.0
    for a in range(3):
        for b in range(3):
            dfx = sum(df[c] * cross[c, a, b] for c in range(3))
            rhs = amb.ricci_lc[a, b] - 0.5 * f0 * f0 * amb.G0[a, b] + 0.5 * dfx
            worst = max(worst, abs(amb.ricci[a, b] - rhs))
    scale = max(_tnorm(amb.ricci_lc), abs(f0) ** 2 * _tnorm(amb.G0))
    return worst, scale


def _ck_schur(ap: AmbientPoint):
    amb = ap.amb
    cross = ap.cross
    df = jets.gradient(ap.scale_jet)
    worst = 0.0
    for a in range(3):
        for c in range(3):
            for d in range(3):
                for e in range(3):
                    worst = max(
                        worst,
                        abs(amb.nabla_torsion[a, c, d, e] - df[a] * cross[c, d, e]),
                    )
    scale = max(_tnorm(amb.nabla_torsion), _tnorm(df) * _tnorm(cross))
    return worst, scale


# -- surface check bodies -----------------------------------------------


def _ck_trace_transpose(p: SurfacePoint):
    s = p.surf
    n = s.n
    nab = p.nabla_W_ind
    dtr = jets.gradient(s.H)  # H is exactly tr W
    r1 = max(
        abs(dtr[a] - sum(nab[a, c, c] for c in range(n))) for a in range(n)
    )
    nabt = operators.nabla_endomorphism(s, p.Wt_jets, "induced")
    r2 = 0.0
    for a in range(n):
        r2 = max(r2, _tnorm(operators.endo_transpose(s, nab[a]) - nabt[a]))
    return max(r1, r2), _tnorm(nab)


def _ck_contorsion_trace(p: SurfacePoint):
    s = p.surf
    n = s.n
    eye = np.eye(n)
    r1 = _enorm(p.push(operators.tr_M_C(s, eye, eye) - p.trT_sharp))
    A = s.W0
    B = s.J0 if s.n == 2 else s.W0
    Bt = operators.endo_transpose(s, B)
    rhs = 0.5 * _tr_M_T2(s, A, B) + operators.tr_AT_sharp(
        s, operators.endo_sym(s, A @ Bt)
    )
    r2 = _enorm(p.push(operators.tr_M_C(s, A, B) - rhs))
    scale = max(_tnorm(s.contorsion_m0), _tnorm(s.torsion_m0)) * max(1.0, _tnorm(A))
    return max(r1, r2), scale


def _ck_divergence_difference(p: SurfacePoint):
    s = p.surf
    lhs = operators.div_endomorphism(s, s.W, "induced") - operators.div_endomorphism(
        s, s.W, "lc"
    )
    rhs = (
        0.5 * operators.tr_M_T(s, s.W0)
        + operators.tr_AT_sharp(s, p.wf.Ws)
        - s.W0 @ p.trT_sharp
    )
    r1 = _enorm(p.push(lhs - rhs))
    eye = np.eye(s.n)
    rhs2 = operators.tr_M_C(s, eye, s.W0) - s.W0 @ operators.tr_M_C(s, eye, eye)
    r2 = _enorm(p.push(lhs - rhs2))
    scale = max(_enorm(p.push(lhs)), _enorm(p.push(rhs)))
    return max(r1, r2), scale


def _ck_leibniz(p: SurfacePoint):
    s = p.surf
    n = s.n
    fA = np.empty((n, n), dtype=object)
    for c in range(n):
        for b in range(n):
            fA[c, b] = s.H * s.J[c, b]
    lhs = operators.div_endomorphism(s, fA, "induced")
    rhs = s.J0 @ p.grad_H + s.H0 * operators.div_endomorphism(s, s.J, "induced")
    scale = max(_enorm(p.push(lhs)), _enorm(p.push(rhs)))
    return _enorm(p.push(lhs - rhs)), scale


def _ck_hessian_laplacian_difference(p: SurfacePoint):
    s = p.surf
    n = s.n
    lapdiff = p.lap_ind.lap_hat - p.lap_lc.lap_hat
    corr = np.zeros(s.dim)
    for c in range(n):
        corr += p.trT_sharp[c] * p.dg[c]
    r1 = _enorm(lapdiff + corr)
    hess_i = operators.hessian_map(s, s.ghat, "induced")
    hess_l = operators.hessian_map(s, s.ghat, "lc")
    r2 = 0.0
    for a in range(n):
        for b in range(n):
            v = hess_i[a, b] - hess_l[a, b]
            for c in range(n):
                v = v + s.contorsion_m0[c, a, b] * p.dg[c]
            r2 = max(r2, _tnorm(v))
    scale = max(_enorm(p.lap_ind.lap_hat), _enorm(p.lap_lc.lap_hat), _enorm(corr))
    return max(r1, r2), scale


def _ck_sphere_embedding(p: SurfacePoint):
    s = p.surf
    unit = abs(float(s.ghat0 @ s.ghat0) - 1.0)
    tang = max(abs(float(p.dg[a] @ s.ghat0)) for a in range(s.n))
    r = max(
        p.lap_ind.projection_defect, p.lap_lc.projection_defect, unit, tang
    )
    return r, max(p.lap_ind.dg_norm2, 1.0)


def _ck_tau_as_skew_ii(p: SurfacePoint):
    s = p.surf
    n = s.n
    pull, _ = p.amb_torsion_pull
    skew_ii = s.II0 - s.II0.T
    r1 = _tnorm(skew_ii - pull)
    two_wa = 2.0 * p.wf.Wa
    r2 = 0.0
    for a in range(n):
        for b in range(n):
            val = sum(two_wa[c, a] * s.h0[c, b] for c in range(n))
            r2 = max(r2, abs(val - s.tau0[a, b]))
    scale = max(_tnorm(s.tau0), _tnorm(s.II0))
    return max(r1, r2), scale


def _ck_fundamental_gauss(p: SurfacePoint):
    s = p.surf
    n, dim = s.n, s.dim
    amb = s.amb
    R_M, _ = operators.m_curvature(s, "induced")
    worst = 0.0
    # Gauss: <R_amb(t_a,t_b)t_c, t_d> = <R_M(a,b)c, d> - II(a,d) II(b,c) + II(a,c) II(b,d)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                Rt = np.zeros(dim)
                for i in range(dim):
                    acc = 0.0
                    for j in range(dim):
                        for k in range(dim):
                            for m in range(dim):
                                acc += (
                                    amb.curv[i, j, k, m]
                                    * s.t0[j, c]
                                    * s.t0[k, a]
                                    * s.t0[m, b]
                                )
                    Rt[i] = acc
                for d in range(n):
                    lhs = float(s.t0[:, d] @ amb.G0 @ Rt)
                    rhs = (
                        sum(s.h0[d, e] * R_M[e, c, a, b] for e in range(n))
                        - s.II0[a, d] * s.II0[b, c]
                        + s.II0[a, c] * s.II0[b, d]
                    )
                    worst = max(worst, abs(lhs - rhs))
    # torsion split: T_amb(t_a, t_b) = T_M(a,b) + tau(a,b) N
    _, chart = p.amb_torsion_pull
    for a in range(n):
        for b in range(n):
            v = chart[a, b].copy()
            for c in range(n):
                v -= s.torsion_m0[c, a, b] * s.t0[:, c]
            v -= s.tau0[a, b] * s.N0
            worst = max(worst, _tnorm(v))
    scale = max(_tnorm(s.II0) ** 2, _tnorm(s.torsion_m0), _tnorm(s.tau0))
    return worst, scale


def _ck_codazzi(p: SurfacePoint):
    s = p.surf
    n, dim = s.n, s.dim
    amb = s.amb
    nab = p.nabla_W_ind
    Binv0 = linalg.values(s.basis_inv)
    worst = 0.0
    scale = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            vec = np.zeros(n)
            for c in range(n):
                v = nab[a, c, b] - nab[b, c, a]
                for d in range(n):
                    v += s.W0[c, d] * s.torsion_m0[d, a, b]
                vec[c] = v
            Rv = np.zeros(dim)
            for i in range(dim):
                acc = 0.0
                for j in range(dim):
                    for k in range(dim):
                        for m in range(dim):
                            acc += (
                                amb.curv[i, j, k, m] * s.N0[j] * s.t0[k, a] * s.t0[m, b]
                            )
                Rv[i] = acc
            vec = vec + (Binv0 @ Rv)[:n]
            worst = max(worst, _enorm(p.push(vec)))
            scale = max(scale, _tnorm(nab), _tnorm(s.W0) * _tnorm(s.torsion_m0))
    return worst, scale


def _ck_mean_curvature_gradient(p: SurfacePoint):
    s = p.surf
    n = s.n
    dH = jets.gradient(s.H)
    divWt = operators.div_endomorphism(s, p.Wt_jets, "induced")
    worst = 0.0
    scale = 0.0
    for a in range(n):
        pair = sum(s.h0[a, c] * divWt[c] for c in range(n))
        ric = float(s.t0[:, a] @ s.amb.ricci @ s.N0)
        trwt = sum(
            s.W0[b, c] * s.torsion_m0[c, a, b] for b in range(n) for c in range(n)
        )
        worst = max(worst, abs(dH[a] - pair - ric + trwt))
        scale = max(scale, abs(dH[a]), abs(pair), abs(ric), abs(trwt))
    return worst, scale


def _ck_phi_isometry(p: SurfacePoint):
    s = p.surf
    gram = s.t0.T @ s.amb.G0 @ s.t0
    r1 = _tnorm(gram - s.h0)
    r2 = abs(float(s.ghat0 @ s.ghat0) - 1.0)
    r3 = 0.0
    for a in range(s.n):
        r3 = max(r3, abs(float(p.push(np.eye(s.n)[a]) @ s.ghat0)))
    return max(r1, r2, r3), max(_tnorm(s.h0), 1.0)


def _ck_phi_connection(p: SurfacePoint):
    s = p.surf
    n, dim = s.n, s.dim
    eps0 = s.amb.eps0
    worst = 0.0
    scale = 0.0
    for b in range(n):
        xi = linalg.mat_vec(s.eps_s, s.t[:, b])
        for a in range(n):
            dvec = np.array([jets.gradient(xi[i])[a] for i in range(dim)])
            rhs = eps0 @ (s.t0 @ s.gamma_m0[:, a, b])
            full = dvec - rhs - s.II0[a, b] * s.ghat0
            proj = dvec - float(dvec @ s.ghat0) * s.ghat0 - rhs
            worst = max(worst, _enorm(full), _enorm(proj))
            scale = max(scale, _enorm(dvec))
    return worst, scale


def _ck_phi_w_dg(p: SurfacePoint):
    s = p.surf
    n = s.n
    eps0 = s.amb.eps0
    worst = 0.0
    scale = 0.0
    for a in range(n):
        acc = p.dg[a].copy()
        for c in range(n):
            acc += s.W0[c, a] * (eps0 @ s.t0[:, c])
        worst = max(worst, _enorm(acc))
        scale = max(scale, _enorm(p.dg[a]))
    return worst, scale


def _ck_laplacian_div_w(p: SurfacePoint):
    s = p.surf
    divW = operators.div_endomorphism(s, s.W, "induced")
    r1 = _enorm(p.lap_ind.lap_sphere + p.push(divW))
    r2 = _enorm(p.lap_ind.lap_hat + p.push(divW) + p.wf.norm2 * s.ghat0)
    scale = max(_enorm(p.lap_ind.lap_hat), _enorm(p.push(divW)), p.wf.norm2)
    return max(r1, r2), scale


def _theorem_a_rhs(p: SurfacePoint, which: int) -> np.ndarray:
    s = p.surf
    if which == 1:
        return p.div_hw_ind + p.trWT_sharp
    if which == 2:
        return (
            p.div_hw_lc
            + p.trWT_sharp
            - (2.0 * p.wf.Wa) @ p.trT_sharp
            + operators.tr_M_T(s, p.wf.Wa)
        )
    if which == 3:
        return p.div_hw_ind + p.trWT_sharp + p.wf.W @ p.trT_sharp
    return (
        p.div_hw_lc
        + p.trWT_sharp
        + p.wf.Wt @ p.trT_sharp
        + operators.tr_M_T(s, p.wf.Wa)
    )


def _ck_theorem_a(which: int):
    def body(p: SurfacePoint):
        lap = p.lap_ind if which in (1, 2) else p.lap_lc
        rhs = p.push(_theorem_a_rhs(p, which))
        resid = _enorm(lap.lap_sphere + rhs)
        scale = max(_enorm(lap.lap_sphere), _enorm(rhs))
        return resid, scale

    return body


def _ck_prop_b_1(p: SurfacePoint):
    s = p.surf
    grad = p.grad_H + s.J0 @ p.grad_st
    r1 = _enorm(p.push(p.div_hw_ind - grad))
    r2 = _enorm(p.push(p.div_hw_lc - grad))
    scale = max(_enorm(p.push(grad)), _enorm(p.push(p.div_hw_ind)))
    return max(r1, r2), scale


def _ck_prop_b_2(p: SurfacePoint):
    s = p.surf
    vec = p.trWT_sharp + p.wf.Wt @ p.trT_sharp - s.H0 * p.trT_sharp
    scale = max(_enorm(p.push(p.trWT_sharp)), abs(s.H0) * _enorm(p.push(p.trT_sharp)))
    return _enorm(p.push(vec)), scale


def _ck_prop_b_3(p: SurfacePoint):
    s = p.surf
    lhs = operators.tr_M_T(s, p.wf.Wa)
    rhs = s.star_tau0 * (s.J0 @ p.trT_sharp)
    scale = max(_enorm(p.push(lhs)), _enorm(p.push(rhs)))
    return _enorm(p.push(lhs - rhs)), scale


def _ck_theorem_b(which: int):
    def body(p: SurfacePoint):
        s = p.surf
        grad = p.grad_H + s.J0 @ p.grad_st
        A = s.H0 * np.eye(2) + s.star_tau0 * s.J0
        if which == 1:
            lap = p.lap_ind
            rhs = grad + (A - s.W0) @ p.trT_sharp
        else:
            lap = p.lap_lc
            rhs = grad + A @ p.trT_sharp
        rhs_f = p.push(rhs)
        resid = _enorm(lap.lap_sphere + rhs_f)
        return resid, max(_enorm(lap.lap_sphere), _enorm(rhs_f))

    return body


def _ck_cauchy_riemann(p: SurfacePoint):
    s = p.surf
    r1 = _enorm(p.lap_ind.lap_sphere)
    r2 = _enorm(p.push(p.grad_H + s.J0 @ p.grad_st))
    return abs(r1 - r2), max(r1, r2)


def _ck_hopf(p: SurfacePoint):
    s = p.surf
    re, im = surface.hopf_coefficient(s, tol=_ISOTHERMAL_TOL)
    dre = jets.gradient(re)
    dim_ = jets.gradient(im)
    q_re = 0.5 * (dre[0] - dim_[1])
    q_im = 0.5 * (dim_[0] + dre[1])
    lam2 = s.h0[0, 0]
    dH = jets.gradient(s.H)
    dst = jets.gradient(s.star_tau)
    t_re = (lam2 / 8.0) * (dH[0] - dst[1])
    t_im = -(lam2 / 8.0) * (dst[0] + dH[1])
    resid = math.hypot(q_re - t_re, q_im - t_im)
    scale = max(math.hypot(q_re, q_im), math.hypot(t_re, t_im))
    return resid, scale


def _ck_skew_as_star_tau_j(p: SurfacePoint):
    s = p.surf
    lhs = 2.0 * p.wf.Wa
    rhs = s.star_tau0 * s.J0
    return _tnorm(lhs - rhs), max(_tnorm(lhs), _tnorm(rhs))


def _ck_tsst_split(p: SurfacePoint):
    s = p.surf
    n, dim = s.n, s.dim
    amb = s.amb
    r1 = _tnorm(p.wf.Ws - p.wf.Wbar)
    Binv0 = linalg.values(s.basis_inv)
    r2 = 0.0
    for b in range(n):
        TN = np.zeros(dim)
        for i in range(dim):
            TN[i] = sum(
                amb.torsion0[i, j, k] * s.N0[j] * s.t0[k, b]
                for j in range(dim)
                for k in range(dim)
            )
        coeffs = Binv0 @ TN
        r2 = max(
            r2,
            _tnorm(p.wf.Wa[:, b] - 0.5 * coeffs[:n]),
            0.5 * abs(coeffs[n]),
        )
    r3 = abs(p.wf.H - p.wf.Hbar)
    # trace identity under skewness: tr(A T)^sharp = tr_M T(., A^t .)
    r4 = _enorm(p.push(p.trWT_sharp - operators.tr_M_T(s, p.wf.Wt)))
    scale = max(_tnorm(p.wf.W), _tnorm(amb.torsion0))
    return max(r1, r2, r3, r4), scale


def _ck_tsst_divergence(p: SurfacePoint):
    s = p.surf
    n, dim = s.n, s.dim
    amb = s.amb
    div_i = operators.div_endomorphism(s, p.Wa2_jets, "induced")
    div_l = operators.div_endomorphism(s, p.Wa2_jets, "lc")
    r1 = _enorm(p.push(div_i - (div_l - operators.tr_AT_sharp(s, p.wf.Wa))))
    ambv = np.zeros(dim)
    for a in range(n):
        for b in range(n):
            w = s.hinv0[a, b]
            for c in range(dim):
                acc = 0.0
                for i in range(dim):
                    for d in range(dim):
                        for e in range(dim):
                            acc += (
                                s.t0[i, a]
                                * amb.nabla_torsion[i, c, d, e]
                                * s.N0[d]
                                * s.t0[e, b]
                            )
                ambv[c] += w * acc
    r2 = _enorm(p.frame_of_chart(ambv) - p.push(div_l))
    scale = max(_enorm(p.push(div_i)), _enorm(p.push(div_l)), _enorm(ambv))
    return max(r1, r2), scale


def _ck_thm_d_grad_h(p: SurfacePoint):
    s = p.surf
    r1 = _enorm(p.lap_ind.lap_sphere + p.push(p.grad_H))
    r2 = _enorm(p.lap_ind.lap_hat + p.push(p.grad_H) + p.wf.norm2 * s.ghat0)
    r3 = _enorm(p.lap_ind.lap_hat - p.lap_lc.lap_hat)
    r4 = abs(p.wf.H - p.wf.Hbar)
    scale = max(
        _enorm(p.lap_ind.lap_hat), _enorm(p.push(p.grad_H)), p.wf.norm2, abs(p.wf.H)
    )
    return max(r1, r2, r3, r4), scale


def _ck_thm_d_norm_w(p: SurfacePoint):
    s = p.surf
    ric_nn = float(s.N0 @ s.amb.ricci_lc @ s.N0)
    resid = abs(p.wf.norm2 - p.wf.norm2_bar - ric_nn)
    return resid, max(p.wf.norm2, p.wf.norm2_bar, abs(ric_nn))


def _ck_lambda_extraction(p: SurfacePoint, target: Target):
    s = p.surf
    f, fit = ambient.skew_torsion_scale(s.amb)
    df = jets.gradient(ambient.skew_torsion_scale_jet(s.amb))
    r = max(fit, _tnorm(df))
    if s.n == 2 and s.star_tau0 is not None:
        r = max(r, abs(s.star_tau0 - f))
    exp = target.expectations.get("ambient_skew_scale")
    if exp is not None:
        r = max(r, abs(f - float(exp["value"])))
    return r, max(_tnorm(s.amb.torsion0), abs(f))


def _ck_sigma_mean_curvature(p: SurfacePoint, target: Target):
    s = p.surf
    value = float(target.expectations["mean_curvature_const"]["value"])
    return abs(s.H0 - value), max(abs(value), abs(s.H0))


def _ck_sigma_homothety(p: SurfacePoint, target: Target):
    s = p.surf
    factor = float(target.expectations["gauss_homothety"]["factor"])
    P = p.dg @ p.dg.T
    ref = factor * s.h0
    return _tnorm(P - ref) / max(1.0, _tnorm(ref)), _tnorm(ref)


def _ck_sigma_harmonic(p: SurfacePoint):
    r = max(_enorm(p.lap_ind.lap_sphere), _enorm(p.lap_lc.lap_sphere))
    return r, max(p.lap_ind.dg_norm2, 1.0)


# -- catalog ------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    anchor: str  # self-contained statement of the identity being tested
    kind: str  # "ambient" or "surface"
    tol: float
    fn: object
    min_order: int = 2
    requires: tuple = ()
    takes_target: bool = False


CATALOG = [
    IdentityCheck(
        "frame_orthonormality",
        "F^T G F = I: the frame columns are orthonormal for the metric they induce",
        "ambient",
        _ALG,
        _ck_frame_orthonormality,
    ),
    IdentityCheck(
        "metric_compatibility_both",
        "d_a G_bc = Gamma^d_ab G_dc + Gamma^d_ac G_bd for the frame connection and for Levi-Civita",
        "ambient",
        _FIRST,
        _ck_metric_compatibility,
    ),
    IdentityCheck(
        "contorsion_identity",
        "2<Z,C(X,Y)> = <Z,T(X,Y)> + <X,T(Z,Y)> + <Y,T(Z,X)>",
        "ambient",
        _FIRST,
        _ck_contorsion_identity,
    ),
    IdentityCheck(
        "ambient_flatness",
        "R(X,Y)Z = 0: the connection that parallelizes a global frame is flat",
        "ambient",
        1e-8,
        _ck_ambient_flatness,
    ),
    IdentityCheck(
        "curvature_contorsion",
        "R = R_bar + (nabla_bar_X C)(Y,Z) - (nabla_bar_Y C)(X,Z) + C(X,C(Y,Z)) - C(Y,C(X,Z))",
        "ambient",
        1e-7,
        _ck_curvature_contorsion,
    ),
    IdentityCheck(
        "totally_skew_predicate",
        "<X,T(X,Y)> = 0 = <Y,T(X,Y)>: lowered torsion alternates in all three slots",
        "ambient",
        _FIRST,
        _ck_totally_skew_predicate,
        requires=("dim3", "expected_or_detected_skew"),
    ),
    IdentityCheck(
        "curvature_f_cross",
        "R(X,Y)Z = R_bar(X,Y)Z + (f^2/4)(X x Y) x Z + (1/2)(X(f) Y - Y(f) X) x Z for T = f cross",
        "ambient",
        1e-7,
        _ck_curvature_f_cross,
        requires=("dim3", "skew_box"),
    ),
    IdentityCheck(
        "ricci_f_cross",
        "Ric(X,Y) = Ric_bar(X,Y) - (f^2/2)<X,Y> + (1/2) df(X x Y) for T = f cross",
        "ambient",
        1e-7,
        _ck_ricci_f_cross,
        requires=("dim3", "skew_box"),
    ),
    IdentityCheck(
        "schur_joint_residuals",
        "nabla T = df (x) cross: the torsion derivative and the scale gradient vanish together",
        "ambient",
        _FIRST,
        _ck_schur,
        requires=("dim3", "skew_box"),
    ),
    IdentityCheck(
        "trace_transpose",
        "nabla_X tr A = tr(nabla_X A) and (nabla_X A)^t = nabla_X(A^t), tested on A = W",
        "surface",
        1e-8,
        _ck_trace_transpose,
        min_order=3,
    ),
    IdentityCheck(
        "contorsion_trace",
        "tr_M C = (tr T)^sharp and tr_M C(A.,B.) = (1/2) tr_M T(A.,B.) + tr((A B^t)^s T)^sharp",
        "surface",
        1e-8,
        _ck_contorsion_trace,
    ),
    IdentityCheck(
        "divergence_difference",
        "Div A - Div_bar A = (1/2) tr_M T(.,A.) + tr(A^s T)^sharp - A (tr T)^sharp, tested on A = W",
        "surface",
        1e-7,
        _ck_divergence_difference,
        min_order=3,
    ),
    IdentityCheck(
        "leibniz",
        "Div(f A) = A Grad f + f Div A, tested with f = H and A = J",
        "surface",
        1e-7,
        _ck_leibniz,
        min_order=3,
        requires=("n2",),
    ),
    IdentityCheck(
        "hessian_laplacian_difference",
        "Hess F - Hess_bar F = -dF(C(.,.)) and Lap F - Lap_bar F = -dF((tr T)^sharp), on F = ghat",
        "surface",
        _SECOND,
        _ck_hessian_laplacian_difference,
        min_order=3,
    ),
    IdentityCheck(
        "sphere_embedding",
        "<Lap ghat, ghat> = -|d g|^2: the sphere-valued and coefficient Laplacians differ by the normal term",
        "surface",
        1e-8,
        _ck_sphere_embedding,
        min_order=3,
    ),
    IdentityCheck(
        "tau_as_skew_II",
        "II(X,Y) - II(Y,X) = <N, T_amb(X,Y)> = tau(X,Y) = <2 W^a X, Y>",
        "surface",
        _ALG,
        _ck_tau_as_skew_ii,
    ),
    IdentityCheck(
        "fundamental_formulas_gauss",
        "<R_amb(A,B)Y,Z> = <R_M(A,B)Y,Z> - II(A,Z)II(B,Y) + II(A,Y)II(B,Z); T_amb(X,Y) = T_M(X,Y) + tau(X,Y) N",
        "surface",
        1e-7,
        _ck_fundamental_gauss,
        min_order=3,
    ),
    IdentityCheck(
        "codazzi",
        "(nabla_X W)Y - (nabla_Y W)X = -R_amb(X,Y)N - W T_M(X,Y)",
        "surface",
        _SECOND,
        _ck_codazzi,
        min_order=3,
    ),
    IdentityCheck(
        "mean_curvature_gradient",
        "dH(X) = <Div W^t, X> + Ric_amb(X,N) - tr(W T)(X)",
        "surface",
        _SECOND,
        _ck_mean_curvature_gradient,
        min_order=3,
    ),
    IdentityCheck(
        "phi_isometry",
        "phi = eps d psi carries h to the Euclidean metric on the sphere tangent planes",
        "surface",
        _ALG,
        _ck_phi_isometry,
    ),
    IdentityCheck(
        "phi_connection",
        "d_a(eps t_b) = phi(nabla_a d_b) + II_ab ghat: phi is parallel for the induced and pulled-back sphere connections",
        "surface",
        _FIRST,
        _ck_phi_connection,
    ),
    IdentityCheck(
        "phi_W_dg",
        "d ghat = -phi W",
        "surface",
        _FIRST,
        _ck_phi_w_dg,
    ),
    IdentityCheck(
        "laplacian_div_W",
        "-phi^{-1} Lap g = Div W and -phi^{-1} Lap ghat = Div W + |W|^2 N",
        "surface",
        _SECOND,
        _ck_laplacian_div_w,
        min_order=3,
    ),
    IdentityCheck(
        "theorem_A_1",
        "-phi^{-1} Lap g = Div(H I + 2 W^a) + tr(W T)^sharp",
        "surface",
        _SECOND,
        _ck_theorem_a(1),
        min_order=3,
    ),
    IdentityCheck(
        "theorem_A_2",
        "-phi^{-1} Lap g = Div_bar(H I + 2 W^a) + tr(W T)^sharp - 2 W^a (tr T)^sharp + tr_M T(., W^a .)",
        "surface",
        _SECOND,
        _ck_theorem_a(2),
        min_order=3,
    ),
    IdentityCheck(
        "theorem_A_3",
        "-phi^{-1} Lap_bar g = Div(H I + 2 W^a) + tr(W T)^sharp + W (tr T)^sharp",
        "surface",
        _SECOND,
        _ck_theorem_a(3),
        min_order=3,
    ),
    IdentityCheck(
        "theorem_A_4",
        "-phi^{-1} Lap_bar g = Div_bar(H I + 2 W^a) + tr(W T)^sharp + W^t (tr T)^sharp + tr_M T(., W^a .)",
        "surface",
        _SECOND,
        _ck_theorem_a(4),
        min_order=3,
    ),
    IdentityCheck(
        "prop_B_1",
        "Div(H I + 2 W^a) = Div_bar(H I + 2 W^a) = Grad H + J Grad star_tau (n = 2)",
        "surface",
        _SECOND,
        _ck_prop_b_1,
        min_order=3,
        requires=("n2",),
    ),
    IdentityCheck(
        "prop_B_2",
        "tr(W T)^sharp + W^t (tr T)^sharp = H (tr T)^sharp (n = 2)",
        "surface",
        1e-8,
        _ck_prop_b_2,
        requires=("n2",),
    ),
    IdentityCheck(
        "prop_B_3",
        "tr_M T(., W^a .) = star_tau J (tr T)^sharp (n = 2)",
        "surface",
        1e-8,
        _ck_prop_b_3,
        requires=("n2",),
    ),
    IdentityCheck(
        "theorem_B_1",
        "-phi^{-1} Lap g = Grad H + J Grad star_tau + (H I + star_tau J - W)(tr T)^sharp",
        "surface",
        _SECOND,
        _ck_theorem_b(1),
        min_order=3,
        requires=("n2",),
    ),
    IdentityCheck(
        "theorem_B_2",
        "-phi^{-1} Lap_bar g = Grad H + J Grad star_tau + (H I + star_tau J)(tr T)^sharp",
        "surface",
        _SECOND,
        _ck_theorem_b(2),
        min_order=3,
        requires=("n2",),
    ),
    IdentityCheck(
        "cauchy_riemann_equiv",
        "torsion-free surface: |Lap g| = |phi(Grad H + J Grad star_tau)|, so g is harmonic iff H + i star_tau satisfies the Cauchy-Riemann system",
        "surface",
        _SECOND,
        _ck_cauchy_riemann,
        min_order=3,
        requires=("n2", "torsion_free"),
    ),
    IdentityCheck(
        "hopf_symmetric_part",
        "isothermal torsion-free chart: dbar q = (lambda^2/4) dz(H - i star_tau) for q = (II_11 - II_22 - i(II_12 + II_21))/4",
        "surface",
        _SECOND,
        _ck_hopf,
        min_order=3,
        requires=("n2", "torsion_free", "isothermal"),
    ),
    IdentityCheck(
        "skew_as_star_tau_J",
        "2 W^a = star_tau J (n = 2)",
        "surface",
        _ALG,
        _ck_skew_as_star_tau_j,
        requires=("n2",),
    ),
    IdentityCheck(
        "tsst_weingarten_split",
        "totally skew torsion: W^s = W_bar, W^a = (1/2) T_amb(N, .), H = H_bar, tr(W T)^sharp = tr_M T(., W^t .)",
        "surface",
        1e-8,
        _ck_tsst_split,
        requires=("skew_surface",),
    ),
    IdentityCheck(
        "tsst_divergence",
        "totally skew torsion: Div(2 W^a) = Div_bar(2 W^a) - tr(W^a T)^sharp and Div_bar(2 W^a) = tr_M((nabla_amb T_amb)(N, .))",
        "surface",
        1e-7,
        _ck_tsst_divergence,
        min_order=3,
        requires=("skew_surface",),
    ),
    IdentityCheck(
        "thm_D_grad_H",
        "parallel totally skew torsion: -phi^{-1} Lap g = Grad H, -phi^{-1} Lap ghat = Grad H + |W|^2 N, and the two Laplacian pairs coincide",
        "surface",
        _SECOND,
        _ck_thm_d_grad_h,
        min_order=3,
        requires=("skew_surface", "parallel_skew"),
    ),
    IdentityCheck(
        "thm_D_norm_W",
        "parallel totally skew torsion: |W|^2 = |W_bar|^2 + Ric_LC(N,N)",
        "surface",
        _SECOND,
        _ck_thm_d_norm_w,
        requires=("skew_surface", "parallel_skew"),
    ),
    IdentityCheck(
        "lambda_extraction",
        "T = lambda cross with lambda locally constant, and star_tau = lambda on every surface",
        "surface",
        _FIRST,
        _ck_lambda_extraction,
        requires=("dim3", "skew_surface"),
        takes_target=True,
    ),
    IdentityCheck(
        "sigma_theta_mean_curvature",
        "surface of theta-rotations: H = -cot(theta/2)",
        "surface",
        _SECOND,
        _ck_sigma_mean_curvature,
        requires=("so3",),
        takes_target=True,
    ),
    IdentityCheck(
        "sigma_theta_homothety",
        "surface of theta-rotations: the Gauss map pullback metric is h / (2 (1 - cos theta))",
        "surface",
        _SECOND,
        _ck_sigma_homothety,
        requires=("so3",),
        takes_target=True,
    ),
    IdentityCheck(
        "sigma_theta_harmonic",
        "surface of theta-rotations: the Gauss map is harmonic",
        "surface",
        1e-5,
        _ck_sigma_harmonic,
        min_order=3,
        requires=("so3",),
    ),
]

CHECKS_BY_NAME = {c.name: c for c in CATALOG}
CHECK_NAMES = [c.name for c in CATALOG]


# -- expectation rows ---------------------------------------------------

# so3-sigma expectation keys already covered by the sigma_theta_* rows
_SIGMA_KEYS = {"mean_curvature_const", "gauss_homothety", "gauss_harmonic"}


def _expect_rows(target: Target, state) -> list:
    rows = []
    for key in sorted(target.expectations):
        if target.name == "so3-sigma" and key in _SIGMA_KEYS:
            continue
        exp = target.expectations[key]
        try:
            produced = _expect_row(target, state, key, exp)
        except (ambient.AmbientError, surface.SurfaceError, linalg.LinalgError) as exc:
            # typically a jet-order shortfall; report it instead of aborting
            produced = [
                {
                    "name": f"expect_{key}",
                    "paper_ref": f"scenario expectation: {key}",
                    "points": 0,
                    "max_residual": None,
                    "mean_residual": None,
                    "status": "skipped",
                    "tol": float(exp.get("tol", BASE_TOLERANCE)),
                    "reason": str(exc),
                }
            ]
        rows.extend(produced)
    return rows


def _expect_row(target, state, key, exp):
    tol = float(exp.get("tol", BASE_TOLERANCE))
    anchor = f"scenario expectation: {key}"

    def over_surface(fn, name=None, tol_=None):
        vals = []
        scales = []
        for p in state.surface_points:
            r, sc = fn(p)
            vals.append(float(r))
            scales.append(float(sc))
        return _finish_row(name or f"expect_{key}", anchor, vals, scales, tol_ or tol)

    if key == "mean_curvature_const":
        value = float(exp["value"])
        return [
            over_surface(
                lambda p: (abs(p.surf.H0 - value), max(1.0, abs(value), abs(p.surf.H0)))
            )
        ]
    if key == "star_tau_const":
        value = float(exp["value"])
        return [
            over_surface(
                lambda p: (
                    abs(p.surf.star_tau0 - value),
                    max(1.0, abs(value), abs(p.surf.star_tau0)),
                )
            )
        ]
    if key == "surface_torsion_free":
        return [
            over_surface(
                lambda p: (
                    _tnorm(p.surf.torsion_m0),
                    max(1.0, _tnorm(p.surf.gamma_m0)),
                )
            )
        ]
    if key == "gauss_harmonic":
        return [over_surface(_ck_sigma_harmonic)]
    if key == "gauss_energy_const":
        value = float(exp["value"])
        return [
            over_surface(
                lambda p: (abs(p.lap_ind.dg_norm2 - value), max(abs(value), 1.0))
            )
        ]
    if key == "gauss_homothety":
        return [over_surface(lambda p: _ck_sigma_homothety(p, target))]
    if key == "isothermal":
        return [
            over_surface(lambda p: (surface.isothermal_defect(p.surf), 1.0))
        ]
    if key == "hopf_holomorphic":
        return [
            over_surface(
                lambda p: (
                    surface.hopf_antiholomorphic_derivative(p.surf, _ISOTHERMAL_TOL),
                    max(1.0, _tnorm(p.surf.II0)),
                )
            )
        ]
    if key == "ricci_lc_half_metric":
        return [
            over_surface(
                lambda p: (
                    _tnorm(p.surf.amb.ricci_lc - 0.5 * p.surf.amb.G0),
                    _tnorm(p.surf.amb.G0),
                )
            )
        ]
    if key == "weingarten_split":
        return [over_surface(_ck_tsst_split)]
    if key == "umbilic":
        return [
            over_surface(
                lambda p: (operators.umbilic_defect(p.surf), _tnorm(p.surf.W0))
            )
        ]
    if key == "ambient_skew_scale":
        value = float(exp["value"])
        vals, scales = [], []
        for ap in state.ambient_points:
            f, fit = ambient.skew_torsion_scale(ap.amb)
            vals.append(float(max(fit, abs(f - value))))
            scales.append(float(max(abs(f), _tnorm(ap.amb.torsion0))))
        return [
            _finish_row(f"expect_{key}", f"scenario expectation: {key}", vals, scales, tol)
        ]
    if key == "rotating_plane_formulas":
        return _rotating_plane_rows(target, state, exp)
    return [
        {
            "name": f"expect_{key}",
            "paper_ref": anchor,
            "points": 0,
            "max_residual": None,
            "mean_residual": None,
            "status": "skipped",
            "tol": tol,
            "reason": "no evaluator for this expectation key",
        }
    ]


def _rotating_plane_rows(target, state, exp):
    """Closed forms for the rotating-frame plane z = 0.

    With axis e and angle field theta, on the flat plane the frame gives
    II = [[th_1 e2, -th_1 e1], [th_2 e2, -th_2 e1]], H = th_1 e2 - th_2 e1,
    star_tau = -th_1 e1 - th_2 e2, T_M(d1,d2) = e3 (th_1 d1 + th_2 d2),
    (tr T)^sharp = e3 (th_2 d1 - th_1 d2), and the Gauss-map Laplacian
    splits into a gradient part and a torsion part.
    """
    e = np.asarray(exp["e"], dtype=float)
    tol_alg = float(exp.get("tol", 1e-8))
    expr = dsl.parse_expr(exp["theta"])
    coords = getattr(target.scene, "ambient_coords", ["x", "y", "z"])
    alg_vals, alg_scales = [], []
    lap_vals, lap_scales = [], []
    for p in state.surface_points:
        s = p.surf
        bindings = {name: s.psi[i] for i, name in enumerate(coords)}
        th = dsl.eval_expr(expr, bindings)
        g = jets.gradient(th)
        th1, th2 = float(g[0]), float(g[1])
        th11 = jets.extract_partial(th, [2, 0])
        th12 = jets.extract_partial(th, [1, 1])
        th22 = jets.extract_partial(th, [0, 2])
        II_c = np.array([[th1 * e[1], -th1 * e[0]], [th2 * e[1], -th2 * e[0]]])
        H_c = th1 * e[1] - th2 * e[0]
        st_c = -th1 * e[0] - th2 * e[1]
        T_c = e[2] * np.array([th1, th2])
        trT_c = e[2] * np.array([th2, -th1])
        r = max(
            _tnorm(s.II0 - II_c),
            abs(s.H0 - H_c),
            abs(s.star_tau0 - st_c),
            _tnorm(s.torsion_m0[:, 0, 1] - T_c),
            _tnorm(p.trT_sharp - trT_c),
        )
        alg_vals.append(float(r))
        alg_scales.append(float(max(_tnorm(II_c), 1e-300)))

        J_c = np.array([[0.0, -1.0], [1.0, 0.0]])
        W_c = II_c.T  # h is the identity on the plane
        gradH_c = np.array([th11 * e[1] - th12 * e[0], th12 * e[1] - th22 * e[0]])
        gradst_c = -np.array([th11 * e[0] + th12 * e[1], th12 * e[0] + th22 * e[1]])
        v = gradH_c + J_c @ gradst_c
        v = v + (H_c * np.eye(2) + st_c * J_c - W_c) @ trT_c
        lap_vals.append(float(_enorm(p.lap_ind.lap_sphere + p.push(v))))
        lap_scales.append(float(max(_enorm(p.lap_ind.lap_sphere), _enorm(v))))
    return [
        _finish_row(
            "expect_rotating_plane_formulas",
            "closed forms on the rotating-frame plane: II, H, star_tau, T_M, (tr T)^sharp",
            alg_vals,
            alg_scales,
            tol_alg,
        ),
        _finish_row(
            "expect_rotating_plane_laplacian",
            "closed two-part form of -phi^{-1} Lap g on the rotating-frame plane",
            lap_vals,
            lap_scales,
            1e-7,
        ),
    ]


# -- suite runner -------------------------------------------------------


class _RunState:
    def __init__(self):
        self.surface_points = []
        self.ambient_points = []
        self.errors = []
        self.tol_override = None


def box_grid(box, samples: int):
    axes = [np.linspace(lo, hi, samples) for lo, hi in box]
    return [np.array(p) for p in itertools.product(*axes)]


def surface_grid(scene, grid=None, seed=None):
    names = list(scene.surface_params)
    axes = []
    steps = []
    for name in names:
        lo, hi, samples = scene.domain[name]
        k = int(grid) if grid else int(samples)
        axes.append(np.linspace(lo, hi, k))
        steps.append((hi - lo) / max(k - 1, 1))
    pts = [np.array(p) for p in itertools.product(*axes)]
    if seed is not None:
        rng = np.random.default_rng(int(seed))
        for p in pts:
            for i in range(len(names)):
                p[i] += rng.uniform(-0.3, 0.3) * 0.5 * steps[i]
    return pts


def derive_ambient_box(scene, sgrid):
    pts = []
    for u in sgrid:
        pj = jets.variables(np.asarray(u, dtype=float), len(u), 1)
        vals = [jets.value_of(c) for c in scene.surface_jets(pj)]
        pts.append(vals)
    arr = np.array(pts)
    lo, hi = arr.min(axis=0), arr.max(axis=0)
    pad = 0.1 * (hi - lo) + 0.05
    return [(float(a - c), float(b + c)) for a, b, c in zip(lo, hi, pad)]


def make_scene_target(scene, name: str = "scene") -> Target:
    return Target(name=name, scene=scene, params={}, expectations={}, ambient_box=[])


def _predicate(state: _RunState, target: Target, req: str):
    sp = state.surface_points
    ap = state.ambient_points
    if req == "n2":
        if not sp:
            return False, "no usable surface evaluation points"
        return (sp[0].surf.n == 2), "needs a two-dimensional surface"
    if req == "dim3":
        return (target.scene.dim == 3), "needs a three-dimensional ambient chart"
    if req == "torsion_free":
        ok = all(
            _tnorm(p.surf.torsion_m0)
            <= _TORSION_FREE_TOL * max(1.0, _tnorm(p.surf.gamma_m0))
            for p in sp
        )
        return ok, "the induced surface connection has torsion here"
    if req == "isothermal":
        ok = all(surface.isothermal_defect(p.surf) <= _ISOTHERMAL_TOL for p in sp)
        return ok, "the parametrization is not isothermal"
    if req == "skew_surface":
        ok = bool(sp) and all(p.skew[0] for p in sp)
        return ok, "the ambient torsion is not totally skew"
    if req == "skew_box":
        ok = bool(ap) and all(a.skew[0] for a in ap)
        return ok, "the ambient torsion is not totally skew"
    if req == "parallel_skew":
        ok = all(
            _tnorm(p.surf.amb.nabla_torsion)
            <= _PARALLEL_TOL * max(1.0, _tnorm(p.surf.amb.torsion0))
            for p in sp
        )
        return ok, "the ambient torsion is not parallel"
    if req == "expected_or_detected_skew":
        if "ambient_skew_scale" in target.expectations:
            return True, ""
        ok = bool(ap) and all(a.skew[0] for a in ap)
        return ok, "the ambient torsion is not totally skew"
    if req == "so3":
        return (target.name == "so3-sigma"), "specific to the so3-sigma scenario"
    raise VerifyError(f"unknown predicate {req!r}")


def _finish_row(name, anchor, vals, scales, tol):
    if not vals:
        return {
            "name": name,
            "paper_ref": anchor,
            "points": 0,
            "max_residual": None,
            "mean_residual": None,
            "status": "skipped",
            "tol": float(tol),
            "reason": "no usable evaluation points",
        }
    mx = max(vals)
    mean = sum(vals) / len(vals)
    max_scale = max(scales) if scales else 0.0
    status = "pass" if mx <= tol else "fail"
    row = {
        "name": name,
        "paper_ref": anchor,
        "points": len(vals),
        "max_residual": float(mx),
        "mean_residual": float(mean),
        "status": status,
        "tol": float(tol),
        "max_scale": float(max_scale),
        "max_relative_residual": float(
            max(v / max(s, 1e-300) for v, s in zip(vals, scales))
        ),
    }
    if status == "pass" and max_scale <= tol:
        row["status"] = "vacuous"
        row["reason"] = "both sides of the identity are below tolerance"
    return row


def _run_check(check: IdentityCheck, target: Target, state: _RunState, jet_order: int):
    tol = state.tol_override if state.tol_override is not None else check.tol
    if jet_order < check.min_order:
        return {
            "name": check.name,
            "paper_ref": check.anchor,
            "points": 0,
            "max_residual": None,
            "mean_residual": None,
            "status": "skipped",
            "tol": float(tol),
            "reason": f"needs jet order >= {check.min_order}",
        }
    for req in check.requires:
        ok, reason = _predicate(state, target, req)
        if not ok:
            return {
                "name": check.name,
                "paper_ref": check.anchor,
                "points": 0,
                "max_residual": None,
                "mean_residual": None,
                "status": "skipped",
                "tol": float(tol),
                "reason": reason,
            }
    pts = state.surface_points if check.kind == "surface" else state.ambient_points
    vals, scales = [], []
    for p in pts:
        try:
            if check.takes_target:
                r, sc = check.fn(p, target)
            else:
                r, sc = check.fn(p)
        except (ambient.AmbientError, surface.SurfaceError, linalg.LinalgError) as exc:
            state.errors.append(f"{check.name}: {exc}")
            continue
        vals.append(float(r))
        scales.append(float(sc))
    return _finish_row(check.name, check.anchor, vals, scales, tol)


def run_suite(
    target: Target,
    checks=None,
    jet_order: int = DEFAULT_JET_ORDER,
    tol=None,
    grid=None,
    points=None,
    seed=None,
    perturb_ii=None,
) -> dict:
    """Run the identity suite over a grid and return the report dict."""
    if jet_order < 2 or jet_order > jets.MAX_ORDER:
        raise VerifyError(f"jet order must be in [2, {jets.MAX_ORDER}], got {jet_order}")
    if tol is not None and not tol > 0:
        raise VerifyError(f"tolerance must be positive, got {tol}")
    if grid is not None and int(grid) < 1:
        raise VerifyError(f"grid must be at least 1, got {grid}")
    if checks is not None:
        unknown = [c for c in checks if c not in CHECKS_BY_NAME]
        if unknown:
            raise UnknownCheckError(unknown)
        selected = [c for c in CATALOG if c.name in set(checks)]
    else:
        selected = CATALOG

    state = _RunState()
    state.tol_override = float(tol) if tol is not None else None

    if points is not None:
        sgrid = [np.asarray(p, dtype=float) for p in points]
    else:
        sgrid = surface_grid(target.scene, grid=grid, seed=seed)
    for u in sgrid:
        try:
            state.surface_points.append(
                SurfacePoint(target.scene, u, jet_order, perturb=perturb_ii)
            )
        except (ambient.AmbientError, surface.SurfaceError, linalg.LinalgError) as exc:
            state.errors.append(f"surface point {np.round(u, 6).tolist()}: {exc}")

    box = target.ambient_box or derive_ambient_box(target.scene, sgrid)
    bgrid = box_grid(box, int(grid) if grid else 3)
    for x in bgrid:
        try:
            state.ambient_points.append(AmbientPoint(target.scene, x, jet_order))
        except (ambient.AmbientError, linalg.LinalgError) as exc:
            state.errors.append(f"ambient point {np.round(x, 6).tolist()}: {exc}")

    rows = [_run_check(c, target, state, jet_order) for c in selected]
    if checks is None:
        rows.extend(_expect_rows(target, state))

    report = {
        "scene": target.name,
        "jet_order": int(jet_order),
        "tolerance": float(tol) if tol is not None else BASE_TOLERANCE,
        "laplacian_sign": LAPLACIAN_SIGN,
        "seed": int(seed) if seed is not None else None,
        "checks": rows,
        "eval_errors": list(state.errors),
    }
    if perturb_ii is not None:
        report["perturb_ii"] = float(perturb_ii)
    return report


def suite_failed(report: dict) -> bool:
    return any(row["status"] == "fail" for row in report["checks"])


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def ambient_flatness_max(scene, box, samples: int = 5, jet_order: int = DEFAULT_JET_ORDER):
    """Worst curvature component of the frame connection over a box grid."""
    worst = 0.0
    for x in box_grid(box, samples):
        amb = ambient_eval(scene, x, jet_order)
        worst = max(worst, _tnorm(amb.curv))
    return worst
