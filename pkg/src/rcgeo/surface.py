"""Hypersurface evaluation: tangents, normal, Weingarten data, Gauss map.

A surface is an immersion psi from n parameters into an (n+1)-chart
carrying a moving frame.  All surface fields are jets in the parameters
(composition happens by evaluating the frame expressions on psi-jets),
so parameter derivatives of every derived field come out of jet
coefficients rather than finite differences.

Conventions fixed here and relied on everywhere downstream:

* II(X, Y) is the normal component of the ambient derivative of Y along
  X; its first index is the differentiation direction.
* W is the endomorphism with <W X, Y> = II(X, Y), so as a matrix
  W[c][a] = h^{cb} II[a][b].
* tau(X, Y) = II(X, Y) - II(Y, X) is the normal part of ambient
  torsion along the surface.
* The normal is oriented so that (N, t_1 .. t_n) is positively oriented
  with respect to the ambient frame, then multiplied by the scene's
  orient sign.  The surface orientation used for the rotation J and for
  star_tau is the one induced by N.
* The Gauss map value ghat is the frame coefficient vector eps * N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import jets, linalg
from .ambient import AmbientEval, ambient_eval

_RANK_TOL = 1e-12


class SurfaceError(ValueError):
    pass


class RankDeficientError(SurfaceError):
    """The parameter tangents fail to be linearly independent."""


class OrientationDegenerateError(SurfaceError):
    pass


@dataclass
class SurfaceEval:
    params: np.ndarray  # (n,)
    n: int
    dim: int
    order: int
    orient: float
    amb: AmbientEval  # ambient structure at psi(params)

    psi: np.ndarray  # (dim,) jets in the parameters
    t: np.ndarray  # (dim, n) jets, t[c][a] = d_a psi^c
    F_s: np.ndarray  # frame along the surface, (dim, dim) jets
    eps_s: np.ndarray
    G_s: np.ndarray
    N: np.ndarray  # (dim,) jets, unit normal chart components
    ghat: np.ndarray  # (dim,) jets, Gauss map in frame coefficients
    h: np.ndarray  # (n, n) jets, induced metric
    hinv: np.ndarray
    II: np.ndarray  # (n, n) jets
    W: np.ndarray  # (n, n) jets, W[c][a] = W^c_a
    H: object  # jet, trace of W
    tau: np.ndarray  # (n, n) jets
    gamma_m: np.ndarray  # (n, n, n) jets, induced connection
    gamma_m_lc: np.ndarray  # Levi-Civita of h
    torsion_m: np.ndarray  # (n, n, n) jets
    contorsion_m: np.ndarray
    onb: list  # n h-orthonormal parameter-component vectors (jets)
    J: np.ndarray  # (n, n) jets or None (n == 2 only)
    star_tau: object  # jet or None
    basis_inv: np.ndarray  # inverse of [t_1 .. t_n N] (jets)

    II_lc: np.ndarray  # (n, n) floats: ambient Levi-Civita version
    W_lc0: np.ndarray
    H_lc0: float
    d2psi: np.ndarray  # (n, n, dim) floats

    # value views
    psi0: np.ndarray = None
    t0: np.ndarray = None
    N0: np.ndarray = None
    ghat0: np.ndarray = None
    h0: np.ndarray = None
    hinv0: np.ndarray = None
    II0: np.ndarray = None
    W0: np.ndarray = None
    H0: float = 0.0
    Ke0: float = 0.0
    tau0: np.ndarray = None
    gamma_m0: np.ndarray = None
    gamma_m_lc0: np.ndarray = None
    torsion_m0: np.ndarray = None
    contorsion_m0: np.ndarray = None
    onb0: np.ndarray = None
    J0: np.ndarray = None
    star_tau0: float = None


def _fill_values(s: SurfaceEval) -> SurfaceEval:
    s.psi0 = linalg.values(s.psi)
    s.t0 = linalg.values(s.t)
    s.N0 = linalg.values(s.N)
    s.ghat0 = linalg.values(s.ghat)
    s.h0 = linalg.values(s.h)
    s.hinv0 = linalg.values(s.hinv)
    s.II0 = linalg.values(s.II)
    s.W0 = linalg.values(s.W)
    s.H0 = jets.value_of(s.H)
    s.Ke0 = float(np.linalg.det(s.W0))
    s.tau0 = linalg.values(s.tau)
    s.gamma_m0 = linalg.values(s.gamma_m)
    s.gamma_m_lc0 = linalg.values(s.gamma_m_lc)
    s.torsion_m0 = linalg.values(s.torsion_m)
    s.contorsion_m0 = linalg.values(s.contorsion_m)
    s.onb0 = np.array([linalg.values(e) for e in s.onb])
    s.J0 = linalg.values(s.J) if s.J is not None else None
    s.star_tau0 = jets.value_of(s.star_tau) if s.star_tau is not None else None
    return s


def _derive_from_ii(II, hinv, n):
    """Weingarten matrix, mean curvature, and torsion 2-form from II."""
    W = np.empty((n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            s = None
            for b in range(n):
                term = hinv[c, b] * II[a, b]
                s = term if s is None else s + term
            W[c, a] = s
    H = W[0, 0]
    for a in range(1, n):
        H = H + W[a, a]
    tau = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            tau[a, b] = II[a, b] - II[b, a]
    return W, H, tau


def _star_tau_and_J(tau, h, hinv, onb, n):
    if n != 2:
        return None, None
    e1, e2 = onb
    he1 = linalg.mat_vec(h, e1)
    he2 = linalg.mat_vec(h, e2)
    J = np.empty((2, 2), dtype=object)
    for a in range(2):
        for b in range(2):
            J[a, b] = e2[a] * he1[b] - e1[a] * he2[b]
    st = None
    for a in range(2):
        for b in range(2):
            term = e1[a] * e2[b] * tau[a, b]
            st = term if st is None else st + term
    return st, J


def surface_eval(
    scene,
    u,
    jet_order: int = jets.DEFAULT_ORDER,
    ambient_evaluator=ambient_eval,
) -> SurfaceEval:
    """Evaluate all surface fields at parameter point u."""
    if jet_order < 2:
        raise SurfaceError(f"surface evaluation needs jet order >= 2, got {jet_order}")
    dim = scene.dim
    n = dim - 1
    u = np.asarray(u, dtype=float)
    if u.shape != (n,):
        raise SurfaceError(f"parameter point has shape {u.shape}, expected ({n},)")

    pjets = jets.variables(u, n, jet_order)
    psi = np.array(scene.surface_jets(pjets), dtype=object)
    if psi.shape != (dim,):
        raise SurfaceError(f"surface map returned {psi.shape[0]} components, need {dim}")
    x0 = linalg.values(psi)
    amb = ambient_evaluator(scene, x0, jet_order)

    t = np.empty((dim, n), dtype=object)
    for c in range(dim):
        for a in range(n):
            t[c, a] = jets.partial(psi[c], a)

    F_s = scene.frame_jets(list(psi))
    try:
        eps_s = linalg.lu_invert(F_s)
    except linalg.SingularMatrixError as exc:
        raise SurfaceError(f"frame singular along surface at u={u.tolist()}: {exc}") from exc
    G_s = linalg.mat_mul(eps_s.T, eps_s)

    h = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            s = None
            for c in range(dim):
                for d in range(dim):
                    term = t[c, a] * G_s[c, d] * t[d, b]
                    s = term if s is None else s + term
            h[a, b] = s
    h0 = linalg.values(h)
    scale = max(1.0, float(np.max(np.abs(h0))))
    if abs(np.linalg.det(h0)) <= _RANK_TOL * scale**n:
        raise RankDeficientError(
            f"immersion rank-deficient at u={u.tolist()}: det h = {np.linalg.det(h0):.3e}"
        )
    hinv = linalg.lu_invert(h)

    # normal: G-orthogonal complement of the tangents by cofactor
    # expansion, oriented against the ambient frame, then normalized
    B = np.empty((n, dim), dtype=object)
    for a in range(n):
        Gt = linalg.mat_vec(G_s, t[:, a])
        for c in range(dim):
            B[a, c] = Gt[c]
    N_raw = np.empty(dim, dtype=object)
    cols = list(range(dim))
    for c in range(dim):
        minor = B[:, cols[:c] + cols[c + 1 :]]
        d = linalg.det(minor) if n > 0 else 1.0
        N_raw[c] = d if c % 2 == 0 else -d
    eps0 = amb.eps0
    frame_cols = np.empty((dim, dim))
    frame_cols[:, 0] = eps0 @ linalg.values(N_raw)
    t0 = linalg.values(t)
    for a in range(n):
        frame_cols[:, a + 1] = eps0 @ t0[:, a]
    det_o = float(np.linalg.det(frame_cols))
    if abs(det_o) <= 1e-14 * max(1.0, float(np.max(np.abs(frame_cols))) ** dim):
        raise OrientationDegenerateError(
            f"orientation determinant degenerate at u={u.tolist()}"
        )
    sign = 1.0 if det_o > 0 else -1.0
    nrm2 = linalg.dot(linalg.mat_vec(G_s, N_raw), N_raw)
    N = np.array(
        [N_raw[c] * (sign * float(scene.orient)) / jets.sqrt(nrm2) for c in range(dim)],
        dtype=object,
    )

    ghat = linalg.mat_vec(eps_s, N)

    # ambient derivative of t_b along t_a through the frame: the frame
    # is parallel, so D_X Y = F * X(eps Y); X(.) is d_a of the
    # parameter representation
    V = np.empty((n, n, dim), dtype=object)
    for b in range(n):
        w = linalg.mat_vec(eps_s, t[:, b])
        for a in range(n):
            dw = np.array([jets.partial(w[i], a) for i in range(dim)], dtype=object)
            Fv = linalg.mat_vec(F_s, dw)
            for c in range(dim):
                V[a, b, c] = Fv[c]

    basis = np.empty((dim, dim), dtype=object)
    for a in range(n):
        for c in range(dim):
            basis[c, a] = t[c, a]
    for c in range(dim):
        basis[c, n] = N[c]
    basis_inv = linalg.lu_invert(basis)

    gamma_m = np.empty((n, n, n), dtype=object)
    II = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            coeffs = linalg.mat_vec(basis_inv, V[a, b])
            for c in range(n):
                gamma_m[c, a, b] = coeffs[c]
            II[a, b] = coeffs[n]

    W, H, tau = _derive_from_ii(II, hinv, n)

    dh = np.empty((n, n, n), dtype=object)
    for a in range(n):
        for d in range(n):
            for b in range(n):
                dh[a, d, b] = jets.partial(h[d, b], a)
    gamma_m_lc = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                s = None
                for d in range(n):
                    term = hinv[c, d] * (dh[a, d, b] + dh[b, d, a] - dh[d, a, b])
                    s = term if s is None else s + term
                gamma_m_lc[c, a, b] = s * 0.5

    torsion_m = np.empty((n, n, n), dtype=object)
    contorsion_m = np.empty((n, n, n), dtype=object)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                torsion_m[c, a, b] = gamma_m[c, a, b] - gamma_m[c, b, a]
                contorsion_m[c, a, b] = gamma_m[c, a, b] - gamma_m_lc[c, a, b]

    coord_vecs = [
        np.array([1.0 if i == a else 0.0 for i in range(n)], dtype=object)
        for a in range(n)
    ]
    try:
        onb = linalg.oriented_gram_schmidt(coord_vecs, h)
    except linalg.DependentVectorsError as exc:
        raise RankDeficientError(str(exc)) from exc
    if scene.orient < 0 and n >= 1:
        # N was flipped relative to the parametrization, so the induced
        # orientation of the parameter basis flips too
        onb[-1] = np.array([-e for e in onb[-1]], dtype=object)

    star_tau, J = _star_tau_and_J(tau, h, hinv, onb, n)

    # ambient Levi-Civita second fundamental form at value level
    d2psi = np.empty((n, n, dim))
    for a in range(n):
        for b in range(n):
            for c in range(dim):
                alpha = [0] * n
                alpha[a] += 1
                alpha[b] += 1
                d2psi[a, b, c] = jets.extract_partial(psi[c], alpha)
    N0 = linalg.values(N)
    II_lc = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            v = d2psi[a, b].copy()
            for c in range(dim):
                for d in range(dim):
                    for e in range(dim):
                        v[c] += amb.gamma_lc0[c, d, e] * t0[d, a] * t0[e, b]
            II_lc[a, b] = N0 @ amb.G0 @ v
    hinv0 = linalg.values(hinv)
    W_lc0 = np.empty((n, n))
    for c in range(n):
        for a in range(n):
            W_lc0[c, a] = sum(hinv0[c, b] * II_lc[a, b] for b in range(n))
    H_lc0 = float(np.trace(W_lc0))

    s = SurfaceEval(
        params=u,
        n=n,
        dim=dim,
        order=jet_order,
        orient=float(scene.orient),
        amb=amb,
        psi=psi,
        t=t,
        F_s=F_s,
        eps_s=eps_s,
        G_s=G_s,
        N=N,
        ghat=ghat,
        h=h,
        hinv=hinv,
        II=II,
        W=W,
        H=H,
        tau=tau,
        gamma_m=gamma_m,
        gamma_m_lc=gamma_m_lc,
        torsion_m=torsion_m,
        contorsion_m=contorsion_m,
        onb=onb,
        J=J,
        star_tau=star_tau,
        basis_inv=basis_inv,
        II_lc=II_lc,
        W_lc0=W_lc0,
        H_lc0=H_lc0,
        d2psi=d2psi,
    )
    return _fill_values(s)


def with_perturbed_ii(s: SurfaceEval, pair=(0, 1), eps: float = 1e-3) -> SurfaceEval:
    """Copy of a surface evaluation with one II entry shifted.

    Only the fields derived from II (W, H, tau, star_tau and their value
    views) are recomputed; the Gauss map and metric are untouched.  This
    deliberately produces an inconsistent state for negative-control
    testing of identity checks.
    """
    a, b = pair
    II = s.II.copy()
    II[a, b] = II[a, b] + eps
    W, H, tau = _derive_from_ii(II, s.hinv, s.n)
    star_tau, _ = _star_tau_and_J(tau, s.h, s.hinv, s.onb, s.n)
    out = replace(s, II=II, W=W, H=H, tau=tau, star_tau=star_tau)
    return _fill_values(out)


def tangent_decompose(s: SurfaceEval, v0: np.ndarray):
    """Split a chart vector (floats) into tangent + normal coefficients.

    Returns (a, mu) with v = sum a[i] t_i + mu N at value level.
    """
    Binv0 = linalg.values(s.basis_inv)
    coeffs = Binv0 @ np.asarray(v0, dtype=float)
    return coeffs[: s.n], float(coeffs[s.n])


def isothermal_defect(s: SurfaceEval) -> float:
    """How far the parametrization is from isothermal at this point."""
    if s.n != 2:
        raise SurfaceError("isothermal parametrizations need n = 2")
    scale = max(abs(s.h0[0, 0]), abs(s.h0[1, 1]), 1e-300)
    return max(abs(s.h0[0, 0] - s.h0[1, 1]), abs(s.h0[0, 1]), abs(s.h0[1, 0])) / scale


class NonIsothermalError(SurfaceError):
    pass


def hopf_coefficient(s: SurfaceEval, tol: float = 1e-8):
    """Hopf-form coefficient in an isothermal parametrization.

    Returns a pair of jets (real part, imaginary part) of
    (II_11 - II_22 - i (II_12 + II_21)) / 4.  Only the symmetric part
    of II enters the imaginary component.  Raises when the chart is not
    isothermal to within tol.
    """
    defect = isothermal_defect(s)
    if defect > tol:
        raise NonIsothermalError(
            f"parametrization not isothermal: relative defect {defect:.3e}"
        )
    re = (s.II[0, 0] - s.II[1, 1]) * 0.25
    im = (s.II[0, 1] + s.II[1, 0]) * (-0.25)
    return re, im


def hopf_antiholomorphic_derivative(s: SurfaceEval, tol: float = 1e-8):
    """|d/dzbar of the Hopf coefficient| from jet first derivatives."""
    re, im = hopf_coefficient(s, tol)
    dre = jets.gradient(re)
    dim_ = jets.gradient(im)
    real = 0.5 * (dre[0] - dim_[1])
    imag = 0.5 * (dim_[0] + dre[1])
    return math.hypot(real, imag)
