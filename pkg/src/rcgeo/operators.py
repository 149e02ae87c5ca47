"""Differential operators over an evaluated surface point.

Everything here consumes a SurfaceEval and produces plain float tensors
in parameter components (index convention: upper index first).  Two
connections are available on the surface: "induced" (tangential part of
the ambient one, possibly with torsion) and "lc" (Levi-Civita of the
induced metric).  The Laplacian is the positive trace of the Hessian,
so on Euclidean space it reduces to sum of second partials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets, linalg
from .ambient import InsufficientOrderError, _curvature_values, _ricci_from_curv
from .surface import SurfaceEval

CONNECTIONS = ("induced", "lc")


def _gamma0(surf: SurfaceEval, connection: str) -> np.ndarray:
    if connection == "induced":
        return surf.gamma_m0
    if connection == "lc":
        return surf.gamma_m_lc0
    raise ValueError(f"unknown connection {connection!r}")


def _gamma_jets(surf: SurfaceEval, connection: str) -> np.ndarray:
    return surf.gamma_m if connection == "induced" else surf.gamma_m_lc


def grad_scalar(surf: SurfaceEval, f) -> np.ndarray:
    """Gradient of a scalar jet, raised with the induced metric."""
    df = jets.gradient(f)
    return surf.hinv0 @ df


def endo_transpose(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    """Metric adjoint of an endomorphism in parameter components."""
    return surf.hinv0 @ A0.T @ surf.h0


def endo_sym(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    return 0.5 * (A0 + endo_transpose(surf, A0))


def endo_skew(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    return 0.5 * (A0 - endo_transpose(surf, A0))


def endo_norm2(surf: SurfaceEval, A0: np.ndarray) -> float:
    """Squared h-norm of an endomorphism, tr(A^t A)."""
    return float(np.trace(endo_transpose(surf, A0) @ A0))


def endo_in_onb(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    """Matrix of an endomorphism in the oriented orthonormal basis."""
    n = surf.n
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = surf.onb0[i] @ surf.h0 @ (A0 @ surf.onb0[j])
    return out


def trace_T_form(surf: SurfaceEval) -> np.ndarray:
    """(tr T)_a = T^b_{ab} as a 1-form."""
    n = surf.n
    return np.array([sum(surf.torsion_m0[b, a, b] for b in range(n)) for a in range(n)])


def trace_T_sharp(surf: SurfaceEval) -> np.ndarray:
    return surf.hinv0 @ trace_T_form(surf)


def tr_AT_sharp(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    """tr(AT)^sharp where (tr(AT))(X) = sum_i <E_i, A T(X, E_i)>."""
    n = surf.n
    form = np.array(
        [
            sum(A0[b, c] * surf.torsion_m0[c, a, b] for b in range(n) for c in range(n))
            for a in range(n)
        ]
    )
    return surf.hinv0 @ form


def tr_M_T(surf: SurfaceEval, A0: np.ndarray) -> np.ndarray:
    """Vector field tr_M T(., A.) = sum_i T(E_i, A E_i)."""
    n = surf.n
    out = np.zeros(n)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                for d in range(n):
                    out[c] += surf.hinv0[a, b] * surf.torsion_m0[c, a, d] * A0[d, b]
    return out


def tr_M_C(surf: SurfaceEval, A0: np.ndarray, B0: np.ndarray) -> np.ndarray:
    """Vector field tr_M C(A., B.) for the surface contorsion."""
    n = surf.n
    out = np.zeros(n)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                for d in range(n):
                    for e in range(n):
                        out[c] += (
                            surf.hinv0[a, b]
                            * surf.contorsion_m0[c, d, e]
                            * A0[d, a]
                            * B0[e, b]
                        )
    return out


def trace_S_sharp(surf: SurfaceEval) -> np.ndarray:
    """(tr S)^sharp for S(X,Y) = T(WX,Y) + T(X,WY)."""
    n = surf.n
    W0 = surf.W0
    form = np.zeros(n)
    for a in range(n):
        for b in range(n):
            for d in range(n):
                form[a] += surf.torsion_m0[b, d, b] * W0[d, a]
                form[a] += surf.torsion_m0[b, a, d] * W0[d, b]
    return surf.hinv0 @ form


def div_endomorphism(surf: SurfaceEval, A, connection: str = "induced") -> np.ndarray:
    """(Div A)^c = h^{ab} ( d_a A^c_b + G^c_{ad} A^d_b - G^d_{ab} A^c_d ).

    A is an (n, n) object array of jets with at least one derivative
    order left; the result is a float vector.
    """
    n = surf.n
    A = np.asarray(A)
    if jets.order_of(A[0, 0]) < 1:
        raise InsufficientOrderError(
            "divergence needs one jet order on the endomorphism; raise jet_order"
        )
    gam = _gamma0(surf, connection)
    A0 = linalg.values(A)
    dA = np.empty((n, n, n))
    for a in range(n):
        for c in range(n):
            for b in range(n):
                dA[a, c, b] = jets.gradient(A[c, b])[a]
    out = np.zeros(n)
    for c in range(n):
        for a in range(n):
            for b in range(n):
                s = dA[a, c, b]
                for d in range(n):
                    s += gam[c, a, d] * A0[d, b] - gam[d, a, b] * A0[c, d]
                out[c] += surf.hinv0[a, b] * s
    return out


def nabla_endomorphism(surf: SurfaceEval, A, connection: str = "induced") -> np.ndarray:
    """(nabla_a A)^c_b as a float tensor [a][c][b]."""
    n = surf.n
    A = np.asarray(A)
    gam = _gamma0(surf, connection)
    A0 = linalg.values(A)
    out = np.empty((n, n, n))
    for a in range(n):
        for c in range(n):
            for b in range(n):
                s = jets.gradient(A[c, b])[a]
                for d in range(n):
                    s += gam[c, a, d] * A0[d, b] - gam[d, a, b] * A0[c, d]
                out[a, c, b] = s
    return out


def m_curvature(surf: SurfaceEval, connection: str = "induced"):
    """Curvature and Ricci of a surface connection, as float tensors."""
    gam = _gamma_jets(surf, connection)
    if jets.order_of(gam[0, 0, 0]) < 1:
        raise InsufficientOrderError("curvature needs one jet order on the connection")
    R = _curvature_values(gam, surf.n)
    return R, _ricci_from_curv(R, surf.n)


def hessian_map(surf: SurfaceEval, F, connection: str = "induced") -> np.ndarray:
    """Hessian [a][b][i] of a map into flat coordinates (jets F[i])."""
    n = surf.n
    F = np.asarray(F)
    dim_t = F.shape[0]
    if jets.order_of(F[0]) < 2:
        raise InsufficientOrderError(
            "Hessian needs two jet orders on the map; raise jet_order"
        )
    gam = _gamma0(surf, connection)
    dF = np.empty((n, dim_t))
    for i in range(dim_t):
        dF[:, i] = jets.gradient(F[i])
    out = np.empty((n, n, dim_t))
    for a in range(n):
        for b in range(n):
            alpha = [0] * n
            alpha[a] += 1
            alpha[b] += 1
            for i in range(dim_t):
                s = jets.extract_partial(F[i], alpha)
                for c in range(n):
                    s -= gam[c, a, b] * dF[c, i]
                out[a, b, i] = s
    return out


@dataclass
class GaussLaplacian:
    connection: str
    dg: np.ndarray  # (n, dim): dg[a] = d_a ghat in frame coefficients
    pullback: np.ndarray  # (n, n): <d_a ghat, d_b ghat>
    dg_norm2: float  # h^{ab} <d_a ghat, d_b ghat>
    lap_hat: np.ndarray  # (dim,): Laplacian of the coefficient map
    lap_sphere: np.ndarray  # (dim,): tangential part along the sphere
    inner: float  # <lap_hat, ghat>
    projection_defect: float  # |<lap_hat, ghat> + dg_norm2|


def gauss_laplacian(surf: SurfaceEval, connection: str = "induced") -> GaussLaplacian:
    """Laplacian of the Gauss map, as a sphere map and as a flat map."""
    n = surf.n
    hess = hessian_map(surf, surf.ghat, connection)
    dim = surf.dim
    dg = np.empty((n, dim))
    for i in range(dim):
        dg[:, i] = jets.gradient(surf.ghat[i])
    pullback = dg @ dg.T
    dg_norm2 = float(np.sum(surf.hinv0 * pullback))
    lap_hat = np.zeros(dim)
    for a in range(n):
        for b in range(n):
            lap_hat += surf.hinv0[a, b] * hess[a, b]
    g0 = surf.ghat0
    inner = float(lap_hat @ g0)
    lap_sphere = lap_hat - inner * g0
    return GaussLaplacian(
        connection=connection,
        dg=dg,
        pullback=pullback,
        dg_norm2=dg_norm2,
        lap_hat=lap_hat,
        lap_sphere=lap_sphere,
        inner=inner,
        projection_defect=abs(inner + dg_norm2),
    )


def phi_push(surf: SurfaceEval, X_param) -> np.ndarray:
    """Frame coefficients of a tangent vector given in parameter components."""
    X_param = np.asarray(X_param, dtype=float)
    chart = surf.t0 @ X_param
    return surf.amb.eps0 @ chart


def phi_pull(surf: SurfaceEval, xi_frame, tol: float = 1e-8) -> np.ndarray:
    """Parameter components of a frame-coefficient vector tangent to M.

    Raises if the vector has a normal component beyond tol (relative).
    """
    xi_frame = np.asarray(xi_frame, dtype=float)
    chart = surf.amb.F0 @ xi_frame
    coeffs = linalg.values(surf.basis_inv) @ chart
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if abs(coeffs[surf.n]) > tol * scale:
        raise ValueError(
            f"vector is not tangent: normal coefficient {coeffs[surf.n]:.3e}"
        )
    return coeffs[: surf.n]


def ambient_to_frame(surf: SurfaceEval, v_chart) -> np.ndarray:
    return surf.amb.eps0 @ np.asarray(v_chart, dtype=float)


@dataclass
class WeingartenFamily:
    W: np.ndarray
    Wt: np.ndarray
    Ws: np.ndarray
    Wa: np.ndarray
    Wbar: np.ndarray  # Weingarten of the ambient Levi-Civita connection
    norm2: float  # |W|^2
    norm2_bar: float  # |Wbar|^2
    H: float
    Hbar: float


def weingarten_family(surf: SurfaceEval) -> WeingartenFamily:
    W0 = surf.W0
    Wt = endo_transpose(surf, W0)
    return WeingartenFamily(
        W=W0,
        Wt=Wt,
        Ws=0.5 * (W0 + Wt),
        Wa=0.5 * (W0 - Wt),
        Wbar=surf.W_lc0,
        norm2=endo_norm2(surf, W0),
        norm2_bar=endo_norm2(surf, surf.W_lc0),
        H=surf.H0,
        Hbar=surf.H_lc0,
    )


def umbilic_defect(surf: SurfaceEval) -> float:
    """h-norm of W - (H I + (star tau) J) / 2 (n = 2 only)."""
    if surf.n != 2:
        raise ValueError("umbilic defect is a surface (n = 2) quantity")
    target = 0.5 * (surf.H0 * np.eye(2) + surf.star_tau0 * surf.J0)
    return math.sqrt(endo_norm2(surf, surf.W0 - target))


def energy_density(surf: SurfaceEval, connection: str = "induced") -> float:
    return 0.5 * gauss_laplacian(surf, connection).dg_norm2
