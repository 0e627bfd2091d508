"""Order-3 jets of parametric hypersurfaces and their adapted frames.

A hypersurface is a chart ``U subset R^(n-1) -> R^n``.  `evaluate_jet`
collects position and all partial derivatives through order three, either
from an analytic jet callback or by central finite differences, and attaches
an orthonormal tangent frame ``e_1..e_(n-1)`` (Gram-Schmidt on the chart
derivatives, in order) plus the unit normal ``nu`` completing a positively
oriented basis of R^n.

`fundamental_forms` expresses the metric (identity, by construction) and the
second fundamental form in that frame; `gauge_frame` lifts the frame into the
sphere model, producing the moving frame used by the downstream tensor
calculus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular

from .config import DEFAULT_TOLERANCES, Tolerances
from .conformal import PolyVector, form_matrix
from .errors import DomainError, FrameConsistencyError, ImmersionError

__all__ = [
    "ParametricSurface",
    "SurfaceJet",
    "ConformalFrame",
    "evaluate_jet",
    "fundamental_forms",
    "gauge_frame",
    "frame_gram_target",
]

# Default steps for the finite-difference provider, relative to domain scale.
FD_STEP = 1.0e-4
FD_STEP3 = 1.0e-3
_RANK_TOL = 1.0e-8


@dataclass(frozen=True)
class ParametricSurface:
    """Chart of an (n-1)-dimensional hypersurface in R^n.

    Parameters
    ----------
    dim_n:
        Ambient dimension n (the chart has n - 1 parameters).
    chart:
        Vectorized map; accepts parameter arrays of shape (n-1,) or
        (m, n-1) and returns points of shape (n,) or (m, n).
    jet:
        Optional analytic jet callback ``u -> (p, d1, d2, d3)`` with
        shapes (n,), (n-1, n), (n-1, n-1, n), (n-1, n-1, n-1, n).
        When absent, derivatives come from central differences of `chart`.
    d2:
        Optional analytic second-derivative callback ``u -> (n-1, n-1, n)``;
        used to sharpen finite-difference third derivatives.
    domain:
        (n-1, 2) parameter box, used for the default step scale and by
        samplers.
    """

    dim_n: int
    chart: Callable[[np.ndarray], np.ndarray]
    jet: Callable[[np.ndarray], tuple] | None = None
    d2: Callable[[np.ndarray], np.ndarray] | None = None
    domain: np.ndarray | None = None
    name: str = ""
    fd_step: float | None = None
    fd_step3: float | None = None

    def __post_init__(self):
        if self.dim_n < 3:
            raise DomainError("hypersurface analysis needs ambient dimension n >= 3")
        if self.domain is not None:
            dom = np.asarray(self.domain, dtype=float).reshape(self.dim_n - 1, 2)
            dom.setflags(write=False)
            object.__setattr__(self, "domain", dom)

    @property
    def n_params(self) -> int:
        return self.dim_n - 1

    def domain_scale(self) -> float:
        if self.domain is None:
            return 1.0
        widths = self.domain[:, 1] - self.domain[:, 0]
        scale = float(np.max(np.abs(widths)))
        return scale if scale > 0 else 1.0

    def without_analytic_jet(self) -> "ParametricSurface":
        """Copy of this surface forced onto the finite-difference path."""
        return ParametricSurface(
            dim_n=self.dim_n,
            chart=self.chart,
            jet=None,
            d2=self.d2,
            domain=self.domain,
            name=self.name + "(fd)" if self.name else "(fd)",
            fd_step=self.fd_step,
            fd_step3=self.fd_step3,
        )

    def sample_grid(self, counts) -> np.ndarray:
        """Regular grid over the domain box, shape (prod(counts), n-1)."""
        if self.domain is None:
            raise DomainError("surface has no domain box to sample")
        counts = np.broadcast_to(np.asarray(counts, dtype=int), (self.n_params,))
        axes = [
            np.linspace(lo, hi, int(k), endpoint=False) + 0.5 * (hi - lo) / int(k)
            for (lo, hi), k in zip(self.domain, counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)


@dataclass(frozen=True)
class SurfaceJet:
    """Position, derivatives through order 3, and the adapted frame at u."""

    u: np.ndarray
    p: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    e: np.ndarray        # (n-1, n) orthonormal tangent rows
    nu: np.ndarray       # (n,) unit normal, positively oriented closure
    basis_change: np.ndarray = field(repr=False, default=None)  # (n-1, n-1) W with e = W @ d1

    @property
    def dim_n(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class ConformalFrame:
    """Moving frame of the sphere model attached to a surface point.

    ``a0`` is the lifted point, ``tangent`` the n-1 hyperplane lifts dual to
    the tangent frame, ``an`` the tangent hyperplane lift, and ``a_inf`` the
    improper point.  The scalar products of the frame reproduce
    `frame_gram_target` up to the verified residual.
    """

    a0: PolyVector
    tangent: tuple[PolyVector, ...]
    an: PolyVector
    a_inf: PolyVector
    residual: float

    def vectors(self) -> list[PolyVector]:
        return [self.a0, *self.tangent, self.an, self.a_inf]


def frame_gram_target(dim_n: int) -> np.ndarray:
    """Expected Gram matrix of a conformal frame (ordering a0, a_i, a_n, a_inf)."""
    size = dim_n + 2
    g = np.eye(size)
    g[0, 0] = g[-1, -1] = 0.0
    g[0, -1] = g[-1, 0] = -1.0
    return g


def _as_point(chart, u) -> np.ndarray:
    out = np.asarray(chart(np.asarray(u, dtype=float)), dtype=float)
    return out.reshape(-1)


def _fd_d1(chart, u, h, n, k):
    d1 = np.empty((k, n))
    for a in range(k):
        step = np.zeros(k)
        step[a] = h
        d1[a] = (_as_point(chart, u + step) - _as_point(chart, u - step)) / (2 * h)
    return d1


def _fd_d2(chart, u, h, n, k):
    p0 = _as_point(chart, u)
    d2 = np.empty((k, k, n))
    for a in range(k):
        ea = np.zeros(k)
        ea[a] = h
        d2[a, a] = (_as_point(chart, u + ea) - 2 * p0 + _as_point(chart, u - ea)) / (h * h)
        for b in range(a + 1, k):
            eb = np.zeros(k)
            eb[b] = h
            val = (
                _as_point(chart, u + ea + eb)
                - _as_point(chart, u + ea - eb)
                - _as_point(chart, u - ea + eb)
                + _as_point(chart, u - ea - eb)
            ) / (4 * h * h)
            d2[a, b] = val
            d2[b, a] = val
    return d2


def _symmetrize3(d3: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(d3)
    for perm in permutations(range(3)):
        acc += np.transpose(d3, perm + (3,))
    return acc / 6.0


def _fd_jet(surface: ParametricSurface, u: np.ndarray):
    n = surface.dim_n
    k = surface.n_params
    scale = surface.domain_scale()
    h = (surface.fd_step or FD_STEP) * scale
    analytic_d2 = surface.d2

    p = _as_point(surface.chart, u)
    d1 = _fd_d1(surface.chart, u, h, n, k)

    if analytic_d2 is not None:
        d2_at = lambda v: np.asarray(analytic_d2(v), dtype=float).reshape(k, k, n)
        h3 = (surface.fd_step3 or surface.fd_step or FD_STEP) * scale
    else:
        d2_at = lambda v: _fd_d2(surface.chart, v, h, n, k)
        h3 = (surface.fd_step3 or FD_STEP3) * scale

    d2 = d2_at(u)
    d3 = np.empty((k, k, k, n))
    for c in range(k):
        ec = np.zeros(k)
        ec[c] = h3
        d3[:, :, c] = (d2_at(u + ec) - d2_at(u - ec)) / (2 * h3)
    return p, d1, d2, _symmetrize3(d3)


def _generalized_cross(e: np.ndarray) -> np.ndarray:
    """Vector v with det[e_1; ...; e_(n-1); w] = v . w for all w."""
    k, n = e.shape
    v = np.empty(n)
    cols = np.arange(n)
    for j in range(n):
        minor = e[:, cols != j]
        v[j] = (-1.0) ** (n + j + 1) * np.linalg.det(minor)
    return v


def _orthonormal_frame(d1: np.ndarray):
    """Gram-Schmidt rows of d1 plus the normal; raises on rank deficiency."""
    k, n = d1.shape
    q, r = np.linalg.qr(d1.T)
    diag = np.diag(r).copy()
    smallest = np.min(np.abs(diag))
    largest = np.max(np.abs(diag))
    if largest == 0.0 or smallest < _RANK_TOL * largest:
        raise ImmersionError(
            f"chart derivative is rank-deficient (singular ratio {smallest:.3e} / {largest:.3e})"
        )
    signs = np.where(diag >= 0.0, 1.0, -1.0)
    q = q * signs
    r = r * signs[:, None]
    e = q.T  # rows orthonormal, e = W @ d1 with W = inv(R^T)
    w = solve_triangular(r.T, np.eye(k), lower=True)
    nu = _generalized_cross(e)
    nu = nu / np.linalg.norm(nu)
    return e, nu, w


def evaluate_jet(surface: ParametricSurface, u) -> SurfaceJet:
    """Position, derivatives through order 3, and the adapted frame at ``u``.

    Uses the analytic jet callback when the surface carries one, otherwise
    second-order central differences (third derivatives by nested differencing
    of the analytic-or-numeric second derivatives).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != surface.n_params:
        raise DomainError(
            f"chart of {surface.dim_n}-dimensional ambient space expects "
            f"{surface.n_params} parameters, got {u.size}"
        )
    if surface.domain is not None:
        lo, hi = surface.domain[:, 0], surface.domain[:, 1]
        pad = 1e-9 * np.maximum(hi - lo, 1.0)
        if np.any(u < lo - pad) or np.any(u > hi + pad):
            raise DomainError(f"parameter {u.tolist()} outside the domain box")

    if surface.jet is not None:
        p, d1, d2, d3 = surface.jet(u)
        k, n = surface.n_params, surface.dim_n
        p = np.asarray(p, dtype=float).reshape(n)
        d1 = np.asarray(d1, dtype=float).reshape(k, n)
        d2 = np.asarray(d2, dtype=float).reshape(k, k, n)
        d3 = np.asarray(d3, dtype=float).reshape(k, k, k, n)
    else:
        p, d1, d2, d3 = _fd_jet(surface, u)

    e, nu, w = _orthonormal_frame(d1)
    return SurfaceJet(u=u, p=p, d1=d1, d2=d2, d3=d3, e=e, nu=nu, basis_change=w)


def fundamental_forms(jet: SurfaceJet) -> tuple[np.ndarray, np.ndarray]:
    """Metric and second fundamental form in the orthonormal tangent frame.

    The metric is the identity by construction.  The shape components are
    ``h_ij = nu . (d^2 p)(e_i, e_j)``, obtained from the parameter-space
    second derivatives by the Gram-Schmidt change of basis.
    """
    w = jet.basis_change
    b_param = jet.d2 @ jet.nu  # (k, k) = nu . p_{,ab}
    h = w @ b_param @ w.T
    h = 0.5 * (h + h.T)
    g = np.eye(h.shape[0])
    return g, h


def shape_derivative(jet: SurfaceJet) -> np.ndarray:
    """Covariant derivative of the shape tensor in the orthonormal frame.

    Computed in parameter coordinates from the order-3 jet,

        D_c b_ab = nu . p_{,abc} - b_c^d (p_{,d} . p_{,ab})
                   - Gamma^d_{ca} b_db - Gamma^d_{cb} b_ad,

    then pushed into the frame.  Flat ambient space makes the result totally
    symmetric; the residual from exact symmetry is a numerical health check.
    """
    j = jet.d1
    w = jet.basis_change
    g = j @ j.T
    ginv = np.linalg.inv(g)
    b = jet.d2 @ jet.nu                       # b_ab
    gam_low = np.einsum("abm,dm->abd", jet.d2, j)   # p_{,ab} . p_{,d}
    gam = np.einsum("ed,abd->abe", ginv, gam_low)    # Gamma^e_ab
    b_mixed = ginv @ b                        # b^d_c indexed [d, c]

    db = np.einsum("abcm,m->abc", jet.d3, jet.nu)
    db -= np.einsum("dc,abd->abc", b_mixed, gam_low)
    nabla = db - np.einsum("cad,db->abc", gam, b) - np.einsum("cbd,ad->abc", gam, b)
    return np.einsum("ia,jb,kc,abc->ijk", w, w, w, nabla)


def gauge_frame(
    jet: SurfaceJet, tolerances: Tolerances | None = None
) -> ConformalFrame:
    """Lift the adapted Euclidean frame into the sphere model.

    Produces ``A_0 = (1, p, |p|^2/2)``, tangent hyperplane lifts
    ``A_i = (0, e_i, p . e_i)``, the tangent-plane lift
    ``A_n = (0, nu, p . nu)`` and the improper point ``(0, ..., 0, 1)``.
    The full Gram matrix is verified against its target before returning.
    """
    tol = tolerances or DEFAULT_TOLERANCES
    n = jet.dim_n
    p = jet.p

    a0 = np.concatenate(([1.0], p, [0.5 * float(p @ p)]))
    mids = [np.concatenate(([0.0], e_i, [float(p @ e_i)])) for e_i in jet.e]
    an = np.concatenate(([0.0], jet.nu, [float(p @ jet.nu)]))
    ainf = np.zeros(n + 2)
    ainf[-1] = 1.0

    basis = np.stack([a0, *mids, an, ainf])
    gram = basis @ form_matrix(n) @ basis.T
    residual = float(np.max(np.abs(gram - frame_gram_target(n))))
    if residual > tol.frame_residual * max(1.0, float(p @ p)):
        raise FrameConsistencyError(
            f"conformal frame violates its scalar-product relations (residual {residual:.3e})"
        )
    return ConformalFrame(
        a0=PolyVector(a0, n),
        tangent=tuple(PolyVector(m, n) for m in mids),
        an=PolyVector(an, n),
        a_inf=PolyVector(ainf, n),
        residual=residual,
    )
