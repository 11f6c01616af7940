"""Charts and metric computations on M = M0 × (N ⋊ A).

A point is stored as ``(m0, u, h)``: the flat coordinate, exponential
coordinates of the first kind on N, and coordinates on A. It represents
``(m0, exp_N(u) exp_A(h))``. Every tangent vector is left-trivialized, so
all norms are evaluated with the gram matrix at the identity.

The only geodesics used are the normal ones ``t -> n exp(tH)``; the
cylinder map ``phi(t, (m0, u, h)) = (m0, u, t h)`` moves along them.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import bernoulli

from .errors import GeometryError

DEGENERATE_TOL = 1e-12
FRAME_TOL = 1e-8


@dataclass(eq=False)
class GroupPoint:
    m0: np.ndarray
    u: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.m0 = np.asarray(self.m0, dtype=float).reshape(-1)
        self.u = np.asarray(self.u, dtype=float).reshape(-1)
        self.h = np.asarray(self.h, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(self.m0)) and np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.h))):
            raise GeometryError("non-finite coordinates", code="NON_FINITE")

    @classmethod
    def identity(cls, spec):
        dm0, dn, da = spec.layout
        return cls(np.zeros(dm0), np.zeros(dn), np.zeros(da))

    @classmethod
    def from_coords(cls, spec, coords):
        dm0, dn, _ = spec.layout
        coords = np.asarray(coords, dtype=float)
        return cls(coords[:dm0], coords[dm0 : dm0 + dn], coords[dm0 + dn :])

    @property
    def coords(self):
        return np.concatenate([self.m0, self.u, self.h])

    def allclose(self, other, atol=1e-10):
        return np.allclose(self.coords, other.coords, rtol=0.0, atol=atol)


@dataclass(eq=False)
class TangentData:
    """Tangent vector at ``base``: flat velocity plus left-trivialized g-velocity (full basis)."""

    base: GroupPoint
    m0_vel: np.ndarray
    g_vel: np.ndarray

    def inner(self, spec, other):
        return float(self.m0_vel @ other.m0_vel + self.g_vel @ spec.algebra.gram @ other.g_vel)

    def norm(self, spec):
        return float(np.sqrt(self.inner(spec, self)))


# --- nilpotent group law -------------------------------------------------


@lru_cache(maxsize=None)
def _bch_coefficients(degree):
    """Taylor coefficients of ``z / (1 - exp(-z))``."""
    b = bernoulli(max(degree, 1))
    return tuple((-1) ** k * b[k] / factorial(k) for k in range(degree + 1))


def bch(alg, x, y):
    """``log(exp(x) exp(y))`` for ``x, y`` in n (n-coordinates, batched).

    ``Z(s) = log(exp(x) exp(s y))`` solves ``Z' = sum_k b_k ad(Z)^k y`` and is
    a polynomial in ``s`` of degree at most the nilpotency degree ``c``.
    Picard iteration on the coefficient vectors is exact after ``c`` passes.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    c = alg.nilpotency_degree
    if c is None:
        raise GeometryError("n is not nilpotent", code="NOT_NILPOTENT")
    if c == 1:
        return x + y
    coef = _bch_coefficients(c - 1)
    shape = np.broadcast_shapes(x.shape, y.shape)
    dtype = np.result_type(x, y, float)
    z = np.zeros((c + 1,) + shape, dtype=dtype)
    z[0] = x
    for _ in range(c):
        term = np.zeros((c,) + shape, dtype=dtype)
        term[0] = y
        rhs = coef[0] * term
        for k in range(1, c):
            nxt = np.zeros_like(term)
            for d in range(c):
                for a in range(d + 1):
                    nxt[d] += alg.bracket_n(z[a], term[d - a])
            term = nxt
            rhs = rhs + coef[k] * term
        z_new = np.zeros_like(z)
        z_new[0] = x
        for d in range(c):
            z_new[d + 1] = rhs[d] / (d + 1)
        z = z_new
    return z.sum(axis=0)


def dexp_left(alg, u):
    """``Phi(u) = sum_k (-ad u)^k / (k+1)!``: the left-trivialized derivative of ``exp_N`` at ``u``."""
    u = np.asarray(u)
    c = alg.nilpotency_degree
    ident = np.broadcast_to(np.eye(alg.dim_n), u.shape[:-1] + (alg.dim_n, alg.dim_n))
    if c == 1:
        return ident.copy()
    neg_ad = -alg.ad_n_of(u)
    out = ident.copy()
    power = ident.copy()
    for k in range(1, c):
        power = power @ neg_ad
        out = out + power / factorial(k + 1)
    return out


def multiply(spec, g1, g2):
    """Group law: ``(u1, h1)(u2, h2) = (BCH(u1, Ad(exp h1) u2), h1 + h2)``."""
    alg = spec.algebra
    moved = alg.ad_exp(g1.h) @ g2.u
    return GroupPoint(g1.m0 + g2.m0, bch(alg, g1.u, moved), g1.h + g2.h)


def inverse(spec, g):
    alg = spec.algebra
    return GroupPoint(-g.m0, -(alg.ad_exp(-g.h) @ g.u), -g.h)


def exp_a(spec, h):
    dm0, dn, _ = spec.layout
    return GroupPoint(np.zeros(dm0), np.zeros(dn), h)


# --- tangent data ----------------------------------------------------------


def maurer_cartan(spec, p, coord_vel):
    """Left-trivialize a chart velocity ``(dm0, du, dh)`` at ``p``."""
    alg = spec.algebra
    dm0, dn, _ = spec.layout
    v = np.asarray(coord_vel, dtype=float)
    du, dh = v[dm0 : dm0 + dn], v[dm0 + dn :]
    w = alg.ad_exp(p.h, -1.0) @ dexp_left(alg, p.u) @ du
    g_vel = alg.embed_n(w) + alg.embed_a(dh)
    return TangentData(p, v[:dm0].copy(), g_vel)


def trivialize(spec, points, tangents):
    """Batched left-trivialization in an orthonormal frame.

    ``points`` has shape ``(P, D)`` (chart coordinates) and ``tangents``
    shape ``(P, D, k)`` or ``(D, k)``. Returns ``(P, dim_M, k)`` whose
    columns have euclidean norm equal to the Riemannian norm.
    """
    alg = spec.algebra
    dm0, dn, _ = spec.layout
    points = np.asarray(points)
    tangents = np.asarray(tangents)
    if tangents.ndim == 2:
        tangents = np.broadcast_to(tangents, (points.shape[0],) + tangents.shape)
    u = points[:, dm0 : dm0 + dn]
    h = points[:, dm0 + dn :]
    t_n = tangents[:, dm0 : dm0 + dn, :]
    if alg.nilpotency_degree != 1:
        t_n = dexp_left(alg, u) @ t_n
    if alg.ad_a_diagonal:
        rates = np.einsum("ijj->ij", alg.ad_a)
        t_n = np.exp(-(h @ rates))[:, :, None] * t_n
    else:
        t_n = alg.ad_exp(h, -1.0) @ t_n
    t_n = _apply_frame(alg.chol_n.T, t_n)
    t_a = _apply_frame(alg.chol_a.T, tangents[:, dm0 + dn :, :])
    return np.concatenate([tangents[:, :dm0, :], t_n, t_a], axis=1)


def _apply_frame(m, t):
    """``m @ t`` for a fixed small matrix and a stack ``t``; skipped for the identity."""
    if np.array_equal(m, np.eye(len(m))):
        return t
    return np.einsum("ij,pjk->pik", m, t, optimize=True)


# --- projection and cylinder map -----------------------------------------


def project(p):
    """``pi(m0, u, h) = (m0, u, 0)``."""
    return GroupPoint(p.m0.copy(), p.u.copy(), np.zeros_like(p.h))


def phi(t, p):
    """Point at time ``t`` on the normal geodesic from ``project(p)`` (t=0) to ``p`` (t=1)."""
    return GroupPoint(p.m0.copy(), p.u.copy(), t * p.h)


def distance_to_slice(spec, p):
    """``d(p, M0 × N) = |h|``."""
    return float(spec.algebra.norm_a(p.h))


# --- N-Jacobi fields --------------------------------------------------------


@dataclass
class JacobiField:
    """``y(t) = t xi + Ad(exp(-t H)) X`` along ``t -> n exp(tH)``, left-trivialized."""

    H: np.ndarray
    xi: np.ndarray
    X: np.ndarray

    def parts(self, alg, t):
        """(a-part, n-part) of ``y(t)``."""
        return t * self.xi, alg.ad_exp(self.H, -t) @ self.X

    def value(self, alg, t):
        a_part, n_part = self.parts(alg, t)
        return alg.embed_a(a_part) + alg.embed_n(n_part)

    def norm(self, alg, t):
        a_part, n_part = self.parts(alg, t)
        return float(np.sqrt(alg.norm_a(a_part) ** 2 + alg.norm_n(n_part) ** 2))


def n_jacobi_from_boundary(spec, x, v):
    """The N-Jacobi field along the normal geodesic through ``x`` with ``y(1) = v``."""
    alg = spec.algebra
    if alg.norm_a(x.h) < DEGENERATE_TOL:
        raise GeometryError("point lies on M0 × N; the normal geodesic is constant", code="DEGENERATE_GEODESIC")
    xi, w = alg.split(v.g_vel)
    return JacobiField(x.h.copy(), xi.copy(), alg.ad_exp(x.h) @ w)


def pure_n_field(alg, H, X):
    return JacobiField(np.asarray(H, dtype=float), np.zeros(alg.dim_a), np.asarray(X, dtype=float))


def jacobi_norm_sq_derivative(alg, dec, field, t):
    """``(1/2) d/dt |y(t)|^2 = t |xi|^2 - sum_j mu_j(H) <V_j, D_j V_j>`` with ``V = Ad(exp(-tH)) X``."""
    v = alg.chol_n.T @ (alg.ad_exp(field.H, -t) @ field.X)
    mu_h = dec.mu_of(field.H)
    total = t * alg.norm_a(field.xi) ** 2
    for q, mj, d in zip(dec.frame_blocks, mu_h, dec.d_ops):
        vj = q.T @ v
        total -= mj * (vj @ d @ vj)
    return float(total)


def _frame_matrix(spec, frame):
    """Columns: orthonormal-frame coordinates of each tangent vector (M0 part, then g)."""
    alg = spec.algebra
    cols = []
    for v in frame:
        a_part, n_part = alg.split(v.g_vel)
        cols.append(np.concatenate([v.m0_vel, alg.chol_n.T @ n_part, alg.chol_a.T @ a_part]))
    return np.array(cols).T


def volume_distortion(spec, x, frame, t):
    """Gram-determinant volume of ``{D phi(t, x)(0, v_i)}`` for an orthonormal frame normal to the geodesic."""
    alg = spec.algebra
    if alg.norm_a(x.h) < DEGENERATE_TOL:
        raise GeometryError("point lies on M0 × N; the normal geodesic is constant", code="DEGENERATE_GEODESIC")
    mat = _frame_matrix(spec, frame)
    gram = mat.T @ mat
    if np.abs(gram - np.eye(len(frame))).max() > FRAME_TOL:
        raise GeometryError("frame is not orthonormal", code="FRAME_NOT_ORTHONORMAL")
    velocity = np.concatenate([np.zeros(spec.dim_m0), np.zeros(alg.dim_n), alg.chol_a.T @ x.h])
    velocity /= np.linalg.norm(velocity)
    if np.abs(velocity @ mat).max(initial=0.0) > FRAME_TOL:
        raise GeometryError("frame is not orthogonal to the geodesic velocity", code="FRAME_NOT_NORMAL_TO_GEODESIC")

    transport = alg.ad_exp(x.h, 1.0 - t)
    pushed = []
    for v in frame:
        xi, w = alg.split(v.g_vel)
        y = TangentData(phi(t, x), v.m0_vel, alg.embed_a(t * xi) + alg.embed_n(transport @ w))
        pushed.append(y)
    pm = _frame_matrix(spec, pushed)
    det = np.linalg.det(pm.T @ pm)
    return float(np.sqrt(max(det, 0.0)))


def distortion_bound(spec, lam, x, t):
    """``exp(-lam (1 - t) |H|)``."""
    return float(np.exp(-lam * (1.0 - t) * spec.algebra.norm_a(x.h)))
