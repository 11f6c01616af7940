"""Test cycles: geodesic circles in root planes, product tori, random polygons, simplex boundaries."""

import math

import numpy as np

from .currents import AFFINE, Chain, Layout
from .errors import ChainError


def _root_rate(spec, a_index, n_index):
    """Eigenvalue ``a`` with ``[e_a, e_n] = a e_n``; both vectors must be unit and orthogonal."""
    alg = spec.algebra
    ad = alg.ad_a[a_index]
    rate = float(ad[n_index, n_index])
    col = ad[:, n_index].copy()
    col[n_index] = 0.0
    if rate <= 0 or np.abs(col).max(initial=0.0) > 1e-12:
        raise ChainError(f"n-vector {n_index} is not a positive root vector of a-vector {a_index}", code="NOT_A_ROOT")
    if abs(alg.gram_a[a_index, a_index] - 1) > 1e-12 or abs(alg.gram_n[n_index, n_index] - 1) > 1e-12:
        raise ChainError("root plane circles need unit basis vectors", code="NOT_A_ROOT")
    return rate


def plane_circle_points(r, n_vertices, rate=1.0, phase=0.0):
    """Chart points ``(x, h)`` of a geodesic circle of radius ``r`` in ``e^{-2 a h} dx^2 + dh^2``.

    The circle is centered at ``(0, 0)`` and sampled uniformly in angle.
    """
    rho = rate * r
    ang = phase + 2 * np.pi * np.arange(n_vertices) / n_vertices
    z = math.tanh(rho / 2) * np.exp(1j * ang)
    w = 1j * (1 + z) / (1 - z)
    return w.real / rate, np.log(w.imag) / rate


def circle_circumference(r, rate=1.0):
    return 2 * math.pi * math.sinh(rate * r) / rate


def disc_area(r, rate=1.0):
    return 2 * math.pi * (math.cosh(rate * r) - 1) / rate**2


def radius_for_scale(r0, scale, rate=1.0):
    """Radius whose circumference is ``scale`` times that of radius ``r0``."""
    return math.asinh(scale * math.sinh(rate * r0)) / rate


def loop_chain(spec, points):
    """Closed polygonal 1-cycle through chart ``points`` in order."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    return Chain.from_simplices(1, spec.layout, pts, [(i, (i + 1) % n) for i in range(n)])


def root_plane_circle(spec, r, n_vertices=256, a_index=0, n_index=0, m0=None):
    """Geodesic circle in the totally geodesic plane spanned by ``e_a`` and the root vector ``e_n``."""
    rate = _root_rate(spec, a_index, n_index)
    x, h = plane_circle_points(r, n_vertices, rate)
    dm0, dn, da = spec.layout
    pts = np.zeros((n_vertices, dm0 + dn + da))
    if m0 is not None:
        pts[:, :dm0] = m0
    pts[:, dm0 + n_index] = x
    pts[:, dm0 + dn + a_index] = h
    return loop_chain(spec, pts)


def product_torus(spec, r1, r2, n1=12, n2=12):
    """Product of circles in the two factors of a product of hyperbolic planes.

    The basis must be ``a = (H1, H2)``, ``n = (W1, W2)`` with ``[H_i, W_i] = a_i W_i``.
    """
    rate1 = _root_rate(spec, 0, 0)
    rate2 = _root_rate(spec, 1, 1)
    x1, h1 = plane_circle_points(r1, n1, rate1)
    x2, h2 = plane_circle_points(r2, n2, rate2)
    dm0, dn, da = spec.layout
    if (dn, da) != (2, 2):
        raise ChainError("product torus needs dim n = dim a = 2", code="BAD_SPEC")
    verts = np.zeros((n1 * n2, dm0 + 4))
    idx = lambda i, j: (i % n1) * n2 + (j % n2)  # noqa: E731
    for i in range(n1):
        for j in range(n2):
            verts[idx(i, j), dm0:] = (x1[i], x2[j], h1[i], h2[j])
    simplices, mults = [], []
    for i in range(n1):
        for j in range(n2):
            simplices.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            mults.append(1)
            simplices.append((idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)))
            mults.append(-1)
    return Chain.from_simplices(2, spec.layout, verts, simplices, mults)


def random_polygon(spec, n_vertices, rng, scale=1.0):
    """Closed polygon with chart vertices drawn uniformly from ``[-scale, scale]^D``."""
    d = sum(spec.layout)
    return loop_chain(spec, rng.uniform(-scale, scale, size=(n_vertices, d)))


def simplex_boundary(spec, k, rng, scale=1.0, vertices=None):
    """Boundary of a chart ``(k+1)``-simplex: a ``k``-cycle with ``k+2`` cells."""
    d = sum(spec.layout)
    if vertices is None:
        vertices = rng.uniform(-scale, scale, size=(k + 2, d))
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape != (k + 2, d):
        raise ChainError(f"need {k + 2} vertices of dimension {d}", code="BAD_CELL")
    full = Chain(k + 1, Layout(*spec.layout))
    full.add_cell(AFFINE, list(vertices))
    from .currents import boundary

    return boundary(full)


def octahedron_sphere(spec, center, radius, axes):
    """Boundary of a chart cross-polytope spanned by three chart axes (a 2-cycle with 8 cells)."""
    d = sum(spec.layout)
    c = np.asarray(center, dtype=float)
    verts = []
    for ax in axes:
        for s in (1.0, -1.0):
            v = c.copy()
            v[ax] += s * radius
            verts.append(v)
    # vertices: 0=+x 1=-x 2=+y 3=-y 4=+z 5=-z
    faces = []
    for xi in (0, 1):
        for yi in (2, 3):
            for zi in (4, 5):
                sign = (1 if xi == 0 else -1) * (1 if yi == 2 else -1) * (1 if zi == 4 else -1)
                faces.append(((xi, yi, zi), sign))
    if len(c) != d:
        raise ChainError("center has the wrong dimension", code="BAD_CELL")
    return Chain.from_simplices(2, spec.layout, np.array(verts), [f for f, _ in faces], [s for _, s in faces])
