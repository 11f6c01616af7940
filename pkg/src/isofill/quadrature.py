"""Symmetric quadrature on the standard simplex with uniform dyadic refinement.

Points are returned in barycentric coordinates ``(beta_0, ..., beta_k)``
and weights are scaled so they sum to the volume ``1/k!`` of the standard
simplex ``{x_i >= 0, sum x_i <= 1}`` in the coordinates ``beta_1..beta_k``.
"""

import itertools
from functools import lru_cache
from math import factorial

import numpy as np


def compositions(total, parts):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def grundmann_moeller(k, degree=7):
    """Grundmann-Möller rule of odd ``degree = 2s + 1`` on the ``k``-simplex.

    Some weights are negative; the rule is exact for polynomials of total
    degree ``<= degree``.
    """
    if degree < 1 or degree % 2 == 0:
        raise ValueError(f"degree must be a positive odd integer, got {degree}")
    s = (degree - 1) // 2
    d = k
    pts, wts = [], []
    for i in range(s + 1):
        denom = d + degree - 2 * i
        w = (-1) ** i * 2.0 ** (-2 * s) * denom**degree / (factorial(i) * factorial(d + degree - i))
        for beta in compositions(s - i, d + 1):
            pts.append([(2 * b + 1) / denom for b in beta])
            wts.append(w)
    pts = np.array(pts, dtype=float).reshape(-1, k + 1)
    wts = np.array(wts, dtype=float)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


@lru_cache(maxsize=None)
def kuhn_children(k):
    """Barycentric vertex matrices of the ``2^k`` children of one Freudenthal refinement step.

    Returns an array of shape ``(2^k, k+1, k+1)``; row ``j`` of a child is
    its ``j``-th vertex expressed in the parent's barycentric coordinates.
    """
    if k == 0:
        return np.ones((1, 1, 1))
    # the standard simplex is the Kuhn simplex 1 >= y_1 >= ... >= y_k >= 0 via y_i = sum_{j>=i} x_j
    children = []
    for corner in itertools.product((0, 1), repeat=k):
        for perm in itertools.permutations(range(k)):
            verts_y = [np.array(corner, dtype=float)]
            for axis in perm:
                nxt = verts_y[-1].copy()
                nxt[axis] += 1.0
                verts_y.append(nxt)
            verts_y = np.array(verts_y) / 2.0
            centre = verts_y.mean(axis=0)
            if np.all(np.diff(centre) < 0) and centre[0] < 1 and centre[-1] > 0:
                children.append(verts_y)
    if len(children) != 2**k:
        raise AssertionError(f"Freudenthal refinement produced {len(children)} children in dimension {k}")
    out = []
    for verts_y in children:
        y_ext = np.concatenate([np.ones((k + 1, 1)), verts_y, np.zeros((k + 1, 1))], axis=1)
        out.append(y_ext[:, :-1] - y_ext[:, 1:])
    out = np.array(out)
    out.setflags(write=False)
    return out


def _compose(a, b):
    """Children of children: ``(A, k+1, k+1) x (B, k+1, k+1) -> (A*B, k+1, k+1)``."""
    return np.einsum("bij,ajl->abil", b, a).reshape(-1, a.shape[1], a.shape[2])


@lru_cache(maxsize=16)
def refined_simplices(k, depth):
    out = np.eye(k + 1)[None]
    step = kuhn_children(k)
    for _ in range(depth):
        out = _compose(out, step)
    out.setflags(write=False)
    return out


def refined_rule_chunks(k, degree, depth, max_points=1 << 20):
    """Yield ``(points, weights)`` chunks covering the depth-``depth`` refinement.

    The chunking is fixed by ``(k, degree, depth, max_points)`` only, so the
    reduction order never depends on the caller.
    """
    pts, wts = grundmann_moeller(k, degree)
    if k == 0:
        yield pts, wts
        return
    q = len(wts)
    inner = depth
    while inner > 0 and (2**k) ** inner * q > max_points:
        inner -= 1
    outer = depth - inner
    inner_simplices = refined_simplices(k, inner)
    inner_pts = np.einsum("qi,cij->cqj", pts, inner_simplices).reshape(-1, k + 1)
    scale = 2.0 ** (-k * depth)
    inner_w = np.tile(wts, len(inner_simplices)) * scale
    if outer == 0:
        yield inner_pts, inner_w
        return
    for simplex in refined_simplices(k, outer):
        yield inner_pts @ simplex, inner_w


def simplex_volume(k):
    return 1.0 / factorial(k)
