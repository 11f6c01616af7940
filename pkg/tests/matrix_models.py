"""Matrix realizations used as independent oracles for the group law."""

import numpy as np
import scipy.linalg

from isofill.algebra import ManifoldSpec, MetricLieAlgebra


def _unit(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def graded_upper_triangular(size=4):
    """Strictly upper-triangular matrices n with a = one grading element.

    The a-vector acts as ``diag(-1, -2, ..., -size)`` so ``[H, E_ij] = (j - i) E_ij``.
    Returns ``(spec, n_mats, a_mats)`` with the matrices of the n- and a-basis.
    """
    pairs = [(i, j) for d in range(1, size) for i in range(size - d) for j in [i + d]]
    n_mats = [_unit(size, i, j) for i, j in pairs]
    a_mats = [np.diag(-np.arange(1.0, size + 1))]
    basis_mats = a_mats + n_mats
    flat = np.array([m.ravel() for m in basis_mats]).T
    consts = []
    for i, x in enumerate(basis_mats):
        for j, y in enumerate(basis_mats):
            coef, *_ = np.linalg.lstsq(flat, (x @ y - y @ x).ravel(), rcond=None)
            for k, c in enumerate(coef):
                if abs(c) > 1e-12:
                    consts.append((i, j, k, round(c)))
    names = ["H"] + [f"E{i + 1}{j + 1}" for i, j in pairs]
    alg = MetricLieAlgebra(names, [0], list(range(1, len(names))), consts, np.eye(len(names)))
    return ManifoldSpec(alg, 0, f"upper{size}"), n_mats, a_mats


def ch2_matrices():
    """Heisenberg ⋊ R as 3×3 matrices: X = E12, Y = E23, Z = E13, H = diag(0, -1/2, -1)."""
    return [_unit(3, 0, 1), _unit(3, 1, 2), _unit(3, 0, 2)], [np.diag([0.0, -0.5, -1.0])]


def group_matrix(point, n_mats, a_mats):
    u_mat = sum(c * m for c, m in zip(point.u, n_mats))
    h_mat = sum(c * m for c, m in zip(point.h, a_mats))
    return scipy.linalg.expm(u_mat) @ scipy.linalg.expm(h_mat)


def n_log(mat, n_mats):
    """Coordinates of ``logm(mat)`` for a unipotent ``mat``."""
    log = np.real(scipy.linalg.logm(mat))
    flat = np.array([m.ravel() for m in n_mats]).T
    coef, *_ = np.linalg.lstsq(flat, log.ravel(), rcond=None)
    return coef
