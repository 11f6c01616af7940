"""Bundled manifold models.

=========  ====  ======  =============================================
name       rank  dim M   description
=========  ====  ======  =============================================
h2         1     2       real hyperbolic plane, curvature -1
h3         1     3       real hyperbolic 3-space
ch2        1     4       complex hyperbolic plane, Heisenberg ⋊ R
h2xh2      2     4       product of two hyperbolic planes
heintze    1     3       non-symmetric Heintze group, ad(H) = diag(1, pi/3)
h2xr       2     3       hyperbolic plane times a flat line
=========  ====  ======  =============================================
"""

import math

from .algebra import ManifoldSpec, MetricLieAlgebra


def h2():
    alg = MetricLieAlgebra.from_brackets(["H", "W"], [0], [1], {(0, 1): {1: 1.0}})
    return ManifoldSpec(alg, 0, "h2")


def h3():
    alg = MetricLieAlgebra.from_brackets(
        ["H", "W1", "W2"], [0], [1, 2], {(0, 1): {1: 1.0}, (0, 2): {2: 1.0}}
    )
    return ManifoldSpec(alg, 0, "h3")


def ch2():
    alg = MetricLieAlgebra.from_brackets(
        ["H", "X", "Y", "Z"],
        [0],
        [1, 2, 3],
        {(0, 1): {1: 0.5}, (0, 2): {2: 0.5}, (0, 3): {3: 1.0}, (1, 2): {3: 1.0}},
    )
    return ManifoldSpec(alg, 0, "ch2")


def h2xh2():
    alg = MetricLieAlgebra.from_brackets(
        ["H1", "H2", "W1", "W2"], [0, 1], [2, 3], {(0, 2): {2: 1.0}, (1, 3): {3: 1.0}}
    )
    return ManifoldSpec(alg, 0, "h2xh2")


def heintze():
    alg = MetricLieAlgebra.from_brackets(
        ["H", "W1", "W2"], [0], [1, 2], {(0, 1): {1: 1.0}, (0, 2): {2: math.pi / 3}}
    )
    return ManifoldSpec(alg, 0, "heintze")


def h2xr():
    alg = MetricLieAlgebra.from_brackets(["H", "W"], [0], [1], {(0, 1): {1: 1.0}})
    return ManifoldSpec(alg, 1, "h2xr")


BUILTIN = {
    "h2": h2,
    "h3": h3,
    "ch2": ch2,
    "h2xh2": h2xh2,
    "heintze": heintze,
    "h2xr": h2xr,
}

# the five manifolds every property test sweeps over
CORE = ("h2", "h3", "ch2", "h2xh2", "heintze")


def builtin(name):
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown builtin manifold {name!r}; choose from {sorted(BUILTIN)}") from None
