import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given
from hypothesis import strategies as st

from conftest import dec_of, spec_of
from isofill import cycles
from isofill.currents import (
    AFFINE,
    CYLINDER,
    LEFT_TRANSLATE,
    PHI_AT,
    PROJECT,
    Chain,
    Layout,
    QuadratureOptions,
    boundary,
    canonical_cell,
    chart_barycenter,
    cone,
    cylinder,
    mass,
    prism_pieces,
    pushforward,
    signed_volume,
)
from isofill.errors import ChainError
from isofill.geometry import GroupPoint, exp_a

seeds = st.integers(0, 2**31 - 1)
LAY = Layout(0, 2, 2)
TIGHT = QuadratureOptions(tol=1e-10, max_depth=10)


def random_chain(rng, dim, cells=6, layout=LAY, cylinders=True):
    """Random integral chain on a coarse grid, so faces often coincide and cancel."""
    c = Chain(dim, layout)
    grid = lambda: tuple(float(x) for x in rng.integers(-2, 3, layout.total))  # noqa: E731
    for _ in range(cells):
        m = int(rng.integers(-3, 4))
        if cylinders and rng.random() < 0.5:
            c.add_cell(CYLINDER, [(grid(), float(rng.integers(0, 3)) / 2) for _ in range(dim + 1)], m)
        else:
            c.add_cell(AFFINE, [grid() for _ in range(dim + 1)], m)
    return c


@given(seeds, st.integers(2, 4))
def test_boundary_squared_is_zero(seed, dim):
    c = random_chain(np.random.default_rng(seed), dim)
    assert boundary(boundary(c)).is_zero()


def test_boundary_of_segment():
    c = Chain(1, LAY)
    a, b = (0.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)
    c.add_cell(AFFINE, [a, b])
    d = boundary(c)
    assert d.terms == {(AFFINE, (b,)): 1, (AFFINE, (a,)): -1}


def test_canonical_cell_sign_and_degeneracy():
    lay = Layout(0, 1, 1)
    p, q, r = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)
    assert canonical_cell(lay, AFFINE, [p, q, r])[1] == -canonical_cell(lay, AFFINE, [q, p, r])[1]
    assert canonical_cell(lay, AFFINE, [p, q, r])[1] == canonical_cell(lay, AFFINE, [q, r, p])[1]
    assert canonical_cell(lay, AFFINE, [p, p, r]) == (None, 0)
    assert canonical_cell(lay, AFFINE, [(-0.0, 0.0), q]) == canonical_cell(lay, AFFINE, [(0.0, 0.0), q])
    cell, _ = canonical_cell(lay, CYLINDER, [((0.0, 2.0), 0.5), ((1.0, 2.0), 0.5)])
    assert cell == (AFFINE, ((0.0, 1.0), (1.0, 1.0)))
    with pytest.raises(ChainError):
        canonical_cell(lay, "prism", [p, q])


def test_chain_arithmetic():
    rng = np.random.default_rng(0)
    a, b = random_chain(rng, 2), random_chain(rng, 2)
    assert (a + b) - b == a
    assert (a - a).is_zero()
    with pytest.raises(ChainError) as info:
        a + random_chain(rng, 1)
    assert info.value.code == "INCOMPATIBLE"
    with pytest.raises(ChainError):
        a.add_cell(AFFINE, [(0.0,) * 4], 1)
    with pytest.raises(ChainError):
        a.add_cell(AFFINE, [(0.0,) * 4] * 3, 0.5)
    with pytest.raises(ChainError):
        boundary(Chain(0, LAY))


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_prism_pieces(k):
    pieces = prism_pieces(k)
    assert len(pieces) == k + 1
    assert all(len(v) == k + 2 for _, v in pieces)


@given(seeds, st.integers(1, 3))
def test_cylinder_boundary_identity(seed, dim):
    rng = np.random.default_rng(seed)
    z = boundary(random_chain(rng, dim + 1, cylinders=False))
    proj = pushforward(None, PROJECT, z)
    assert boundary(cylinder(z)) == z - proj


def test_cylinder_rejects_non_cycle():
    c = Chain(1, LAY)
    c.add_cell(AFFINE, [(0.0,) * 4, (1.0,) * 4])
    with pytest.raises(ChainError) as info:
        cylinder(c)
    assert info.value.code == "NOT_A_CYCLE"


@given(seeds, st.integers(1, 3))
def test_cone_boundary_identity(seed, dim):
    rng = np.random.default_rng(seed)
    z = pushforward(None, PROJECT, boundary(random_chain(rng, dim + 1, cylinders=False)))
    apex = (0.25, -0.5, 0.0, 0.0)
    assert boundary(cone(z, apex)) == z


def test_cone_of_zero_cycle():
    z = Chain(0, LAY)
    z.add_cell(AFFINE, [(1.0, 0.0, 0.0, 0.0)], 1)
    z.add_cell(AFFINE, [(0.0, 1.0, 0.0, 0.0)], -1)
    assert boundary(cone(z, (0.0,) * 4)) == z
    z.add_cell(AFFINE, [(0.0, 2.0, 0.0, 0.0)], 1)
    with pytest.raises(ChainError) as info:
        cone(z, (0.0,) * 4)
    assert info.value.code == "NOT_A_CYCLE"


def test_cone_errors():
    z = cycles.random_polygon(spec_of("h2xh2"), 5, np.random.default_rng(0))
    with pytest.raises(ChainError) as info:
        cone(pushforward(None, PROJECT, z), (0.0, 0.0, 1.0, 0.0))
    assert info.value.code == "APEX_OFF_SLICE"
    with pytest.raises(ChainError) as info:
        cone(z, (0.0,) * 4)
    assert info.value.code == "CYCLE_OFF_SLICE"


def test_barycenter():
    assert chart_barycenter([(0.0, 1.0), (2.0, 3.0)]) == (1.0, 2.0)
    with pytest.raises(ChainError):
        chart_barycenter([])


def unit_square_h3():
    pts = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0)]
    return cycles.loop_chain(spec_of("h3"), pts)


def test_flat_unit_square_mass():
    spec = spec_of("h3")
    sq = Chain.from_simplices(
        2, spec.layout, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], [(0, 1, 2), (0, 2, 3)]
    )
    assert mass(spec, sq).value == pytest.approx(1.0, abs=1e-9)
    loop = unit_square_h3()
    assert mass(spec, loop).value == pytest.approx(4.0, abs=1e-9)
    assert mass(spec, cone(loop, (0.5, 0.5, 0.0))).value == pytest.approx(1.0, abs=1e-9)


def test_h2_triangle_signed_volume():
    spec = spec_of("h2")
    tri = Chain.from_simplices(2, spec.layout, [(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    exact = math.exp(-1.0)  # int of e^{-h} over {u, h >= 0, u + h <= 1}
    assert signed_volume(spec, tri, TIGHT).value == pytest.approx(exact, rel=1e-9)
    assert signed_volume(spec, -tri, TIGHT).value == pytest.approx(-exact, rel=1e-9)
    assert mass(spec, -tri, TIGHT).value == pytest.approx(exact, rel=1e-9)
    with pytest.raises(ChainError):
        signed_volume(spec, boundary(tri))


def test_circle_mass_h2():
    spec = spec_of("h2")
    z = cycles.root_plane_circle(spec, 1.0, 2048)
    assert mass(spec, z, TIGHT).value == pytest.approx(2 * math.pi * math.sinh(1.0), abs=1e-5)


def test_zero_chain_mass():
    spec = spec_of("h2")
    z = Chain(0, spec.layout)
    z.add_cell(AFFINE, [(0.0, 1.0)], 3)
    z.add_cell(AFFINE, [(1.0, 1.0)], -2)
    assert mass(spec, z).value == 5.0
    assert mass(spec, Chain(1, spec.layout)).value == 0.0


def test_layout_mismatch():
    with pytest.raises(ChainError) as info:
        mass(spec_of("h2"), unit_square_h3())
    assert info.value.code == "INCOMPATIBLE"


@given(seeds)
def test_pushforwards_commute_with_boundary(seed):
    spec = spec_of("h2xh2")
    rng = np.random.default_rng(seed)
    c = random_chain(rng, 2)
    for tag, arg in ((PROJECT, None), (PHI_AT, float(rng.uniform(0, 1)))):
        assert pushforward(spec, tag, boundary(c), arg) == boundary(pushforward(spec, tag, c, arg))
    affine = random_chain(rng, 2, cylinders=False)
    g = GroupPoint([], rng.uniform(-1, 1, 2), rng.integers(-2, 3, 2).astype(float))
    lhs = pushforward(spec, LEFT_TRANSLATE, boundary(affine), g)
    assert lhs == boundary(pushforward(spec, LEFT_TRANSLATE, affine, g))


def test_phi_at_zero_is_projection():
    rng = np.random.default_rng(1)
    c = random_chain(rng, 2, cylinders=False)
    assert pushforward(None, PHI_AT, c, 0.0) == pushforward(None, PROJECT, c)


def test_translation_restrictions():
    spec = spec_of("ch2")
    z = cycles.root_plane_circle(spec, 1.0, 16, n_index=2)
    with pytest.raises(ChainError) as info:
        pushforward(spec, LEFT_TRANSLATE, z, GroupPoint([], [1.0, 0.0, 0.0], [0.0]))
    assert info.value.code == "TRANSLATION_NOT_AFFINE"
    with pytest.raises(ChainError) as info:
        pushforward(spec, LEFT_TRANSLATE, cylinder(z), exp_a(spec, np.array([1.0])))
    assert info.value.code == "TRANSLATION_NOT_AFFINE"
    central = GroupPoint([], [0.0, 0.0, 2.0], [0.0])
    assert len(pushforward(spec, LEFT_TRANSLATE, cylinder(z), central)) == len(cylinder(z))


@pytest.mark.parametrize(
    "name,g",
    [
        ("h3", GroupPoint([], [0.3, -1.2], [0.7])),
        ("ch2", GroupPoint([], [0.0, 0.0, 1.5], [-0.4])),
        ("h2xh2", GroupPoint([], [2.0, -1.0], [0.5, -0.25])),
    ],
)
def test_mass_is_translation_invariant(name, g):
    spec = spec_of(name)
    z = cycles.simplex_boundary(spec, 2, np.random.default_rng(9))
    a = mass(spec, z, TIGHT)
    b = mass(spec, pushforward(spec, LEFT_TRANSLATE, z, g), TIGHT)
    assert b.value == pytest.approx(a.value, rel=1e-8)


def test_prism_units_match_per_cell_sum():
    spec = spec_of("h2")
    z = cycles.root_plane_circle(spec, 1.0, 12)
    v1 = cylinder(pushforward(spec, LEFT_TRANSLATE, z, exp_a(spec, np.array([-3.0]))))
    opts = QuadratureOptions(tol=1e-9)
    whole = mass(spec, v1, opts).value
    parts = 0.0
    for cell, m in v1.sorted_cells():
        single = Chain(v1.dim, v1.layout)
        single.terms = {cell: m}
        parts += mass(spec, single, opts).value
    assert whole == pytest.approx(parts, rel=1e-8)


def h2_cylinder_mass_oracle(z):
    """Over a chart segment at depth h < 0 the cylinder density is |x'| (e^{-h} - 1)."""
    total = 0.0
    for (_, (p, q)), m in z.sorted_cells():
        (x0, h0), (x1, h1) = p, q
        val, _ = quad(lambda s: math.expm1(-(h0 + s * (h1 - h0))), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
        total += abs(m) * abs(x1 - x0) * val
    return total


@pytest.mark.parametrize("depth", [0.5, 3.0, 8.0])
def test_cylinder_mass_matches_closed_form(depth):
    spec, dec = spec_of("h2"), dec_of("h2")
    z = cycles.root_plane_circle(spec, 1.0, 64)
    z = pushforward(spec, LEFT_TRANSLATE, z, exp_a(spec, np.array([-1.0 - depth])))
    mz, mv = mass(spec, z, TIGHT).value, mass(spec, cylinder(z), TIGHT).value
    assert mv == pytest.approx(h2_cylinder_mass_oracle(z), rel=1e-8)
    assert mv <= mz / dec.lam


def test_mass_thread_determinism():
    spec = spec_of("h2xh2")
    z = cycles.product_torus(spec, 1.0, 1.0, 4, 4)
    v = cylinder(pushforward(spec, LEFT_TRANSLATE, z, exp_a(spec, np.array([-2.0, -2.0]))))
    a = mass(spec, v, QuadratureOptions(threads=1))
    b = mass(spec, v, QuadratureOptions(threads=3))
    assert a.value == b.value and a.error_bound == b.error_bound and a.nodes == b.nodes


def test_mass_converges_with_tolerance():
    spec = spec_of("ch2")
    z = cycles.simplex_boundary(spec, 2, np.random.default_rng(2), scale=2.0)
    ref = mass(spec, z, QuadratureOptions(tol=1e-12, max_depth=12)).value
    coarse = mass(spec, z, QuadratureOptions(tol=1e-4))
    assert abs(coarse.value - ref) <= 10 * 1e-4 * ref
    assert coarse.error_bound >= 0.0


@given(seeds)
def test_mass_subadditive(seed):
    spec = spec_of("h3")
    rng = np.random.default_rng(seed)
    a = cycles.random_polygon(spec, 4, rng)
    b = cycles.random_polygon(spec, 4, rng)
    ma, mb, mab = (mass(spec, c).value for c in (a, b, a + b))
    assert mab <= (ma + mb) * (1 + 1e-6)
