from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isofill.quadrature import (
    compositions,
    grundmann_moeller,
    kuhn_children,
    refined_rule_chunks,
    refined_simplices,
    simplex_volume,
)


def dirichlet_moment(powers):
    """Exact integral of prod beta_i^p_i over the standard simplex."""
    k = len(powers) - 1
    return np.prod([factorial(p) for p in powers]) / factorial(k + sum(powers))


def integrate(k, degree, depth, f):
    return sum(f(p) @ w for p, w in refined_rule_chunks(k, degree, depth))


def test_compositions():
    assert sorted(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert len(list(compositions(3, 4))) == 20


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("degree", [1, 3, 5, 7])
def test_weights_sum_to_volume(k, degree):
    pts, wts = grundmann_moeller(k, degree)
    assert wts.sum() == pytest.approx(simplex_volume(k), rel=1e-13)
    np.testing.assert_allclose(pts.sum(axis=1), 1.0, atol=1e-15)


@given(st.integers(1, 4), st.data())
def test_exact_up_to_degree_7(k, data):
    total = data.draw(st.integers(0, 7))
    powers = data.draw(st.sampled_from(list(compositions(total, k + 1))))
    pts, wts = grundmann_moeller(k, 7)
    val = np.prod(pts ** np.array(powers), axis=1) @ wts
    assert val == pytest.approx(dirichlet_moment(powers), rel=1e-11, abs=1e-15)


def test_not_exact_at_degree_8():
    pts, wts = grundmann_moeller(2, 7)
    powers = (8, 0, 0)
    assert abs(np.prod(pts ** np.array(powers), axis=1) @ wts - dirichlet_moment(powers)) > 1e-8


def test_even_degree_rejected():
    with pytest.raises(ValueError):
        grundmann_moeller(2, 4)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_kuhn_children_tile_parent(k):
    kids = kuhn_children(k)
    assert kids.shape == (2**k, k + 1, k + 1)
    np.testing.assert_allclose(kids.sum(axis=2), 1.0)
    vols = [abs(np.linalg.det(c[1:] - c[0]) if k else 1.0) for c in (kid[:, 1:] for kid in kids)]
    np.testing.assert_allclose(vols, 2.0**-k, rtol=1e-12)
    # centroids are distinct and inside the parent
    cents = kids.mean(axis=1)
    assert np.all(cents > 0)
    assert len({tuple(np.round(c, 12)) for c in cents}) == 2**k


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("depth", [0, 1, 3])
def test_refined_rule_stays_exact(k, depth):
    powers = tuple([7 - (k - 1)] + [1] * (k - 1) + [0])
    f = lambda p: np.prod(p ** np.array(powers), axis=1)  # noqa: E731
    assert integrate(k, 7, depth, f) == pytest.approx(dirichlet_moment(powers), rel=1e-11)


def test_chunking_matches_single_pass():
    f = lambda p: np.exp(p[:, 0]) * np.cos(p[:, 2])  # noqa: E731
    whole = integrate(2, 7, 4, f)
    pieces = sum(f(p) @ w for p, w in refined_rule_chunks(2, 7, 4, max_points=64))
    assert whole == pytest.approx(pieces, rel=1e-14)


def test_smooth_convergence_rate():
    """Error of exp(3 beta_1) on the triangle drops by about 2^8 per level."""
    f = lambda p: np.exp(3 * p[:, 1])  # noqa: E731
    exact = ((np.exp(3) - 1) / 3 - 1) / 3  # int_0^1 (1 - x) e^{3x} dx
    errs = [abs(integrate(2, 7, d, f) - exact) for d in range(3)]
    assert errs[1] < errs[0] / 64 and errs[2] < errs[1] / 64


def test_refined_simplices_count():
    assert refined_simplices(3, 2).shape == (64, 4, 4)
