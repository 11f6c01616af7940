import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from isofill import models
from isofill.structure import decompose

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def spec_of(name):
    return models.builtin(name)


@functools.lru_cache(maxsize=None)
def dec_of(name):
    return decompose(spec_of(name))


@pytest.fixture(params=models.CORE)
def core_name(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def sample_cone(dec, rng, count, spread=1.5):
    """Rejection-sample directions of C0 around -h_plus, with norms in (0, 3]."""
    from isofill.structure import build_cone

    cone = build_cone(dec)
    dim = len(dec.h_plus)
    out = []
    while len(out) < count:
        batch = -dec.h_plus + spread * rng.standard_normal((4 * count, dim))
        keep = batch[cone.contains(batch)]
        out.extend(keep[: count - len(out)])
    out = np.array(out)
    norms = cone.norm(out)
    return out / norms[:, None] * rng.uniform(0.05, 3.0, size=(count, 1))


def random_normal_frame(spec, x, k, rng):
    """Orthonormal k-frame of tangent vectors at ``x``, orthogonal to the normal geodesic."""
    from isofill.geometry import TangentData

    alg = spec.algebra
    dm0, dn, _ = spec.layout
    vel = np.concatenate([np.zeros(dm0 + dn), alg.chol_a.T @ x.h])
    vel /= np.linalg.norm(vel)
    raw = rng.standard_normal((spec.dim_M, k))
    raw -= np.outer(vel, vel @ raw)
    q, _ = np.linalg.qr(raw)
    frame = []
    for col in q.T:
        n_part = np.linalg.solve(alg.chol_n.T, col[dm0 : dm0 + dn])
        a_part = np.linalg.solve(alg.chol_a.T, col[dm0 + dn :])
        frame.append(TangentData(x, col[:dm0], alg.embed_n(n_part) + alg.embed_a(a_part)))
    return frame


def five_point(f, x, step):
    return (f(x - 2 * step) - 8 * f(x - step) + 8 * f(x + step) - f(x + 2 * step)) / (12 * step)
