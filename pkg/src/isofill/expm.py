"""Batched matrix exponential: scaling and squaring with a fixed [13/13] Padé approximant.

Follows Higham, "The scaling and squaring method for the matrix exponential
revisited" (2005), but always uses the degree-13 approximant. The matrices
met here are small (ad-actions on a nilpotent ideal), so the saving from
lower orders is irrelevant and a single code path is easier to audit.
"""

import numpy as np

_B13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
THETA_13 = 5.371920351148152


def expm(a):
    """Matrix exponential of ``a`` with shape ``(..., n, n)``.

    Each matrix in the batch gets its own scaling exponent, so results do
    not depend on which other matrices share the batch.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected (..., n, n), got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.inexact):
        a = a.astype(float)
    n = a.shape[-1]
    batch = a.shape[:-2]
    flat = a.reshape((-1, n, n))
    if flat.shape[0] == 0 or n == 0:
        return np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy()

    norms = np.abs(flat).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(norms > THETA_13, np.ceil(np.log2(norms / THETA_13)), 0.0)
    s = s.astype(int)
    scaled = flat / (2.0 ** s)[:, None, None]

    b = _B13
    ident = np.broadcast_to(np.eye(n, dtype=flat.dtype), flat.shape)
    a2 = scaled @ scaled
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = scaled @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)

    for step in range(int(s.max(initial=0))):
        mask = s > step
        r[mask] = r[mask] @ r[mask]
    return r.reshape(batch + (n, n))
