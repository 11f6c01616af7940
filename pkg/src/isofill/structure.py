"""Splitting of n into blocks on which the symmetrized a-action is scalar-proportional.

For ``H`` in a let ``S(H)`` be the symmetric part of ``ad(H)|n`` with
respect to the metric. We look for an orthogonal splitting
``n = n_1 ⊕ ... ⊕ n_m`` with ``S(H)|n_j = mu_j(H) D_j``, a direction
``h_plus`` on which every ``mu_j`` is positive, a cone ``C0`` of directions
with ``mu_j(H) <= -eps |H|`` and the resulting exponential rate
``lam = a_min * eps`` at which pure-n Jacobi fields grow along ``C0``.

Symmetric matrices on n are returned in the gram-orthonormal frame
``x' = L^T x`` where ``gram_n = L L^T`` (the Cholesky factor).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import StructureError

POSITIVITY_TOL = 1e-8
PROPORTIONALITY_TOL = 1e-8
CLUSTER_RTOL = 1e-6
DEFAULT_MARGIN = 0.5


def _frame_ad(alg, ad):
    """Express ``ad`` (acting on n-coordinates) in the orthonormal frame."""
    lt = alg.chol_n.T
    return lt @ ad @ np.linalg.inv(lt)


def symmetrized_ad(alg, h):
    """``S(h)`` in the orthonormal frame of n, for ``h`` in a-coordinates."""
    a = _frame_ad(alg, alg.ad_a_of(np.asarray(h, dtype=float)))
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _sym_basis(alg):
    """``S(e_i)`` for each a-basis vector, shape ``(dim_a, dim_n, dim_n)``."""
    return symmetrized_ad(alg, np.eye(alg.dim_a))


def _ortho_a(alg):
    """Columns are an orthonormal basis of a (in a-coordinates)."""
    return np.linalg.inv(alg.chol_a.T)


def min_eig_value(alg, h):
    """``f(h) = lambda_min(S(h))``; concave and positively homogeneous in ``h``."""
    return float(np.linalg.eigvalsh(symmetrized_ad(alg, h))[0])


@dataclass
class HPlusResult:
    h_plus: np.ndarray
    value: float
    start: int


def find_h_plus(spec, seed=0, starts=32, iterations=500):
    """Maximize ``lambda_min(S(H))`` over the unit sphere of a.

    Projected subgradient ascent on the unit ball in orthonormal
    coordinates, step ``1/k``, from ``starts`` random points. Each run
    keeps its best iterate and also tries the average of its second half
    (the average sits close to kinks the iterates oscillate across).
    The overall best wins; ties go to the lowest start index.
    """
    alg = spec.require_valid().algebra
    basis = _ortho_a(alg)
    s_ortho = np.einsum("ia,ijk->ajk", basis, _sym_basis(alg))
    rng = np.random.default_rng(seed)
    inits = rng.standard_normal((starts, alg.dim_a))

    def values(eta):
        nrm = np.linalg.norm(eta, axis=-1)
        safe = np.where(nrm < 1e-12, 1.0, nrm)
        vals = np.linalg.eigvalsh(np.einsum("sa,ajk->sjk", eta / safe[:, None], s_ortho))[:, 0]
        return np.where(nrm < 1e-12, -np.inf, vals)

    # all starts advance together; each keeps its own best iterate and tail sum
    eta = inits / np.linalg.norm(inits, axis=1, keepdims=True)
    run_best, run_eta = values(eta), eta.copy()
    tail = np.zeros_like(eta)
    for k in range(1, iterations + 1):
        _, v = np.linalg.eigh(np.einsum("sa,ajk->sjk", eta, s_ortho))
        lead = v[:, :, 0]
        g = np.einsum("sj,ajk,sk->sa", lead, s_ortho, lead)
        eta = eta + g / k
        nrm = np.linalg.norm(eta, axis=1, keepdims=True)
        eta = eta / np.maximum(nrm, 1.0)
        val = values(eta)
        better = val > run_best
        run_best = np.where(better, val, run_best)
        run_eta[better] = eta[better]
        if k > iterations // 2:
            tail += eta
    val = values(tail)
    better = val > run_best
    run_best = np.where(better, val, run_best)
    run_eta[better] = tail[better]
    idx = int(np.argmax(run_best))  # first index among ties
    best = (float(run_best[idx]), run_eta[idx] / np.linalg.norm(run_eta[idx]), idx)

    f, eta, idx = best
    if not f > POSITIVITY_TOL:
        raise StructureError(
            f"max of lambda_min(S(H)) over the unit sphere is {f:.3e} <= {POSITIVITY_TOL:g}; "
            "no direction expands all of n",
            code="MAX_NONPOSITIVE",
        )
    return HPlusResult(basis @ eta, f, idx)


@dataclass
class HeberDecomposition:
    blocks: list  # per block: columns = gram-orthonormal basis, in n-coordinates
    frame_blocks: list  # same blocks in the orthonormal frame of n
    mu: np.ndarray  # (m, dim_a): unit covectors, mu_j(H) = mu[j] @ H
    d_ops: list  # D_j in the block's own orthonormal basis
    h_plus: np.ndarray
    h_plus_value: float
    margin: float
    epsilon: float
    a_min: float
    lam: float
    gram_a: np.ndarray
    residuals: dict = field(default_factory=dict)
    cluster_rtol: float = CLUSTER_RTOL

    @property
    def m(self):
        return len(self.blocks)

    @property
    def dims(self):
        return [b.shape[1] for b in self.blocks]

    @property
    def root_functionals(self):
        """``mu_j`` rescaled so that ``D_j`` becomes the identity (``D_j`` is scalar here)."""
        scale = np.array([np.mean(np.linalg.eigvalsh(d)) for d in self.d_ops])
        return self.mu * scale[:, None]

    @property
    def mu_ratios(self):
        """Root functionals at ``h_plus`` relative to the first block."""
        vals = self.root_functionals @ self.h_plus
        return vals / vals[0]

    def mu_of(self, h):
        return np.asarray(h) @ self.mu.T

    def reconstruct(self, h):
        """``⊕_j mu_j(H) D_j`` assembled in the orthonormal frame of n."""
        h = np.asarray(h, dtype=float)
        out = 0.0
        for q, mj, d in zip(self.frame_blocks, self.mu, self.d_ops):
            out = out + (mj @ h) * (q @ d @ q.T)
        return out

    def d_eigen_ranges(self):
        return [(float(w[0]), float(w[-1])) for w in (np.linalg.eigvalsh(d) for d in self.d_ops)]

    def to_dict(self):
        return {
            "block_dims": self.dims,
            "blocks": [b.T.tolist() for b in self.blocks],
            "mu": self.mu.tolist(),
            "mu_ratios": self.mu_ratios.tolist(),
            "root_functionals": self.root_functionals.tolist(),
            "d_eigen_ranges": [list(r) for r in self.d_eigen_ranges()],
            "h_plus": self.h_plus.tolist(),
            "h_plus_value": self.h_plus_value,
            "margin": self.margin,
            "epsilon": self.epsilon,
            "a_min": self.a_min,
            "lambda": self.lam,
            "cluster_rtol": self.cluster_rtol,
            "residuals": dict(self.residuals),
        }


def _split(q, s, scale, rtol):
    w, v = np.linalg.eigh(q.T @ s @ q)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > rtol * scale:
            groups.append([i])
        else:
            groups[-1].append(i)
    return [q @ v[:, g] for g in groups]


def compute_blocks(spec, h_plus, margin=DEFAULT_MARGIN, cluster_rtol=CLUSTER_RTOL):
    """Joint eigenspaces of ``S(e_1), ..., S(e_r)`` and the data ``mu_j``, ``D_j``."""
    alg = spec.require_valid().algebra
    if not 0.0 < margin < 1.0:
        raise ValueError(f"margin must lie in (0, 1), got {margin}")
    h_plus = np.asarray(h_plus, dtype=float)
    h_plus = h_plus / alg.norm_a(h_plus)
    f_plus = min_eig_value(alg, h_plus)
    if not f_plus > POSITIVITY_TOL:
        raise StructureError(f"S(h_plus) is not positive definite (min eig {f_plus:.3e})", code="MAX_NONPOSITIVE")

    sym = _sym_basis(alg)
    frames = [np.eye(alg.dim_n)]
    for s in sym:
        scale = float(np.abs(np.linalg.eigvalsh(s)).max())
        if scale == 0.0:
            continue
        frames = [piece for q in frames for piece in _split(q, s, scale, cluster_rtol)]

    nu = np.array([[np.trace(q.T @ s @ q) / q.shape[1] for s in sym] for q in frames])
    order = np.argsort(nu @ h_plus, kind="stable")
    frames = [frames[i] for i in order]
    nu = nu[order]

    mu = nu / alg.dual_norm_a(nu)[:, None]
    mu_plus = mu @ h_plus
    p = symmetrized_ad(alg, h_plus)
    d_ops = [q.T @ p @ q / mp for q, mp in zip(frames, mu_plus)]
    d_ops = [0.5 * (d + d.T) for d in d_ops]

    lt_inv = np.linalg.inv(alg.chol_n.T)
    blocks = [lt_inv @ q for q in frames]

    dec = HeberDecomposition(
        blocks=blocks,
        frame_blocks=frames,
        mu=mu,
        d_ops=d_ops,
        h_plus=h_plus,
        h_plus_value=f_plus,
        margin=float(margin),
        epsilon=0.0,
        a_min=float(min(np.linalg.eigvalsh(d)[0] for d in d_ops)),
        lam=0.0,
        gram_a=alg.gram_a.copy(),
        cluster_rtol=cluster_rtol,
    )
    dec.epsilon = float(margin * mu_plus.min())
    dec.lam = dec.a_min * dec.epsilon

    worst = 0.0
    for i, s in enumerate(sym):
        e = np.zeros(alg.dim_a)
        e[i] = 1.0
        denom = max(np.linalg.norm(s), 1e-300)
        worst = max(worst, np.linalg.norm(s - dec.reconstruct(e)) / denom)
    ortho = np.hstack(frames)
    dec.residuals = {
        "proportionality": float(worst),
        "block_orthogonality": float(np.abs(ortho.T @ ortho - np.eye(alg.dim_n)).max()),
        "mu_unit_norm": float(np.abs(alg.dual_norm_a(mu) - 1.0).max()),
    }
    if worst > PROPORTIONALITY_TOL:
        raise StructureError(
            f"S(H_i) is not block-proportional: relative residual {worst:.3e} > {PROPORTIONALITY_TOL:g}",
            code="PROPORTIONALITY_VIOLATION",
        )
    if np.any(mu_plus <= 0.0) or dec.a_min <= 0.0:
        raise StructureError("decomposition has non-positive mu_j(h_plus) or D_j", code="MAX_NONPOSITIVE")
    return dec


def decompose(spec, margin=DEFAULT_MARGIN, seed=0):
    """``find_h_plus`` followed by ``compute_blocks``."""
    hp = find_h_plus(spec, seed=seed)
    return compute_blocks(spec, hp.h_plus, margin=margin)


@dataclass
class Cone:
    """``C0 = {H in a : mu_j(H) <= -eps |H| for all j}``; convex, with ``-h_plus`` inside."""

    epsilon: float
    mu: np.ndarray
    gram_a: np.ndarray
    interior_point: np.ndarray

    def norm(self, h):
        h = np.asarray(h)
        return np.sqrt(np.einsum("...i,ij,...j->...", h, self.gram_a, h))

    def slack(self, h):
        """``max_j mu_j(H) + eps |H|``; ``<= 0`` exactly on the cone."""
        h = np.asarray(h, dtype=float)
        return (h @ self.mu.T).max(axis=-1) + self.epsilon * self.norm(h)

    def contains(self, h, slack=0.0):
        return self.slack(h) <= -slack


def build_cone(dec, margin=None):
    if margin is None:
        margin = dec.margin
    if not 0.0 < margin < 1.0:
        raise ValueError(f"margin must lie in (0, 1), got {margin}")
    eps = float(margin * (dec.mu @ dec.h_plus).min())
    return Cone(eps, dec.mu.copy(), dec.gram_a, -dec.h_plus)


def growth_rate(dec, margin=None):
    """``lam = a_min * eps``: pure-n Jacobi fields along ``C0`` grow at least like ``exp(lam t |H|)``."""
    if margin is None:
        return dec.a_min * dec.epsilon
    cone = build_cone(dec, margin)
    return dec.a_min * cone.epsilon
