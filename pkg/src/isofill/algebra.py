"""Metric solvable Lie algebras g = a ⊕ n and the manifold models built from them.

A :class:`MetricLieAlgebra` stores structure constants in a fixed basis,
an inner product (the left-invariant metric at the identity) and the split
of the basis into an abelian part ``a`` and a nilpotent ideal ``n``.
:class:`ManifoldSpec` adds a flat euclidean factor of dimension ``dim_m0``.

Vectors in ``g`` use the full input basis. Vectors in ``a`` or ``n`` use the
sub-basis given by ``a_idx`` / ``n_idx`` (in that order).
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import SpecError
from .expm import expm

ALGEBRA_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MetricLieAlgebra:
    basis: tuple
    a_idx: tuple
    n_idx: tuple
    structure_constants: tuple  # (i, j, k, c): [e_i, e_j] += c e_k
    gram: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(str(b) for b in self.basis))
        object.__setattr__(self, "a_idx", tuple(int(i) for i in self.a_idx))
        object.__setattr__(self, "n_idx", tuple(int(i) for i in self.n_idx))
        consts = tuple((int(i), int(j), int(k), float(c)) for i, j, k, c in self.structure_constants)
        object.__setattr__(self, "structure_constants", consts)
        gram = np.array(self.gram, dtype=float)
        object.__setattr__(self, "gram", gram)

        n = len(self.basis)
        if n == 0:
            raise SpecError("empty basis")
        if gram.shape != (n, n):
            raise SpecError(f"gram must be {n}x{n}, got {gram.shape}")
        if not np.all(np.isfinite(gram)):
            raise SpecError("gram has non-finite entries")
        if not self.a_idx or not self.n_idx:
            raise SpecError("both a_idx and n_idx must be non-empty")
        if sorted(self.a_idx + self.n_idx) != list(range(n)):
            raise SpecError("a_idx and n_idx must partition the basis indices 0..dim-1")
        for i, j, k, c in consts:
            if not all(0 <= x < n for x in (i, j, k)):
                raise SpecError(f"structure constant index out of range: {(i, j, k)}")
            if not np.isfinite(c):
                raise SpecError(f"non-finite structure constant at {(i, j, k)}")

    @classmethod
    def from_brackets(cls, basis, a_idx, n_idx, brackets, gram=None):
        """Build from a dict ``{(i, j): {k: c}}``; the (j, i) entries are filled in by antisymmetry."""
        consts = []
        for (i, j), out in brackets.items():
            for k, c in out.items():
                consts.append((i, j, k, c))
                consts.append((j, i, k, -c))
        if gram is None:
            gram = np.eye(len(basis))
        return cls(tuple(basis), tuple(a_idx), tuple(n_idx), tuple(consts), gram)

    # --- sizes -----------------------------------------------------------

    @property
    def dim_total(self):
        return len(self.basis)

    @property
    def dim_a(self):
        return len(self.a_idx)

    @property
    def dim_n(self):
        return len(self.n_idx)

    # --- cached tensors --------------------------------------------------

    @cached_property
    def tensor(self):
        """Dense ``c[i, j, k]`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``."""
        n = self.dim_total
        c = np.zeros((n, n, n))
        for i, j, k, v in self.structure_constants:
            c[i, j, k] += v
        c.setflags(write=False)
        return c

    @cached_property
    def _a(self):
        return np.array(self.a_idx)

    @cached_property
    def _n(self):
        return np.array(self.n_idx)

    @cached_property
    def gram_a(self):
        return self.gram[np.ix_(self._a, self._a)]

    @cached_property
    def gram_n(self):
        return self.gram[np.ix_(self._n, self._n)]

    @cached_property
    def chol_a(self):
        return np.linalg.cholesky(_sym(self.gram_a))

    @cached_property
    def chol_n(self):
        return np.linalg.cholesky(_sym(self.gram_n))

    @cached_property
    def ad_a(self):
        """``ad(e_a)|n`` for every a-basis vector, shape ``(dim_a, dim_n, dim_n)``."""
        full = np.einsum("ijk->ikj", self.tensor)  # full[i] = ad(e_i)
        out = full[np.ix_(self._a, self._n, self._n)].copy()
        out.setflags(write=False)
        return out

    @cached_property
    def ad_n(self):
        """``ad(e_n)|n`` for every n-basis vector, shape ``(dim_n, dim_n, dim_n)``."""
        full = np.einsum("ijk->ikj", self.tensor)
        out = full[np.ix_(self._n, self._n, self._n)].copy()
        out.setflags(write=False)
        return out

    @cached_property
    def tensor_n(self):
        """Structure constants of n alone, in n-coordinates."""
        out = self.tensor[np.ix_(self._n, self._n, self._n)].copy()
        out.setflags(write=False)
        return out

    @cached_property
    def ad_a_diagonal(self):
        off = self.ad_a.copy()
        for m in off:
            np.fill_diagonal(m, 0.0)
        return not np.any(off)

    @cached_property
    def nilpotency_degree(self):
        """Length of the lower central series of n, or ``None`` if it does not reach 0."""
        return _lower_central_length(self)

    # --- vectors ---------------------------------------------------------

    def embed_a(self, h):
        h = np.asarray(h, dtype=float)
        out = np.zeros(h.shape[:-1] + (self.dim_total,), dtype=h.dtype)
        out[..., self._a] = h
        return out

    def embed_n(self, u):
        u = np.asarray(u)
        out = np.zeros(u.shape[:-1] + (self.dim_total,), dtype=np.result_type(u, float))
        out[..., self._n] = u
        return out

    def split(self, x):
        """Return the (a-part, n-part) coordinates of ``x`` in g."""
        x = np.asarray(x)
        return x[..., self._a], x[..., self._n]

    def _check_g(self, *vecs):
        for v in vecs:
            if np.shape(v)[-1:] != (self.dim_total,):
                raise ValueError(f"expected vectors of dimension {self.dim_total}, got shape {np.shape(v)}")

    # --- operations ------------------------------------------------------

    def bracket(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        self._check_g(x, y)
        return np.einsum("...i,...j,ijk->...k", x, y, self.tensor)

    def ad_matrix(self, h, restrict_to_n=False):
        """Matrix of ``ad(h)`` on g, or on n when ``restrict_to_n``."""
        h = np.asarray(h, dtype=float)
        self._check_g(h)
        full = np.einsum("...i,ijk->...kj", h, self.tensor)
        if not restrict_to_n:
            return full
        leak = full[..., self._a, :][..., :, self._n]
        if np.any(np.abs(leak) > ALGEBRA_TOL):
            raise SpecError("cannot restrict ad to n: n is not an ideal", code="NOT_AN_IDEAL")
        return full[..., self._n, :][..., :, self._n]

    def bracket_n(self, u, v):
        """Bracket of two n-vectors given in n-coordinates (batched)."""
        return np.einsum("...i,...j,ijk->...k", u, v, self.tensor_n)

    def ad_n_of(self, u):
        """``ad(u)|n`` for n-coordinates ``u`` (batched)."""
        return np.einsum("...i,ijk->...jk", np.asarray(u), self.ad_n)

    def ad_a_of(self, h):
        """``ad(h)|n`` for a-coordinates ``h`` (batched)."""
        return np.einsum("...i,ijk->...jk", np.asarray(h), self.ad_a)

    def ad_exp(self, h, t=1.0):
        """``exp(t ad(h))|n = Ad(exp(t h))|n`` for ``h`` in a (batched over leading axes)."""
        h = np.asarray(h)
        if h.shape[-1:] != (self.dim_a,):
            raise ValueError(f"expected a-vectors of dimension {self.dim_a}, got shape {h.shape}")
        th = t * h
        if self.ad_a_diagonal:
            rates = np.einsum("ijj->ij", self.ad_a)
            d = np.exp(th @ rates)
            out = np.zeros(d.shape + (self.dim_n,), dtype=d.dtype)
            idx = np.arange(self.dim_n)
            out[..., idx, idx] = d
            return out
        return expm(self.ad_a_of(th))

    def exp_ad(self, x, t=1.0, restrict_to_n=False):
        """``exp(t ad(x))`` for any ``x`` in g.

        For ``x`` in n the power series terminates and is summed exactly;
        otherwise the Padé exponential is used.
        """
        x = np.asarray(x, dtype=float)
        self._check_g(x)
        a_part, _ = self.split(x)
        m = t * self.ad_matrix(x)
        if np.any(a_part):
            out = expm(m)
        else:
            out = _terminating_exp(m, self.dim_total + 1)
        if restrict_to_n:
            out = out[..., self._n, :][..., :, self._n]
        return out

    def norm(self, x):
        x = np.asarray(x)
        return np.sqrt(np.einsum("...i,ij,...j->...", x, self.gram, x))

    def norm_a(self, h):
        h = np.asarray(h)
        return np.sqrt(np.einsum("...i,ij,...j->...", h, self.gram_a, h))

    def norm_n(self, u):
        u = np.asarray(u)
        return np.sqrt(np.abs(np.einsum("...i,ij,...j->...", u, self.gram_n, u)))

    def dual_norm_a(self, m):
        """Norm of a covector on a (coefficients w.r.t. the a-basis)."""
        m = np.asarray(m)
        return np.sqrt(np.einsum("...i,ij,...j->...", m, np.linalg.inv(self.gram_a), m))

    def to_dict(self):
        return {
            "basis": list(self.basis),
            "a_idx": list(self.a_idx),
            "n_idx": list(self.n_idx),
            "structure_constants": [list(c) for c in self.structure_constants],
            "gram": self.gram.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ManifoldSpec:
    """M = M0 × G with M0 = R^dim_m0 flat and G = N ⋊ A."""

    algebra: MetricLieAlgebra
    dim_m0: int = 0
    name: str = ""

    def __post_init__(self):
        if int(self.dim_m0) < 0:
            raise SpecError("dim_m0 must be non-negative")
        object.__setattr__(self, "dim_m0", int(self.dim_m0))

    @property
    def rank(self):
        return self.dim_m0 + self.algebra.dim_a

    @property
    def dim_M(self):
        return self.dim_m0 + self.algebra.dim_total

    @property
    def layout(self):
        """Chart coordinate block sizes (m0, u, h)."""
        return (self.dim_m0, self.algebra.dim_n, self.algebra.dim_a)

    @cached_property
    def report(self):
        return validate(self)

    def require_valid(self):
        if not self.report.ok:
            failed = ", ".join(c.name for c in self.report.checks if not c.passed)
            raise SpecError(f"spec {self.name or '<unnamed>'} failed validation: {failed}", code="VALIDATION_FAILED")
        return self

    def to_dict(self):
        return {"name": self.name, "dim_m0": self.dim_m0, **self.algebra.to_dict()}


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    nilpotency_degree: object = None

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "ok": self.ok,
            "nilpotency_degree": self.nilpotency_degree,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail} for c in self.checks
            ],
        }


def validate(spec):
    """Check every structural hypothesis on ``spec`` and report residuals."""
    alg = spec.algebra
    c = alg.tensor
    a, n = alg._a, alg._n
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    checks = []

    def add(name, residual, tol, detail=""):
        checks.append(Check(name, bool(residual <= tol), float(residual), detail))

    add("antisymmetry", np.abs(c + c.transpose(1, 0, 2)).max(initial=0.0), ALGEBRA_TOL * scale)

    # J[i,j,k] = [e_i,[e_j,e_k]] + [e_j,[e_k,e_i]] + [e_k,[e_i,e_j]]
    inner = np.einsum("jkl,ilm->ijkm", c, c)
    jac = inner + inner.transpose(1, 2, 0, 3) + inner.transpose(2, 0, 1, 3)
    jac_norm = np.linalg.norm(jac.reshape(-1, alg.dim_total), axis=1).max(initial=0.0)
    add("jacobi_identity", jac_norm, ALGEBRA_TOL * scale**2)

    leak = max(np.abs(c[:, n][:, :, a]).max(initial=0.0), np.abs(c[n][:, :, a]).max(initial=0.0))
    add("n_is_ideal", leak, ALGEBRA_TOL * scale, "[g, n] ⊆ n")

    add("a_is_abelian", np.abs(c[a][:, a]).max(initial=0.0), ALGEBRA_TOL * scale, "[a, a] = 0")

    degree = alg.nilpotency_degree
    checks.append(
        Check(
            "n_is_nilpotent",
            degree is not None,
            0.0 if degree is not None else 1.0,
            f"lower central series length {degree}" if degree is not None else "series does not reach 0",
        )
    )

    g = alg.gram
    add("gram_symmetric", np.abs(g - g.T).max(), ALGEBRA_TOL * max(1.0, np.abs(g).max()))
    min_eig = float(np.linalg.eigvalsh(_sym(g)).min())
    checks.append(Check("gram_positive_definite", min_eig > 0.0, min_eig, "minimum eigenvalue"))
    add("a_orthogonal_to_n", np.abs(g[np.ix_(a, n)]).max(), ALGEBRA_TOL * max(1.0, np.abs(g).max()))

    return ValidationReport(checks, degree)


def _sym(m):
    return 0.5 * (m + m.T)


def _terminating_exp(m, max_terms):
    out = np.broadcast_to(np.eye(m.shape[-1]), m.shape).copy()
    term = out.copy()
    for k in range(1, max_terms + 1):
        term = term @ m / k
        if not np.any(term):
            return out
        out = out + term
    return out


def _span(vectors, tol=1e-9):
    if len(vectors) == 0:
        return np.zeros((0, 0))
    mat = np.array(vectors)
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, mat.shape[1]))
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vt[:r]


def _lower_central_length(alg):
    """Smallest c with n^(c+1) = 0, where n^(1) = n and n^(i+1) = [n, n^(i)]."""
    basis_n = np.eye(alg.dim_total)[alg._n]
    current = basis_n
    for degree in range(1, alg.dim_n + 1):
        nxt = [alg.bracket(x, y) for x in basis_n for y in current]
        current = _span(nxt)
        if current.shape[0] == 0:
            return degree
    return None
