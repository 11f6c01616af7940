"""Integral polyhedral chains, their boundary algebra, and mass by quadrature.

A chain is a dict from cells to non-zero integer multiplicities. Cells are
hashable tuples ``(kind, vertices)``:

* ``AFFINE``: ``k+1`` chart points; the cell is the chart simplex spanned
  by them.
* ``CYLINDER``: ``k+1`` pairs ``(p, t)``; the cell is the image of the
  simplex with vertices ``(t_i, p_i)`` in ``[0,1] × chart`` under
  ``(t, p) -> phi(t, p)``, i.e. ``beta -> (m0(z), u(z), t(beta) h(z))``
  with ``z = sum beta_i p_i``.

Cells are stored with sorted vertices and the permutation sign folded into
the multiplicity, so equal cells always collide and cancel exactly.
Degenerate cells (a repeated vertex) are the zero chain. A cylinder cell
whose vertices all share one ``t`` is the affine cell on ``phi(t, p_i)``.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ChainError
from .geometry import trivialize
from .quadrature import refined_rule_chunks

AFFINE = "affine"
CYLINDER = "cylinder"
KINDS = (AFFINE, CYLINDER)

# absolute per-cell floor for the convergence test (cells of zero measure)
MASS_ATOL = 1e-13


def _as_point(p):
    return tuple(float(x) + 0.0 for x in p)


def _sort_sign(verts):
    """Sorted vertex tuple and the sign of the sorting permutation; ``None`` if degenerate."""
    order = sorted(range(len(verts)), key=lambda i: verts[i])
    out = tuple(verts[i] for i in order)
    for a, b in zip(out, out[1:]):
        if a == b:
            return None, 0
    # parity via cycle decomposition
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return out, sign


@dataclass(frozen=True)
class Layout:
    dim_m0: int
    dim_n: int
    dim_a: int

    @property
    def total(self):
        return self.dim_m0 + self.dim_n + self.dim_a

    def phi_point(self, t, p):
        cut = self.dim_m0 + self.dim_n
        return p[:cut] + tuple(t * x + 0.0 for x in p[cut:])

    def project_point(self, p):
        cut = self.dim_m0 + self.dim_n
        return p[:cut] + (0.0,) * self.dim_a


def canonical_cell(layout, kind, verts, mult=1):
    """Normalize one oriented cell; returns ``(cell, mult)`` or ``(None, 0)``."""
    if kind == CYLINDER:
        verts = tuple((_as_point(p), float(t) + 0.0) for p, t in verts)
        ts = {t for _, t in verts}
        if len(ts) == 1:
            t = next(iter(ts))
            kind = AFFINE
            verts = tuple(layout.phi_point(t, p) for p, _ in verts)
    elif kind == AFFINE:
        verts = tuple(_as_point(p) for p in verts)
    else:
        raise ChainError(f"unknown cell kind {kind!r}", code="BAD_CELL")
    srt, sign = _sort_sign(verts)
    if srt is None:
        return None, 0
    return (kind, srt), sign * mult


@dataclass
class Chain:
    """Integral chain of dimension ``dim`` in a chart with block sizes ``layout``."""

    dim: int
    layout: Layout
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.layout, Layout):
            self.layout = Layout(*self.layout)
        raw, self.terms = self.terms, {}
        for (kind, verts), m in raw.items():
            self.add_cell(kind, verts, m)

    @classmethod
    def zero(cls, dim, layout):
        return cls(dim, layout)

    @classmethod
    def from_simplices(cls, dim, layout, vertices, simplices, mults=None):
        """Affine chain from a vertex table and index tuples."""
        vertices = np.asarray(vertices, dtype=float)
        out = cls(dim, layout)
        mults = [1] * len(simplices) if mults is None else mults
        for idx, m in zip(simplices, mults):
            if len(idx) != dim + 1:
                raise ChainError(f"a {dim}-cell needs {dim + 1} vertices, got {len(idx)}", code="BAD_CELL")
            out.add_cell(AFFINE, [vertices[i] for i in idx], int(m))
        return out

    def add_cell(self, kind, verts, mult=1):
        if int(mult) != mult:
            raise ChainError("multiplicities must be integers", code="BAD_CELL")
        if len(verts) != self.dim + 1:
            raise ChainError(f"a {self.dim}-cell needs {self.dim + 1} vertices, got {len(verts)}", code="BAD_CELL")
        cell, m = canonical_cell(self.layout, kind, verts, int(mult))
        if cell is None or m == 0:
            return
        new = self.terms.get(cell, 0) + m
        if new:
            self.terms[cell] = new
        else:
            del self.terms[cell]

    def copy(self):
        out = Chain(self.dim, self.layout)
        out.terms = dict(self.terms)
        return out

    def _check_compatible(self, other):
        if self.dim != other.dim or self.layout != other.layout:
            raise ChainError(
                f"incompatible chains: dim {self.dim} vs {other.dim}, layout {self.layout} vs {other.layout}",
                code="INCOMPATIBLE",
            )

    def __add__(self, other):
        self._check_compatible(other)
        out = self.copy()
        for cell, m in other.terms.items():
            out._accumulate(cell, m)
        return out

    def __neg__(self):
        out = Chain(self.dim, self.layout)
        out.terms = {c: -m for c, m in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return self.dim == other.dim and self.layout == other.layout and self.terms == other.terms

    def _accumulate(self, cell, m):
        new = self.terms.get(cell, 0) + m
        if new:
            self.terms[cell] = new
        else:
            self.terms.pop(cell, None)

    def __len__(self):
        return len(self.terms)

    def is_zero(self):
        return not self.terms

    def sorted_cells(self):
        return sorted(self.terms.items())

    def is_cycle(self):
        if self.dim == 0:
            return True
        return boundary(self).is_zero()

    def vertices(self):
        """Distinct chart points touched by the chain (cylinder cells contribute their images)."""
        pts = set()
        for (kind, verts), _ in self.terms.items():
            if kind == AFFINE:
                pts.update(verts)
            else:
                pts.update(self.layout.phi_point(t, p) for p, t in verts)
        return sorted(pts)

    def kinds(self):
        return {kind for kind, _ in self.terms}


def boundary(c):
    """Alternating face sum, normalized over the integers."""
    if c.dim < 1:
        raise ChainError("boundary of a 0-chain is not defined", code="BAD_DIMENSION")
    out = Chain(c.dim - 1, c.layout)
    for (kind, verts), m in c.sorted_cells():
        for i in range(len(verts)):
            out.add_cell(kind, verts[:i] + verts[i + 1 :], m if i % 2 == 0 else -m)
    return out


# --- pushforwards -------------------------------------------------------------

PROJECT = "project"
PHI_AT = "phi_at"
LEFT_TRANSLATE = "left_translate"


def pushforward(spec, tag, c, arg=None):
    """Vertex-wise pushforward by ``PROJECT``, ``(PHI_AT, t)`` or ``(LEFT_TRANSLATE, g)``.

    All three maps are affine in the chart along each cell, so images of
    cells are cells and the result commutes with ``boundary``.
    """
    lay = c.layout
    out = Chain(c.dim, lay)
    if tag == PROJECT:
        for (kind, verts), m in c.sorted_cells():
            pts = verts if kind == AFFINE else [p for p, _ in verts]
            out.add_cell(AFFINE, [lay.project_point(p) for p in pts], m)
        return out
    if tag == PHI_AT:
        s = float(arg)
        for (kind, verts), m in c.sorted_cells():
            if kind == AFFINE:
                out.add_cell(AFFINE, [lay.phi_point(s, p) for p in verts], m)
            else:
                out.add_cell(CYLINDER, [(p, s * t) for p, t in verts], m)
        return out
    if tag == LEFT_TRANSLATE:
        return _left_translate(spec, c, arg)
    raise ChainError(f"unknown pushforward {tag!r}", code="BAD_MAP")


def _left_translate(spec, c, g):
    from .geometry import GroupPoint, multiply

    alg = spec.algebra
    if alg.dim_n and np.abs(alg.ad_n_of(g.u)).max(initial=0.0) > 0.0:
        raise ChainError(
            "left translation by an element with non-central N-part is not chart-affine",
            code="TRANSLATION_NOT_AFFINE",
        )
    has_cyl = CYLINDER in c.kinds()
    if has_cyl and np.any(g.h != 0.0):
        raise ChainError("cylinder cells can only be translated by elements of M0 × N", code="TRANSLATION_NOT_AFFINE")
    lay = c.layout
    cache = {}

    def move(p):
        if p not in cache:
            cache[p] = _as_point(multiply(spec, g, GroupPoint.from_coords(spec, p)).coords)
        return cache[p]

    out = Chain(c.dim, lay)
    for (kind, verts), m in c.sorted_cells():
        if kind == AFFINE:
            out.add_cell(AFFINE, [move(p) for p in verts], m)
        else:
            out.add_cell(CYLINDER, [(move(p), t) for p, t in verts], m)
    return out


# --- constructions ---------------------------------------------------------


def prism_pieces(k):
    """Staircase triangulation of ``simplex_k × [0,1]``: list of (sign, [(vertex, level), ...])."""
    pieces = []
    for l in range(k + 1):
        verts = [(i, 0) for i in range(l + 1)] + [(i, 1) for i in range(l, k + 1)]
        pieces.append((1 if l % 2 == 0 else -1, verts))
    return pieces


def cylinder(z):
    """The mapping cylinder ``phi_#([0,1] × z)``, with ``boundary = z - project_#(z)``."""
    if not z.is_cycle():
        raise ChainError("cylinder needs a cycle", code="NOT_A_CYCLE")
    if CYLINDER in z.kinds():
        raise ChainError("cylinder needs an affine chain", code="BAD_CELL")
    out = Chain(z.dim + 1, z.layout)
    pieces = prism_pieces(z.dim)
    for (_, verts), m in z.sorted_cells():
        for sign, pattern in pieces:
            out.add_cell(CYLINDER, [(verts[i], float(level)) for i, level in pattern], sign * m)
    return out


def on_slice(layout, p, atol=0.0):
    cut = layout.dim_m0 + layout.dim_n
    return all(abs(x) <= atol for x in p[cut:])


def cone(z, apex):
    """Chart-straight cone from ``apex`` over ``z``; ``boundary(cone(z)) = z``."""
    lay = z.layout
    apex = _as_point(apex)
    if len(apex) != lay.total:
        raise ChainError(f"apex has {len(apex)} coordinates, expected {lay.total}", code="BAD_CELL")
    if not on_slice(lay, apex):
        raise ChainError("apex must lie on M0 × N", code="APEX_OFF_SLICE")
    if z.dim > 0 and not z.is_cycle():
        raise ChainError("cone needs a cycle", code="NOT_A_CYCLE")
    if z.dim == 0 and sum(z.terms.values()) != 0:
        raise ChainError("a 0-cycle must have total multiplicity 0", code="NOT_A_CYCLE")
    if CYLINDER in z.kinds():
        raise ChainError("cone needs an affine chain", code="BAD_CELL")
    if any(not on_slice(lay, p) for p in z.vertices()):
        raise ChainError("cone base must lie on M0 × N", code="CYCLE_OFF_SLICE")
    out = Chain(z.dim + 1, lay)
    for (_, verts), m in z.sorted_cells():
        out.add_cell(AFFINE, (apex,) + verts, m)
    return out


def chart_barycenter(points):
    pts = sorted(points)
    if not pts:
        raise ChainError("barycenter of an empty vertex set", code="EMPTY")
    return tuple(math.fsum(col) / len(pts) for col in zip(*pts))


# --- mass ----------------------------------------------------------------------


@dataclass
class QuadratureOptions:
    order: int = 7
    tol: float = 1e-6
    max_depth: int = 8
    min_depth: int = 1
    threads: int = 0  # 0 = auto

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_depth < self.min_depth:
            raise ValueError("max_depth must be >= min_depth")

    def resolved_threads(self):
        if self.threads and self.threads > 0:
            return int(self.threads)
        env = os.environ.get("ISOFILL_THREADS")
        if env:
            return max(1, int(env))
        return max(1, min(8, os.cpu_count() or 1))

    def to_dict(self):
        return {"order": self.order, "tol": self.tol, "max_depth": self.max_depth, "min_depth": self.min_depth}


@dataclass
class MassResult:
    value: float
    error_bound: float
    cells_evaluated: int
    nodes: int
    depth_cap_reached: bool = False
    max_depth_used: int = 0

    def to_dict(self):
        return {
            "value": self.value,
            "error_bound": self.error_bound,
            "cells_evaluated": self.cells_evaluated,
            "nodes": self.nodes,
            "depth_cap_reached": self.depth_cap_reached,
            "max_depth_used": self.max_depth_used,
        }


def cell_parametrization(layout, kind, verts, bary):
    """Chart points ``(P, D)`` and chart tangents ``(P, D, k)`` of a cell at barycentric nodes."""
    if kind == AFFINE:
        v = np.array(verts)
        pts = bary @ v
        tang = (v[1:] - v[0]).T
        return pts, np.broadcast_to(tang, (len(bary),) + tang.shape)
    p = np.array([q for q, _ in verts])
    tv = np.array([t for _, t in verts])
    z = bary @ p
    t = bary @ tv
    cut = layout.dim_m0 + layout.dim_n
    pts = z.copy()
    pts[:, cut:] *= t[:, None]
    dp = (p[1:] - p[0]).T  # (D, k)
    dt = tv[1:] - tv[0]  # (k,)
    tang = np.broadcast_to(dp, (len(bary),) + dp.shape).copy()
    tang[:, cut:, :] = t[:, None, None] * dp[None, cut:, :] + z[:, cut:, None] * dt[None, None, :]
    return pts, tang


def _small_det(m):
    """Determinant of a stack ``(P, k, k)`` with closed forms for ``k <= 3``."""
    k = m.shape[-1]
    if k == 1:
        return m[:, 0, 0]
    if k == 2:
        return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    if k == 3:
        return (
            m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
            - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
            + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
        )
    return np.linalg.det(m)


def _density(spec, pts, tang, signed):
    t_orth = trivialize(spec, pts, tang)
    k = t_orth.shape[-1]
    if signed:
        if k != t_orth.shape[-2]:
            raise ChainError("signed volume needs top-dimensional cells", code="BAD_DIMENSION")
        return _small_det(t_orth)
    if k == 1:
        return np.sqrt(np.einsum("pi,pi->p", t_orth[..., 0], t_orth[..., 0]))
    cols = [np.ascontiguousarray(t_orth[..., a]) for a in range(k)]
    gram = np.empty((len(t_orth), k, k))
    for a in range(k):
        for b in range(a, k):
            gram[:, a, b] = gram[:, b, a] = np.einsum("pi,pi->p", cols[a], cols[b])
    return np.sqrt(np.maximum(_small_det(gram), 0.0))


def cell_density(spec, kind, verts, bary, signed=False):
    """k-Jacobian of the cell parametrization at the nodes (signed determinant if ``signed``)."""
    pts, tang = cell_parametrization(Layout(*spec.layout), kind, verts, bary)
    return _density(spec, pts, tang, signed)


@lru_cache(maxsize=None)
def _gauss_legendre(n, pieces):
    """Composite Gauss-Legendre nodes and weights on [0, 1] with ``pieces`` equal panels."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    left = np.arange(pieces) / pieces
    nodes = (left[:, None] + x[None, :] / pieces).ravel()
    weights = np.tile(w / pieces, pieces)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class _SimplexUnit:
    """One cell integrated with the symmetric simplex rule."""

    def __init__(self, kind, verts, k):
        self.kind, self.verts, self.k = kind, verts, k
        self.key = ("cell", kind, verts)

    def level(self, spec, opts, depth, signed):
        parts, nodes = [], 0
        for bary, w in refined_rule_chunks(self.k, opts.order, depth):
            parts.append(math.fsum(w * cell_density(spec, self.kind, self.verts, bary, signed)))
            nodes += len(w)
        return math.fsum(parts), nodes


class _PrismUnit:
    """All staircase pieces of ``base × [t0, t1]`` under the cylinder map, integrated together.

    The pieces tile the prism with a common orientation, so the sum of their
    integrals is the integral over the prism. A tensor rule (simplex rule on
    the base, Gauss-Legendre with ``order + 1`` nodes in ``t``) resolves the
    exponential growth along the normal geodesics without refining the base.
    Orientation is that of ``(d/dt, base tangents)``.
    """

    def __init__(self, base, t0, t1):
        self.base, self.t0, self.t1 = base, t0, t1
        self.kb = len(base) - 1
        self.key = ("prism", base, t0, t1)

    def level(self, spec, opts, depth, signed):
        lay = Layout(*spec.layout)
        cut = lay.dim_m0 + lay.dim_n
        b = np.array(self.base)
        db = (b[1:] - b[0]).T  # (D, kb)
        s, ws = _gauss_legendre(opts.order + 1, 2**depth)
        span = self.t1 - self.t0
        ts = self.t0 + span * s
        wt = span * ws
        nt = len(ts)
        parts, nodes = [], 0
        for bary, w in refined_rule_chunks(self.kb, opts.order, depth, max_points=max(1, (1 << 20) // nt)):
            z = bary @ b  # (P, D)
            npts = len(z)
            pts = np.repeat(z, nt, axis=0)
            tt = np.tile(ts, npts)
            pts[:, cut:] *= tt[:, None]
            tang = np.zeros((npts * nt, lay.total, self.kb + 1))
            tang[:, cut:, 0] = np.repeat(z[:, cut:], nt, axis=0)
            tang[:, :, 1:] = db[None]
            tang[:, cut:, 1:] *= tt[:, None, None]
            weights = np.outer(w, wt).ravel()
            parts.append(math.fsum(weights * _density(spec, pts, tang, signed)))
            nodes += len(weights)
        return math.fsum(parts), nodes


def _collect_units(c):
    """Split a chain into prism units (complete staircase families) and single simplex cells."""
    k = c.dim
    units = []
    groups = {}
    for cell, m in c.sorted_cells():
        kind, verts = cell
        if kind == CYLINDER and k >= 1:
            base = tuple(sorted({p for p, _ in verts}))
            ts = sorted({t for _, t in verts})
            if len(base) == k and len(ts) == 2:
                groups.setdefault((base, ts[0], ts[1]), []).append((cell, m))
                continue
        units.append((m, _SimplexUnit(kind, verts, k)))
    for (base, t0, t1), members in sorted(groups.items()):
        have = dict(members)
        expect = []
        for sign, pattern in prism_pieces(k - 1):
            cell, s = canonical_cell(Layout(0, 0, 0), CYLINDER, [(base[i], t0 if lvl == 0 else t1) for i, lvl in pattern], sign)
            expect.append((cell, s))
        mult = None
        if len(have) == len(expect) and all(cell in have for cell, _ in expect):
            ratios = {have[cell] * s for cell, s in expect}  # s is +-1
            if len(ratios) == 1:
                mult = ratios.pop()
        if mult is None:
            units.extend((m, _SimplexUnit(cell[0], cell[1], k)) for cell, m in members)
        else:
            units.append((mult, _PrismUnit(base, t0, t1)))
    units.sort(key=lambda item: item[1].key)
    return units


@dataclass
class _UnitState:
    value: float
    error: float
    depth: int
    nodes: int


def _refine(spec, unit, opts, signed, state):
    cur, n = unit.level(spec, opts, state.depth + 1, signed)
    return _UnitState(cur, abs(cur - state.value), state.depth + 1, state.nodes + n)


def _start(spec, unit, opts, signed):
    value, n = unit.level(spec, opts, 0, signed)
    state = _UnitState(value, math.inf, 0, n)
    while state.depth < opts.min_depth:
        state = _refine(spec, unit, opts, signed, state)
    return state


def _mass_impl(spec, c, opts, signed):
    """Globally adaptive uniform refinement.

    Every unit (a cell, or a whole prism of cylinder cells) starts at
    ``min_depth``. While the summed error estimate exceeds ``tol`` times the
    total, each unit whose weighted error exceeds its even share of that
    budget moves one dyadic level deeper. Units are visited in canonical
    order and reduced with ``math.fsum``, so the result does not depend on
    the number of threads.
    """
    opts = opts or QuadratureOptions()
    if (c.layout.dim_m0, c.layout.dim_n, c.layout.dim_a) != tuple(spec.layout):
        raise ChainError(f"chain layout {c.layout} does not match spec layout {spec.layout}", code="INCOMPATIBLE")
    if c.dim == 0:
        cells = c.sorted_cells()
        vals = [float(m) if signed else float(abs(m)) for _, m in cells]
        return MassResult(math.fsum(vals), 0.0, len(cells), len(cells))
    units = _collect_units(c)
    weights = [m if signed else abs(m) for m, _ in units]
    threads = opts.resolved_threads()
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 and len(units) > 1 else None

    def run(fn, items):
        return list(pool.map(fn, items)) if pool else [fn(x) for x in items]

    try:
        states = run(lambda item: _start(spec, item[1], opts, signed), units)
        capped = False
        while True:
            scale = math.fsum(abs(w * st.value) for w, st in zip(weights, states))
            budget = opts.tol * scale + MASS_ATOL * len(units)
            total_err = math.fsum(abs(w) * st.error for w, st in zip(weights, states))
            if total_err <= budget:
                break
            todo = [i for i, (w, st) in enumerate(zip(weights, states)) if abs(w) * st.error > budget / len(units)]
            ready = [i for i in todo if states[i].depth < opts.max_depth]
            if len(ready) < len(todo):
                capped = True
            if not ready:
                break
            fresh = run(lambda i: _refine(spec, units[i][1], opts, signed, states[i]), ready)
            for i, st in zip(ready, fresh):
                states[i] = st
    finally:
        if pool:
            pool.shutdown()
    value = math.fsum(w * st.value for w, st in zip(weights, states))
    err = math.fsum(abs(w) * st.error for w, st in zip(weights, states))
    return MassResult(
        value=value,
        error_bound=err,
        cells_evaluated=len(c),
        nodes=sum(st.nodes for st in states),
        depth_cap_reached=capped,
        max_depth_used=max((st.depth for st in states), default=0),
    )


def mass(spec, c, opts=None):
    """Sum over cells of ``|multiplicity| * integral of the k-Jacobian``."""
    return _mass_impl(spec, c, opts, signed=False)


def signed_volume(spec, c, opts=None):
    """Oriented volume of a top-dimensional chain (overlaps with opposite orientation cancel)."""
    if c.dim != spec.dim_M:
        raise ChainError("signed volume needs a top-dimensional chain", code="BAD_DIMENSION")
    return _mass_impl(spec, c, opts, signed=True)
