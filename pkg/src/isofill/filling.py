"""Linear isoperimetric fillings.

Pipeline for a k-cycle ``z`` with ``rank <= k < dim M``:

1. left-translate ``z`` by ``exp_A(-tau h_plus)`` until every vertex lies in
   the cone ``C0`` with clearance ``rho`` from ``M0 × N``;
2. ``V1 = cylinder(z')`` sweeps ``z'`` down the normal geodesics onto
   ``M0 × N``;
3. ``V2`` is the chart cone over the projected cycle from its barycenter;
4. ``V = V1 + V2`` has ``boundary(V) = z'`` exactly, and every mass is measured.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .currents import (
    LEFT_TRANSLATE,
    PROJECT,
    Chain,
    MassResult,
    QuadratureOptions,
    boundary,
    chart_barycenter,
    cone,
    cylinder,
    mass,
    pushforward,
)
from .errors import FillingError
from .geometry import exp_a
from .structure import build_cone, decompose

CONE_SLACK = 1e-9
TAU_CAP = 1e6
REPORT_SCHEMA = "isofill.filling_report/1"


@dataclass
class FillingConfig:
    rho: float = 10.0
    margin: float = 0.5
    seed: int = 0
    quadrature: QuadratureOptions = field(default_factory=QuadratureOptions)

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 0.0 < self.margin < 1.0:
            raise ValueError(f"margin must lie in (0, 1), got {self.margin}")


@dataclass
class Translation:
    direction: np.ndarray  # unit vector in a
    distance: float
    d_min: float  # certified lower bound for |h| over the translated support
    d_max: float  # max |h| over the translated vertices
    capped: bool = False

    @property
    def element(self):
        return self.distance * self.direction

    def to_dict(self):
        return {
            "direction": self.direction.tolist(),
            "distance": self.distance,
            "d_min": self.d_min,
            "d_max": self.d_max,
            "capped": self.capped,
        }


def check_rank(spec, k):
    if not spec.rank <= k < spec.dim_M:
        raise FillingError(
            f"linear fillings need rank <= k < dim M; got k={k}, rank={spec.rank}, dim M={spec.dim_M}",
            code="RANK_RANGE",
        )


def _vertex_h(spec, z):
    dm0, dn, _ = spec.layout
    pts = np.array(z.vertices(), dtype=float).reshape(-1, sum(spec.layout))
    return pts[:, dm0 + dn :]


def translation_distance(spec, dec, h_vertices, rho, margin=None):
    """Smallest ``tau >= 0`` putting every ``h - tau h_plus`` in the cone with clearance ``rho``.

    The cone condition along ``tau`` is a convex function of ``tau`` that
    tends to ``-inf``, so each vertex is feasible on a half-line
    ``[tau_v, inf)`` and bisection finds ``tau_v``. The clearance uses the
    linear functional ``<h, -h_plus>``, which bounds ``|h|`` from below
    everywhere on the convex hull of the vertices.
    """
    alg = spec.algebra
    cone_ = build_cone(dec, margin)
    hp = dec.h_plus
    h = np.asarray(h_vertices, dtype=float).reshape(-1, alg.dim_a)
    if len(h) == 0:
        return 0.0, False

    def bad(tau):
        moved = h - tau[:, None] * hp
        return cone_.slack(moved) > -CONE_SLACK

    gh = h @ alg.gram_a @ hp
    tau_rho = np.maximum(rho + gh, 0.0)

    lo = np.zeros(len(h))
    hi = np.ones(len(h))
    ok0 = ~bad(lo)
    grow = ~ok0
    while np.any(grow & bad(hi)) and hi.max() < TAU_CAP:
        hi = np.where(grow & bad(hi), hi * 2.0, hi)
    hi = np.minimum(hi, TAU_CAP)
    capped = bool(np.any(grow & bad(hi)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        b = bad(mid)
        lo = np.where(grow & b, mid, lo)
        hi = np.where(grow & ~b, mid, hi)
        if np.all(hi - lo <= 1e-13 * np.maximum(hi, 1.0)):
            break
    tau_cone = np.where(ok0, 0.0, hi)
    tau = float(max(tau_rho.max(), tau_cone.max()))
    # absorb rounding in the translated coordinates
    for _ in range(64):
        moved = h - tau * hp
        if np.all(cone_.slack(moved) <= -CONE_SLACK) and np.all(-(moved @ alg.gram_a @ hp) >= rho):
            break
        tau = tau * (1 + 1e-12) + 1e-12
    if tau > TAU_CAP:
        tau, capped = TAU_CAP, True
    return tau, capped


def ensure_in_cone(spec, dec, z, rho, margin=None):
    """Left-translate ``z`` by ``exp_A(-tau h_plus)`` into the cone region; returns ``(z', Translation)``."""
    alg = spec.algebra
    direction = -dec.h_plus
    tau, capped = translation_distance(spec, dec, _vertex_h(spec, z), rho, margin)
    g = exp_a(spec, tau * direction)
    moved = pushforward(spec, LEFT_TRANSLATE, z, g) if tau > 0 else z.copy()
    hv = _vertex_h(spec, moved)
    if len(hv):
        d_min = float((hv @ alg.gram_a @ direction).min())
        d_max = float(alg.norm_a(hv).max())
    else:
        d_min = d_max = 0.0
    return moved, Translation(direction.copy(), tau, d_min, d_max, capped)


@dataclass
class Filling:
    V: Chain
    V1: Chain
    V2: Chain
    cycle: Chain  # the translated cycle that V fills
    projected: Chain
    apex: tuple
    translation: Translation
    boundary_verified: bool


def build_filling(spec, dec, z, rho, margin=None):
    """Construct ``V = cylinder(z') + cone(project_#(z'))`` and verify ``boundary(V) = z'``."""
    check_rank(spec, z.dim)
    if not z.is_cycle():
        raise FillingError("input chain is not a cycle", code="NOT_A_CYCLE")
    moved, tr = ensure_in_cone(spec, dec, z, rho, margin)
    v1 = cylinder(moved)
    pz = pushforward(spec, PROJECT, moved)
    if pz.is_zero():
        apex = tuple(0.0 for _ in range(sum(spec.layout)))
        v2 = Chain(z.dim + 1, moved.layout)
    else:
        apex = chart_barycenter(pz.vertices())
        v2 = cone(pz, apex)
    v = v1 + v2
    ok = boundary(v) == moved
    if not ok:
        raise FillingError("boundary(V) differs from the translated cycle", code="BOUNDARY_MISMATCH")
    return Filling(v, v1, v2, moved, pz, apex, tr, ok)


@dataclass
class FillingReport:
    spec_name: str
    k: int
    mass_Z: MassResult
    mass_V1: MassResult
    mass_piZ: MassResult
    mass_V2: MassResult
    lam: float
    epsilon: float
    margin: float
    rho: float
    translation: Translation
    boundary_verified: bool
    quadrature: QuadratureOptions
    warnings: list = field(default_factory=list)

    @property
    def ratio(self):
        if self.mass_Z.value == 0.0:
            return 0.0
        return (self.mass_V1.value + self.mass_V2.value) / self.mass_Z.value

    @property
    def bound_V1(self):
        return 1.0 / self.lam

    @property
    def sharp_bound_V1(self):
        """``(1 - exp(-lam d_max)) / lam``."""
        return -math.expm1(-self.lam * self.translation.d_max) / self.lam

    @property
    def projection_bound(self):
        """``exp(-lam d_min)``."""
        return math.exp(-self.lam * self.translation.d_min)

    @property
    def measured_cone_constant(self):
        if self.mass_piZ.value == 0.0:
            return 0.0
        return self.mass_V2.value / self.mass_piZ.value

    def checks(self):
        mz, ez = self.mass_Z.value, self.mass_Z.error_bound
        tol = self.quadrature.tol
        v1_lim = self.sharp_bound_V1 * (mz + ez) * (1 + tol) + self.mass_V1.error_bound
        pi_lim = self.projection_bound * (mz + ez) * (1 + tol) + self.mass_piZ.error_bound
        return {
            "boundary": self.boundary_verified,
            "v1_bound": bool(self.mass_V1.value <= v1_lim),
            "projection_contraction": bool(self.mass_piZ.value <= pi_lim),
        }

    def to_dict(self):
        return {
            "schema": REPORT_SCHEMA,
            "spec": self.spec_name,
            "k": self.k,
            "mass_Z": self.mass_Z.to_dict(),
            "mass_V1": self.mass_V1.to_dict(),
            "mass_piZ": self.mass_piZ.to_dict(),
            "mass_V2": self.mass_V2.to_dict(),
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "margin": self.margin,
            "rho": self.rho,
            "translation": self.translation.to_dict(),
            "ratio": self.ratio,
            "bound_V1": self.bound_V1,
            "sharp_bound_V1": self.sharp_bound_V1,
            "projection_bound": self.projection_bound,
            "measured_cone_constant": self.measured_cone_constant,
            "boundary_verified": self.boundary_verified,
            "checks": self.checks(),
            "quadrature": self.quadrature.to_dict(),
            "warnings": list(self.warnings),
        }


def fill(spec, z, config=None, dec=None):
    """Fill ``z`` and measure everything; returns ``(Filling, FillingReport)``."""
    config = config or FillingConfig()
    spec.require_valid()
    check_rank(spec, z.dim)
    if dec is None:
        dec = decompose(spec, margin=config.margin, seed=config.seed)
    cone_ = build_cone(dec, config.margin)
    lam = dec.a_min * cone_.epsilon
    f = build_filling(spec, dec, z, config.rho, config.margin)
    q = config.quadrature
    masses = [mass(spec, c, q) for c in (f.cycle, f.V1, f.projected, f.V2)]
    warnings = []
    if any(m.depth_cap_reached for m in masses):
        warnings.append("DEPTH_CAP_REACHED")
    if f.translation.capped:
        warnings.append("TRANSLATION_CAPPED")
    report = FillingReport(
        spec_name=spec.name,
        k=z.dim,
        mass_Z=masses[0],
        mass_V1=masses[1],
        mass_piZ=masses[2],
        mass_V2=masses[3],
        lam=lam,
        epsilon=cone_.epsilon,
        margin=config.margin,
        rho=config.rho,
        translation=f.translation,
        boundary_verified=f.boundary_verified,
        quadrature=q,
        warnings=warnings,
    )
    return f, report


# --- scale sweeps ---------------------------------------------------------------

DRIFT_LIMIT = 0.05


@dataclass
class SweepRow:
    scale: float
    report: FillingReport

    def as_tuple(self):
        r = self.report
        return (self.scale, r.mass_Z.value, r.mass_V1.value, r.mass_piZ.value, r.mass_V2.value, r.ratio)


@dataclass
class SweepResult:
    rows: list

    @property
    def ratios(self):
        return [row.report.ratio for row in self.rows]

    @property
    def empirical_constant(self):
        return max(self.ratios, default=0.0)

    @property
    def super_linear(self):
        """Ratios rise monotonically by more than 5% across the top decade of scales."""
        if not self.rows:
            return False
        top = max(row.scale for row in self.rows)
        sel = [row.report.ratio for row in sorted(self.rows, key=lambda r: r.scale) if row.scale >= top / 10]
        if len(sel) < 2:
            return False
        rising = all(b >= a for a, b in zip(sel, sel[1:]))
        return rising and sel[-1] > sel[0] * (1 + DRIFT_LIMIT)


def verify_theorem(spec, family, scales, config=None):
    """Fill ``family(scale)`` for each scale, reusing one decomposition."""
    config = config or FillingConfig()
    dec = decompose(spec, margin=config.margin, seed=config.seed)
    rows = []
    for s in scales:
        _, report = fill(spec, family(s), config, dec)
        rows.append(SweepRow(float(s), report))
    return SweepResult(rows)


# --- closed-form cross-check for symmetric spaces ------------------------------


def symmetric_cone_check(eigenvalues, H_norm, k, t, lam=None, flat_dims=0):
    """Worst-case k-frame volume factor of sinh Jacobi fields, checked against ``exp(-lam (1-t) |H|)``.

    Along a geodesic of length ``|H|`` in a symmetric space, a Jacobi field
    vanishing at ``t = 0`` with unit value at ``t = 1`` has norm
    ``sinh(l_i t)/sinh(l_i)`` in a curved eigendirection and ``t`` in a flat
    one. The factor is the product of the ``k`` largest such values, which
    includes a curved direction whenever ``k > flat_dims``.
    """
    eig = np.asarray(eigenvalues, dtype=float)
    if np.any(eig <= 0):
        raise FillingError("eigenvalues must be positive", code="EIGENVALUE_BELOW_THRESHOLD")
    if lam is None:
        lam = float(eig.min() / H_norm)
    elif np.any(eig < lam * H_norm * (1 - 1e-12)):
        raise FillingError(
            f"eigenvalue {eig.min():g} below lam*|H| = {lam * H_norm:g}", code="EIGENVALUE_BELOW_THRESHOLD"
        )
    if not flat_dims < k <= flat_dims + len(eig):
        raise FillingError(f"frame size {k} must exceed the {flat_dims} flat directions", code="RANK_RANGE")
    factors = np.concatenate([np.full(flat_dims, float(t)), np.sinh(eig * t) / np.sinh(eig)])
    factors = np.sort(factors)[::-1][:k]
    value = float(np.prod(factors))
    bound = math.exp(-lam * (1 - t) * H_norm)
    if value > bound * (1 + 1e-9):
        raise FillingError(f"volume factor {value:g} exceeds bound {bound:g}", code="CONTRACTION_VIOLATED")
    return value


def sinh_cone_mass(boundary_mass, radius, curvature_rate=1.0):
    """Mass of the geodesic cone from the center over a round sphere of given radius in rank one.

    ``M(cone) = M(Z) * int_0^1 r * f(t) dt`` with ``f`` the sinh volume factor.
    """
    lam_i = curvature_rate * radius
    integral, _ = quad(
        lambda t: radius * symmetric_cone_check([lam_i], radius, 1, t), 0.0, 1.0, epsabs=1e-13, epsrel=1e-12
    )
    return boundary_mass * integral
