"""Command-line interface.

Exit status: 0 on success, 1 when an input fails to parse or validate,
2 when a numeric step fails (for example no expanding direction exists).
"""

import argparse
import csv
import io as _io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .currents import QuadratureOptions
from .cycles import product_torus, radius_for_scale, root_plane_circle
from .errors import ChainError, FillingError, IsofillError, ParseError, SpecError
from .filling import FillingConfig, fill, verify_theorem
from .geometry import JacobiField
from .io import dumps, load_cycle, load_manifold, write_json
from .structure import decompose

INPUT_CODES = {"RANK_RANGE", "NOT_A_CYCLE"}


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    margin: float = 0.5
    rho: float = 10.0
    tol: float = 1e-6
    depth: int = 8
    order: int = 7
    seed: int = 0
    output: str = None
    threads: int = 0

    def __post_init__(self):
        if not 0.0 < self.margin < 1.0:
            raise SpecError(f"--margin must lie in (0, 1), got {self.margin}", code="BAD_ARGUMENT")
        if not self.rho > 0:
            raise SpecError(f"--rho must be positive, got {self.rho}", code="BAD_ARGUMENT")
        if not self.tol > 0:
            raise SpecError(f"--tol must be positive, got {self.tol}", code="BAD_ARGUMENT")
        if self.depth < 1:
            raise SpecError("--depth must be at least 1", code="BAD_ARGUMENT")

    @property
    def quadrature(self):
        return QuadratureOptions(order=self.order, tol=self.tol, max_depth=self.depth, threads=self.threads)

    @property
    def filling(self):
        return FillingConfig(rho=self.rho, margin=self.margin, seed=self.seed, quadrature=self.quadrature)


def _emit(text, output):
    if output and output != "-":
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _floats(text, name):
    try:
        return np.array([float(x) for x in text.split(",")] if text else [], dtype=float)
    except ValueError:
        raise SpecError(f"--{name} must be a comma-separated list of numbers", code="BAD_ARGUMENT") from None


def cmd_validate(cfg, args):
    spec = load_manifold(args.spec)
    report = spec.report
    doc = {"schema": "isofill.validation/1", "spec": spec.name, **report.to_dict()}
    _emit(dumps(doc) + "\n", cfg.output)
    return 0 if report.ok else 1


def cmd_decompose(cfg, args):
    spec = load_manifold(args.spec).require_valid()
    dec = decompose(spec, margin=cfg.margin, seed=cfg.seed)
    doc = {"schema": "isofill.decomposition/1", "spec": spec.name, "seed": cfg.seed, **dec.to_dict()}
    _emit(dumps(doc) + "\n", cfg.output)
    return 0


def cmd_probe(cfg, args):
    spec = load_manifold(args.spec).require_valid()
    alg = spec.algebra
    H = _floats(args.H, "H")
    xi = _floats(args.xi, "xi") if args.xi else np.zeros(alg.dim_a)
    X = _floats(args.X, "X")
    if H.shape != (alg.dim_a,) or xi.shape != (alg.dim_a,) or X.shape != (alg.dim_n,):
        raise SpecError(
            f"need --H and --xi of length {alg.dim_a} and --X of length {alg.dim_n}", code="BAD_ARGUMENT"
        )
    field_ = JacobiField(H, xi, X)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "norm"])
    for t in np.linspace(args.t_min, args.t_max, args.steps):
        w.writerow([format(float(t), ".17g"), format(field_.norm(alg, t), ".17g")])
    _emit(buf.getvalue(), cfg.output)
    return 0


def cmd_fill(cfg, args):
    spec = load_manifold(args.spec).require_valid()
    z = load_cycle(args.cycle, spec)
    _, report = fill(spec, z, cfg.filling)
    text = write_json(None, report.to_dict())
    _emit(text, cfg.output)
    return 0


def _family(spec, args):
    if args.family == "circle":
        rate = float(spec.algebra.ad_a[args.a_index][args.n_index, args.n_index])
        if rate <= 0:
            raise SpecError("the chosen n-vector is not a positive root vector", code="BAD_ARGUMENT")
        r0 = args.r0 if args.r0 else 1.0 / rate
        return lambda s: root_plane_circle(
            spec, radius_for_scale(r0, s, rate), args.vertices, args.a_index, args.n_index
        )
    if args.family == "torus":
        r0 = args.r0 if args.r0 else 1.0
        n = max(3, int(round(np.sqrt(args.vertices))))

        def torus(s):
            r = radius_for_scale(r0, np.sqrt(s))
            return product_torus(spec, r, r, n, n)

        return torus
    raise SpecError(f"unknown family {args.family!r}", code="BAD_ARGUMENT")


def cmd_sweep(cfg, args):
    spec = load_manifold(args.spec).require_valid()
    scales = _floats(args.scales, "scales")
    result = verify_theorem(spec, _family(spec, args), scales, cfg.filling)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scale", "mass_Z", "mass_V1", "mass_piZ", "mass_V2", "ratio"])
    for row in result.rows:
        w.writerow([format(float(x), ".17g") for x in row.as_tuple()])
    _emit(buf.getvalue(), cfg.output)
    sys.stderr.write(
        f"empirical constant {result.empirical_constant:.6g}; super-linear drift: {result.super_linear}\n"
    )
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="isofill", description="Linear isoperimetric fillings in N ⋊ A × R^m.")
    p.add_argument("--version", action="version", version=f"isofill {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, quad=False):
        sp.add_argument("--margin", type=float, default=0.5, help="cone margin in (0, 1)")
        sp.add_argument("--seed", type=int, default=0, help="seed for the multi-start ascent")
        sp.add_argument("--output", "-o", default=None, help="write here instead of stdout")
        if quad:
            sp.add_argument("--rho", type=float, default=10.0, help="clearance from M0 × N")
            sp.add_argument("--tol", type=float, default=1e-6, help="relative quadrature tolerance")
            sp.add_argument("--depth", type=int, default=8, help="subdivision depth cap")
            sp.add_argument("--order", type=int, default=7, help="odd degree of the simplex rule")
            sp.add_argument("--threads", type=int, default=0, help="worker threads (0: auto or ISOFILL_THREADS)")

    sp = sub.add_parser("validate", help="check the structural hypotheses of a manifold spec")
    sp.add_argument("spec")
    sp.add_argument("--output", "-o", default=None)

    sp = sub.add_parser("decompose", help="block decomposition, h_plus, cone and rate")
    sp.add_argument("spec")
    common(sp)

    sp = sub.add_parser("probe", help="CSV table of |y(t)| for the Jacobi field t xi + Ad(exp(-tH)) X")
    sp.add_argument("spec")
    sp.add_argument("--H", required=True, help="comma-separated a-vector")
    sp.add_argument("--xi", default="", help="comma-separated a-vector (default 0)")
    sp.add_argument("--X", required=True, help="comma-separated n-vector")
    sp.add_argument("--t-min", type=float, default=0.0)
    sp.add_argument("--t-max", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=11)
    common(sp)

    sp = sub.add_parser("fill", help="fill a cycle and write the report")
    sp.add_argument("spec")
    sp.add_argument("cycle")
    sp.add_argument("--report", default=None, help="alias for --output")
    common(sp, quad=True)

    sp = sub.add_parser("sweep", help="fill a cycle family over several scales and write CSV")
    sp.add_argument("spec")
    sp.add_argument("--family", choices=("circle", "torus"), default="circle")
    sp.add_argument("--scales", default="1,10,100")
    sp.add_argument("--vertices", type=int, default=128, help="circle vertices (torus: total grid size)")
    sp.add_argument("--r0", type=float, default=0.0, help="base radius (default: curvature radius of the plane)")
    sp.add_argument("--a-index", type=int, default=0)
    sp.add_argument("--n-index", type=int, default=0)
    common(sp, quad=True)
    return p


COMMANDS = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "probe": cmd_probe,
    "fill": cmd_fill,
    "sweep": cmd_sweep,
}


def _exit_code(exc):
    if isinstance(exc, (SpecError, ParseError, ChainError)):
        return 1
    if isinstance(exc, FillingError) and exc.code in INPUT_CODES:
        return 1
    return 2


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            margin=getattr(args, "margin", 0.5),
            rho=getattr(args, "rho", 10.0),
            tol=getattr(args, "tol", 1e-6),
            depth=getattr(args, "depth", 8),
            order=getattr(args, "order", 7),
            seed=getattr(args, "seed", 0),
            output=getattr(args, "report", None) or args.output,
            threads=getattr(args, "threads", 0),
        )
        return COMMANDS[args.command](cfg, args)
    except IsofillError as exc:
        sys.stderr.write(f"isofill {args.command}: {exc}\n")
        return _exit_code(exc)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"isofill {args.command}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
