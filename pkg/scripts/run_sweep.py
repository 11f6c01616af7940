"""Scale sweeps: fill cycle families at several scales and print the mass table.

    python scripts/run_sweep.py                # all default families
    python scripts/run_sweep.py --only h2 --scales 1 10 100 1000
"""

import argparse
import math
import time

from isofill import cycles, models
from isofill.filling import FillingConfig, verify_theorem


def circle_family(spec, n_index, n_vertices):
    rate = float(spec.algebra.ad_a[0][n_index, n_index])
    r0 = 1.0 / rate
    return lambda s: cycles.root_plane_circle(spec, cycles.radius_for_scale(r0, s, rate), n_vertices, 0, n_index)


def torus_family(spec, n):
    def make(s):
        r = cycles.radius_for_scale(1.0, math.sqrt(s))
        return cycles.product_torus(spec, r, r, n, n)

    return make


FAMILIES = {
    "h2": lambda: (models.h2(), circle_family(models.h2(), 0, 128)),
    "ch2-z": lambda: (models.ch2(), circle_family(models.ch2(), 2, 64)),
    "ch2-x": lambda: (models.ch2(), circle_family(models.ch2(), 0, 64)),
    "heintze": lambda: (models.heintze(), circle_family(models.heintze(), 1, 64)),
    "h2xh2-torus": lambda: (models.h2xh2(), torus_family(models.h2xh2(), 8)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--only", nargs="*", choices=sorted(FAMILIES), default=sorted(FAMILIES))
    ap.add_argument("--scales", nargs="*", type=float, default=[1.0, 10.0, 100.0])
    ap.add_argument("--rho", type=float, default=10.0)
    ap.add_argument("--margin", type=float, default=0.5)
    args = ap.parse_args()

    cfg = FillingConfig(rho=args.rho, margin=args.margin)
    for name in args.only:
        spec, family = FAMILIES[name]()
        t0 = time.perf_counter()
        res = verify_theorem(spec, family, args.scales, cfg)
        lam = res.rows[0].report.lam
        print(f"\n{name}: lambda = {lam:.6g}, 1/lambda = {1 / lam:.6g}")
        print(f"{'scale':>8} {'mass_Z':>12} {'mass_V1':>12} {'mass_piZ':>10} {'mass_V2':>10} {'ratio':>8}")
        for row in res.rows:
            s, mz, mv1, mpz, mv2, ratio = row.as_tuple()
            print(f"{s:8g} {mz:12.6g} {mv1:12.6g} {mpz:10.3g} {mv2:10.3g} {ratio:8.5f}")
        print(
            f"empirical constant {res.empirical_constant:.5f}, super-linear flag {res.super_linear}, "
            f"{time.perf_counter() - t0:.1f} s"
        )


if __name__ == "__main__":
    main()
