"""Regenerate the bundled manifold and cycle files in src/isofill/data."""

import argparse
from pathlib import Path

import numpy as np

from isofill import cycles, models
from isofill.io import cycle_to_dict, manifold_to_dict, write_json

DATA = Path(__file__).resolve().parents[1] / "src" / "isofill" / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name in models.BUILTIN:
        write_json(args.out / f"{name}.json", manifold_to_dict(models.builtin(name)))

    h2 = models.h2()
    write_json(args.out / "circle_r1.json", cycle_to_dict(cycles.root_plane_circle(h2, 1.0, 128)))
    ch2 = models.ch2()
    write_json(args.out / "ch2_circle_z.json", cycle_to_dict(cycles.root_plane_circle(ch2, 1.0, 64, n_index=2)))
    h2xh2 = models.h2xh2()
    write_json(args.out / "h2xh2_torus.json", cycle_to_dict(cycles.product_torus(h2xh2, 1.0, 1.0, 8, 8)))
    h3 = models.h3()
    rng = np.random.default_rng(7)
    write_json(args.out / "h3_tetra.json", cycle_to_dict(cycles.simplex_boundary(h3, 2, rng)))
    print(f"wrote {len(list(args.out.glob('*.json')))} files to {args.out}")


if __name__ == "__main__":
    main()
