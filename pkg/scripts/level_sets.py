"""Level curves of the capped Scherk solution on D_lambda as CSV polylines.

The level through the centre saddle shows the four branches that split the
domain into four disks; levels near +-T show the curves running between the
vertices of the A edges (resp. B edges).
"""

import argparse
import csv
from pathlib import Path

from scherkh2.analysis import extract_level_set
from scherkh2.meshing import RefinementConfig
from scherkh2.solver import SolverConfig, solve_scherk


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--cap", type=float, default=8.0)
    p.add_argument("--h", type=float, default=0.02)
    p.add_argument("--levels", type=float, nargs="+", default=[0.0, 7.2, -7.2])
    p.add_argument("--out", default="out/level_sets")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ladder = tuple(c for c in (1.0, 2.0, 4.0, 8.0, 16.0) if c < args.cap) + (args.cap,)
    u, _, _ = solve_scherk(args.lam, args.cap, SolverConfig(continuation=ladder),
                           mesh_cfg=RefinementConfig(h=args.h))
    with open(out / "level_sets.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "branch", "k", "x1", "x2"])
        for c in args.levels:
            g = extract_level_set(u, c)
            junctions = ", ".join(f"({z.real:+.3f},{z.imag:+.3f}) deg {d}" for z, d in g.junctions)
            print(f"level {c:+g}: {len(g.branches)} branches, ends {[b.ends for b in g.branches]}, "
                  f"junctions [{junctions}], cycle rank {g.cycle_rank}")
            for b, br in enumerate(g.branches):
                for k, z in enumerate(br.points):
                    w.writerow([c, b, k, z.real, z.imag])


if __name__ == "__main__":
    main()
