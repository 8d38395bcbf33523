"""Margins kappa - |K| of the entire graphs u_n at fixed Gauss-map targets.

Prints one row per (target, n) and whether margins decrease in n.
"""

import argparse
import csv
import math
from pathlib import Path

from scherkh2.analysis import build_scherk_reference, margins_by_target, sharpness_study
from scherkh2.meshing import RefinementConfig
from scherkh2.solver import build_entire_graph_un


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--n", type=float, nargs="+", default=[2, 4, 8, 16])
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--out", default="out/sharpness")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    targets = [(0.8, math.pi / 4), (0.85, 3 * math.pi / 2), (0.9, 0.0)]
    ref = build_scherk_reference(h=args.h, coarse_h=1.4 * args.h)
    fields = {n: build_entire_graph_un(n, mesh_cfg=RefinementConfig(h=args.h)).disk for n in args.n}
    rows = sharpness_study(fields, ref, targets)
    with open(out / "sharpness.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "nu", "theta", "abs_K", "kappa", "margin", "uncertainty"])
        for r in rows:
            w.writerow([r.n, r.nu, r.theta, r.abs_K, r.kappa, r.margin, r.uncertainty])
            print(f"n={r.n:5g} nu={r.nu:.2f} theta={r.theta:+.3f}  |K|={r.abs_K:.4f} "
                  f"kappa={r.kappa:.4f} margin={r.margin:+.4f} +- {r.uncertainty:.4f}")
    for target, m in margins_by_target(rows).items():
        dec = all(b < a for a, b in zip(m, m[1:]))
        print(f"target {target}: margins {[round(x, 4) for x in m]} decreasing={dec}")


if __name__ == "__main__":
    main()
