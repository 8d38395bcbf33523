"""Winding of the principal-frame angle theta along level curves of nu on D_2."""

import argparse

from scherkh2.analysis import SCHERK_PATCH_SCALE, theta_winding
from scherkh2.curvature import FrameContext, JetField
from scherkh2.meshing import RefinementConfig
from scherkh2.solver import SolverConfig, solve_scherk


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--h", type=float, default=0.02)
    p.add_argument("--nu", type=float, nargs="+", default=[0.3, 0.5, 0.6, 0.9])
    args = p.parse_args()

    u, _, _ = solve_scherk(args.lam, 8.0, SolverConfig(continuation=(1.0, 2.0, 4.0, 8.0)),
                           mesh_cfg=RefinementConfig(h=args.h))
    jets = JetField(u, scale=SCHERK_PATCH_SCALE)
    frame = FrameContext(jets)
    for nu in args.nu:
        w = theta_winding(jets, nu, frame)
        quads = " ".join(f"{q:+.4f}" for q in w.per_quadrant)
        axes = " ".join(f"{v:+.4f}" for v in w.axis_values.values())
        print(f"nu={nu:.2f} winding={w.winding:+.5f} total_variation={w.total_variation:.5f} "
              f"quadrants [{quads}] ray values [{axes}]")


if __name__ == "__main__":
    main()
