"""Mesh and cap convergence of the solver.

Part one: L-infinity error of the manufactured solution u = x on D_1 over a
mesh ladder, with the fitted order.  Part two: the Scherk solution on D_2
along a cap ladder, reporting the centre-region change between caps.
"""

import argparse
import time

import numpy as np

from scherkh2.hypgeom import build_symmetric_domain, disk_to_half_plane_c
from scherkh2.meshing import RefinementConfig, triangulate
from scherkh2.solver import DirichletProblem, SolverConfig, function_data, solve_minimal_graph, solve_scherk


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--h", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    p.add_argument("--caps", type=float, nargs="+", default=[1, 2, 4, 8, 16])
    args = p.parse_args()

    errs = []
    for h in args.h:
        t0 = time.perf_counter()
        mesh = triangulate(build_symmetric_domain(1.0), RefinementConfig(h=h))
        u, rep = solve_minimal_graph(DirichletProblem(mesh, function_data(mesh, lambda x, y: x)))
        e = float(np.abs(u.values - disk_to_half_plane_c(mesh.z).real).max())
        errs.append(e)
        print(f"h={h:<6g} nodes={mesh.n_nodes:6d} newton={rep.iterations:2d} "
              f"linf={e:.3e} time={time.perf_counter() - t0:.2f} s")
    if len(args.h) > 1:
        print(f"fitted order {np.polyfit(np.log(args.h), np.log(errs), 1)[0]:.2f}")

    caps = sorted(args.caps)
    _, rep, per_cap = solve_scherk(2.0, caps[-1], SolverConfig(continuation=tuple(caps)),
                                   mesh_cfg=RefinementConfig(h=0.02))
    inner = np.abs(per_cap[caps[0]].mesh.z) < 0.3
    for a, b in zip(caps, caps[1:]):
        d = np.abs(per_cap[b].values - per_cap[a].values)[inner].max()
        print(f"cap {a:g} -> {b:g}: max change on |z| < 0.3 = {d:.3e}")


if __name__ == "__main__":
    main()
