"""Command-line front end.

    python -m scherkh2 domain    --config problem.json --out runs/domain
    python -m scherkh2 solve     --config problem.json --out runs/l2
    python -m scherkh2 curvature --solution runs/l2 --out runs/l2
    python -m scherkh2 verify    --solution runs/l2 --suite scherk --out runs/l2
    python -m scherkh2 bound     --config bound.json --out runs/bound
    python -m scherkh2 sweep     --config sweep.json --out runs/sweep

Every command writes ``manifest.json`` next to its outputs.  Numbers are
written with 17 significant digits, JSON with sorted keys.  The exit code
is 0 on success and, for ``verify``/``bound``/``sweep``, only if every
selected check passes.

Heavy modules are imported inside the commands so that ``--threads`` can
set the BLAS/OpenMP thread environment before numpy is loaded.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

log = logging.getLogger("scherkh2")

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_USAGE = 2

DATA_KINDS = ("scherk", "linear", "vt", "un", "constant")


class ConfigError(ValueError):
    pass


def _num(x) -> str:
    return format(float(x), ".17g")


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON form (independent of key order)."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return obj


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ProblemConfig:
    domain: dict = field(default_factory=lambda: {"type": "scherk_symmetric", "lambda": 2.0})
    data: dict = field(default_factory=lambda: {"kind": "scherk"})
    cap: float = 8.0
    mesh: dict = field(default_factory=lambda: {"h": 0.02, "grading": 0.5, "truncation_delta": 0.02})
    solver: dict = field(default_factory=lambda: {"tol": 1e-10, "max_iter": 100, "damping": 0.5,
                                                  "continuation": [1.0, 2.0, 4.0, 8.0]})

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemConfig":
        unknown = set(d) - {"domain", "data", "cap", "mesh", "solver"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for k in ("domain", "data", "mesh", "solver"):
            if k in d:
                if not isinstance(d[k], dict):
                    raise ConfigError(f"'{k}' must be an object")
                merged = dict(getattr(cfg, k))
                merged.update(d[k])
                setattr(cfg, k, merged if k != "domain" else dict(d[k]))
        if "cap" in d:
            cfg.cap = float(d["cap"])
        if cfg.data.get("kind") not in DATA_KINDS:
            raise ConfigError(f"data.kind must be one of {DATA_KINDS}")
        if not cfg.cap > 0:
            raise ConfigError("cap must be positive")
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def refinement(self):
        from .meshing import RefinementConfig
        return RefinementConfig(**self.mesh)

    def solver_config(self):
        from .solver import SolverConfig
        s = dict(self.solver)
        if "continuation" in s:
            s["continuation"] = tuple(float(c) for c in s["continuation"])
        return SolverConfig(**s)


@dataclass
class RunManifest:
    command: str
    config_hash: str
    tool_version: str = __version__
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    solver_iterations: int = 0
    seed: int = 0
    threads: int | None = None

    def add_output(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def write(self, out: Path) -> None:
        path = out / "manifest.json"
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        write_json(path, asdict(self))


# ---------------------------------------------------------------------------
# mesh and solution files

def write_mesh(mesh, out: Path) -> tuple[Path, Path]:
    pn, pt = out / "mesh_nodes.csv", out / "mesh_triangles.csv"
    with open(pn, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x1", "x2", "tag"])
        for i, (x, y) in enumerate(mesh.nodes):
            w.writerow([i, _num(x), _num(y), mesh.tags[i]])
    with open(pt, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "i", "j", "k"])
        for t, (a, b, c) in enumerate(mesh.triangles):
            w.writerow([t, int(a), int(b), int(c)])
    return pn, pt


def write_solution(u, path: Path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "x1", "x2", "u"])
        for i, ((x, y), v) in enumerate(zip(u.mesh.nodes, u.values)):
            w.writerow([i, _num(x), _num(y), _num(v)])
    return path


def _read_csv(path: Path, header: list) -> list:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    if not rows or rows[0] != header:
        raise ConfigError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def _domain_object(spec: dict):
    from .hypgeom import domain_from_json
    from .meshing import DiskRegion, QuadrantRegion
    kind = spec.get("type")
    if kind == "disk":
        return DiskRegion(float(spec.get("truncation_delta", 0.02)))
    if kind == "quadrant":
        return QuadrantRegion(float(spec.get("truncation_delta", 0.02)))
    try:
        return domain_from_json(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain description: {exc}") from exc


def read_mesh(folder: Path, meta: dict):
    import numpy as np
    from .meshing import TriMesh
    nodes = _read_csv(folder / "mesh_nodes.csv", ["id", "x1", "x2", "tag"])
    tris = _read_csv(folder / "mesh_triangles.csv", ["t", "i", "j", "k"])
    xy = np.array([[float(r[1]), float(r[2])] for r in nodes])
    tags = np.array([r[3] for r in nodes], dtype=object)
    T = np.array([[int(r[1]), int(r[2]), int(r[3])] for r in tris], dtype=np.int64)
    # Dirichlet nodes are exactly the nodes on boundary edges
    e = np.sort(np.concatenate([T[:, [0, 1]], T[:, [1, 2]], T[:, [2, 0]]]), axis=1)
    ue, cnt = np.unique(e, axis=0, return_counts=True)
    boundary = np.zeros(len(xy), dtype=bool)
    boundary[ue[cnt == 1].ravel()] = True
    m = meta.get("mesh", {})
    return TriMesh(xy, T, tags, boundary, float(m.get("h", 0.02)), float(m.get("grading", 0.5)),
                   _domain_object(meta["domain"]))


def load_solution(path) -> tuple:
    """``(ScalarField, meta)`` from a solve output folder or its solution.csv."""
    import numpy as np
    from .solver import ScalarField
    p = Path(path)
    folder = p if p.is_dir() else p.parent
    csv_path = p if p.is_file() else folder / "solution.csv"
    if not folder.exists() or not csv_path.exists():
        raise ConfigError(f"no solution at {path}")
    meta = load_json(folder / "solution.json")
    mesh = read_mesh(folder, meta)
    rows = _read_csv(csv_path, ["node", "x1", "x2", "u"])
    if len(rows) != mesh.n_nodes:
        raise ConfigError(f"{csv_path}: {len(rows)} values for {mesh.n_nodes} nodes")
    return ScalarField(mesh, np.array([float(r[3]) for r in rows])), meta


# ---------------------------------------------------------------------------
# commands

def _domain_json(dom) -> dict:
    from .meshing import DiskRegion, QuadrantRegion
    if isinstance(dom, DiskRegion):
        return {"type": "disk", "truncation_delta": dom.truncation_delta}
    if isinstance(dom, QuadrantRegion):
        return {"type": "quadrant", "truncation_delta": dom.truncation_delta}
    return dom.to_json()


def cmd_domain(cfg: ProblemConfig, out: Path, man: RunManifest, n_per_edge: int = 201) -> int:
    import numpy as np
    from .hypgeom import EDGE_NAMES, check_equilibrium, interior_angle
    dom = _domain_object(cfg.domain)
    if not hasattr(dom, "edges"):
        raise ConfigError("the domain command needs a quadrilateral")
    vz = dom.vertex_z()
    eq = check_equilibrium(dom)
    desc = {"domain": dom.to_json(), "ideal": dom.is_ideal,
            "vertices": [[float(z.real), float(z.imag)] for z in vz],
            "vertex_radius": [float(abs(z)) for z in vz],
            "interior_angles": [float(interior_angle(dom, k)) for k in range(4)],
            "equilibrium": _plain(asdict(eq))}
    write_json(man.add_output(out / "domain.json"), desc)
    s = np.linspace(0.0, 1.0, n_per_edge)
    with open(man.add_output(out / "domain_polyline.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge", "k", "x1", "x2"])
        for name in EDGE_NAMES:
            pts = dom.edge(name).point_at(s)
            for k, z in enumerate(pts):
                w.writerow([name, k, _num(z.real), _num(z.imag)])
    return EXIT_OK


def _plain(x):
    from .analysis import _jsonable
    return _jsonable(x)


def _linear_closed_form(a: float):
    return lambda x, y: a * x


def cmd_solve(cfg: ProblemConfig, out: Path, man: RunManifest) -> int:
    import numpy as np
    from .hypgeom import disk_to_half_plane_c
    from .meshing import DiskRegion, triangulate
    from .solver import (DirichletProblem, build_entire_graph_un, function_data, scherk_data,
                         solve_minimal_graph, solve_translation_invariant, solve_with_continuation)
    mcfg, scfg = cfg.refinement(), cfg.solver_config()
    kind = cfg.data["kind"]
    per_cap = {}
    exact = None
    entire = kind in ("vt", "un")
    if kind == "un":
        n = float(cfg.data.get("n", cfg.cap))
        g = build_entire_graph_un(n, scfg, mcfg)
        u, rep, dom = g.disk, g.report, g.disk.mesh.domain
    else:
        dom = DiskRegion(mcfg.truncation_delta) if kind == "vt" else _domain_object(cfg.domain)
        mesh = triangulate(dom, mcfg)
        if kind == "scherk":
            u, rep, per_cap = solve_with_continuation(mesh, lambda T: scherk_data(mesh, T), cfg.cap, scfg)
        else:
            if kind == "linear":
                exact = _linear_closed_form(float(cfg.data.get("a", 1.0)))
            elif kind == "vt":
                exact = solve_translation_invariant(float(cfg.data.get("t", 1.0)))
            else:
                c = float(cfg.data.get("value", 0.0))
                exact = lambda x, y: np.full_like(x, c)  # noqa: E731
            u, rep = solve_minimal_graph(DirichletProblem(mesh, function_data(mesh, exact)), scfg)
    pn, pt = write_mesh(u.mesh, out)
    man.add_output(pn)
    man.add_output(pt)
    write_solution(u, man.add_output(out / "solution.csv"))
    for T, f in sorted(per_cap.items()):
        write_solution(f, man.add_output(out / f"solution_T{T:g}.csv"))
    lines = [f"data {kind}"]
    for k, g in enumerate(rep.grad_norms):
        lines.append(f"iter {k} grad_norm {_num(g)}")
    lines.append(f"caps {' '.join(format(c, 'g') for c in rep.caps)}")
    lines.append(f"converged {rep.converged}")
    lines.append(f"iterations {rep.iterations}")
    lines.append(f"final_grad_norm {_num(rep.final_grad_norm)}")
    linf = None
    if exact is not None:
        w = disk_to_half_plane_c(u.mesh.z)
        linf = float(np.abs(u.values - exact(w.real, w.imag)).max())
        lines.append(f"linf_error_vs_closed_form {_num(linf)}")
    with open(man.add_output(out / "convergence.log"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    meta = {"config": cfg.to_dict(), "domain": _domain_json(dom), "kind": kind, "entire": entire,
            "mesh": {"h": mcfg.h, "grading": mcfg.grading, "truncation_delta": mcfg.truncation_delta},
            "n_nodes": int(u.mesh.n_nodes), "converged": bool(rep.converged),
            "iterations": int(rep.iterations), "final_grad_norm": float(rep.final_grad_norm),
            "caps": [float(c) for c in per_cap], "linf_error": linf}
    write_json(man.add_output(out / "solution.json"), meta)
    man.solver_iterations = int(rep.iterations)
    log.info("solve: %d iterations, final |g| = %.3e", rep.iterations, rep.final_grad_norm)
    return EXIT_OK


def _jets_for(u, meta: dict):
    from .analysis import SCHERK_PATCH_SCALE
    from .curvature import JetField
    scale = SCHERK_PATCH_SCALE if meta.get("kind") in ("scherk", "un") else None
    return JetField(u) if scale is None else JetField(u, scale=scale)


def cmd_curvature(solution: str, out: Path, man: RunManifest) -> int:
    import numpy as np
    from .curvature import CurvatureError, FrameContext
    u, meta = load_solution(solution)
    man.inputs.append(str(solution))
    jets = _jets_for(u, meta)
    arr = jets.arrays
    try:
        theta = FrameContext(jets).theta
    except CurvatureError as exc:
        log.warning("theta unavailable: %s", exc)
        theta = np.full(u.mesh.n_nodes, np.nan)
    # a flat graph has no principal frame; its theta is undefined (round-off counts as flat)
    flat = np.all(np.abs(jets.coef[:, 1:]) <= 1e-12 * (1.0 + np.abs(jets.coef[:, :1])), axis=1)
    with open(man.add_output(out / "curvature.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "x1", "x2", "u", "W", "nu", "kext", "k1", "theta"])
        for i in range(u.mesh.n_nodes):
            x, y = u.mesh.nodes[i]
            if not jets.valid[i]:
                row = [math.nan] * 5
            else:
                th = math.nan if flat[i] else theta[i]
                row = [arr["W"][i], arr["nu"][i], arr["K"][i], arr["k1"][i], th]
            w.writerow([i, _num(x), _num(y), _num(u.values[i])] + [_num(v) for v in row])
    return EXIT_OK


def cmd_verify(solution: str, suites: list, out: Path, man: RunManifest) -> int:
    from .analysis import SUITES, dump_report, verification_report
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; available: {', '.join(sorted(SUITES))}")
    u, meta = load_solution(solution)
    man.inputs.append(str(solution))
    checks = []
    for s in suites:
        checks.extend(SUITES[s](u))
    report = verification_report(checks, {**meta, "suites": suites})
    dump_report(report, man.add_output(out / "report.json"))
    for c in checks:
        log.info("%-28s %s", c.name, "pass" if c.passed else "FAIL")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILED_CHECKS


# ---------------------------------------------------------------------------
# bound and sharpness

@dataclass
class BoundConfig:
    family: dict
    reference: dict = field(default_factory=lambda: {"h": 0.01, "caps": [4.0, 8.0, 16.0],
                                                     "coarse_h": 0.014, "truncation_delta": 0.02})
    samples: int = 20
    targets: list = field(default_factory=lambda: [[0.8, math.pi / 4], [0.85, -math.pi / 2], [0.9, 0.0]])
    mesh: dict = field(default_factory=lambda: {"h": 0.01, "grading": 0.5, "truncation_delta": 0.02})

    @classmethod
    def from_dict(cls, d: dict) -> "BoundConfig":
        unknown = set(d) - {"family", "reference", "samples", "targets", "mesh"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if not isinstance(d.get("family"), dict) or "name" not in d["family"]:
            raise ConfigError("'family' must be an object with a 'name'")
        cfg = cls(family=dict(d["family"]))
        if "reference" in d:
            cfg.reference = {**cfg.reference, **d["reference"]}
        if "mesh" in d:
            cfg.mesh = {**cfg.mesh, **d["mesh"]}
        cfg.samples = int(d.get("samples", cfg.samples))
        if "targets" in d:
            cfg.targets = [[float(a), float(b)] for a, b in d["targets"]]
        return cfg


def _reference(cfg: BoundConfig):
    from .analysis import build_scherk_reference
    r = cfg.reference
    return build_scherk_reference(h=float(r["h"]), caps=tuple(float(c) for c in r["caps"]),
                                  coarse_h=r.get("coarse_h"),
                                  truncation_delta=float(r.get("truncation_delta", 0.02)))


def cmd_bound(cfg: BoundConfig, out: Path, man: RunManifest) -> int:
    from .analysis import (curvature_bound_check, linear_family_samples, margins_by_target,
                           sharpness_study, vt_family_samples)
    from .meshing import RefinementConfig
    from .solver import build_entire_graph_un, solve_translation_invariant
    fam = cfg.family
    name = fam["name"]
    if name == "solution":
        u, meta = load_solution(fam["path"])
        man.inputs.append(str(fam["path"]))
        if not meta.get("entire"):
            raise ConfigError(f"{fam['path']} is a solution on a bounded domain, not an entire graph; "
                              "the curvature bound only applies to entire graphs")
        fields = {float(meta["config"]["data"].get("n", meta["config"]["cap"])): u}
        name = "un"
    elif name == "un":
        levels = [float(n) for n in fam.get("n", [2, 4, 8, 16])]
        if sorted(levels) != levels or len(set(levels)) != len(levels):
            raise ConfigError("family.n must be strictly increasing")
        mcfg = RefinementConfig(**cfg.mesh)
        fields = {}
        for n in levels:
            g = build_entire_graph_un(n, mesh_cfg=mcfg)
            man.solver_iterations += int(g.report.iterations)
            fields[n] = g.disk
    elif name not in ("linear", "vt"):
        raise ConfigError("family.name must be one of linear, vt, un, solution")
    ref = _reference(cfg)
    man.solver_iterations += int(ref.meta.get("iterations", 0))
    if name == "un":
        rows = sharpness_study(fields, ref, [tuple(t) for t in cfg.targets])
        ok = True
        with open(man.add_output(out / "sharpness.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "nu", "theta", "abs_K", "kappa", "margin", "uncertainty"])
            for r in rows:
                w.writerow([_num(v) for v in (r.n, r.nu, r.theta, r.abs_K, r.kappa, r.margin, r.uncertainty)])
        for m in margins_by_target(rows).values():
            ok &= all(x > 0 for x in m) and all(b < a for a, b in zip(m, m[1:]))
        return EXIT_OK if ok else EXIT_FAILED_CHECKS
    if name == "linear":
        a = float(fam.get("a", 1.0))
        samples = linear_family_samples(a, cfg.samples)
        label = f"linear a={a:g}"
    else:
        t = float(fam.get("t", 1.0))
        samples = vt_family_samples(solve_translation_invariant(t), max(1, cfg.samples // 2))
        label = f"vt t={t:g}"
    rows = curvature_bound_check(samples, ref, label)
    with open(man.add_output(out / "bound.csv"), "w", newline="") as fh:
        keys = list(rows[0].row()) if rows else ["label"]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            d = r.row()
            w.writerow([d[k] if isinstance(d[k], (str, bool)) else _num(d[k]) for k in keys])
    return EXIT_OK if rows and all(r.passed for r in rows) else EXIT_FAILED_CHECKS


# ---------------------------------------------------------------------------
# sweeps

def cmd_sweep(raw: dict, out: Path, man: RunManifest) -> int:
    """Solve and verify along a lambda- or cap-ladder; reports are concatenated."""
    from .analysis import SUITES, verification_report
    unknown = set(raw) - {"base", "parameter", "values", "suites"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    param = raw.get("parameter")
    if param not in ("lambda", "cap"):
        raise ConfigError("parameter must be 'lambda' or 'cap'")
    values = raw.get("values") or []
    if not values:
        raise ConfigError("values must be a non-empty list")
    suites = list(raw.get("suites", ["scherk"]))
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown suite(s) {bad}; available: {', '.join(sorted(SUITES))}")
    runs, ok = [], True
    for v in values:
        d = copy.deepcopy(raw.get("base", {}))
        if param == "lambda":
            d["domain"] = {"type": "scherk_symmetric", "lambda": v}
        else:
            d["cap"] = float(v)
            solver = d.setdefault("solver", {})
            ladder = [c for c in solver.get("continuation", [1.0, 2.0, 4.0, 8.0]) if c < float(v)]
            solver["continuation"] = ladder + [float(v)]
        sub = out / f"{param}_{v}"
        sub.mkdir(parents=True, exist_ok=True)
        sub_man = RunManifest("solve", config_hash(d))
        cmd_solve(ProblemConfig.from_dict(d), sub, sub_man)
        sub_man.write(sub)
        man.outputs.extend(sub_man.outputs)
        man.solver_iterations += sub_man.solver_iterations
        u, meta = load_solution(sub)
        checks = [c for s in suites for c in SUITES[s](u)]
        ok &= all(c.passed for c in checks)
        runs.append({"parameter": param, "value": v, "report": verification_report(checks, meta)})
    write_json(man.add_output(out / "sweep.json"), {"runs": runs})
    return EXIT_OK if ok else EXIT_FAILED_CHECKS


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scherkh2", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (created if missing)")
    common.add_argument("--threads", type=int, default=None,
                        help="BLAS/OpenMP threads (effective when numpy is not yet loaded)")
    common.add_argument("--seed", type=int, default=0, help="recorded in the manifest; sampling is deterministic")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("domain", "describe a Scherk domain and write its edges as a polyline"),
                           ("solve", "solve a Dirichlet problem and write the nodal solution"),
                           ("bound", "curvature bound comparison or sharpness study"),
                           ("sweep", "lambda- or cap-ladder of solves with verification")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--config", required=name != "solve" and name != "domain",
                        help="JSON configuration")
    sp = sub.add_parser("curvature", parents=[common], help="curvature fields of a solution")
    sp.add_argument("--solution", required=True, help="solve output folder or its solution.csv")
    sp = sub.add_parser("verify", parents=[common], help="run verification suites on a solution")
    sp.add_argument("--solution", required=True)
    sp.add_argument("--suite", default="scherk", help="comma-separated suite names")
    return p


def _limit_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be at least 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    t0 = time.perf_counter()
    out = Path(args.out)
    try:
        _limit_threads(args.threads)
        raw = load_json(args.config) if getattr(args, "config", None) else {}
        man = RunManifest(args.command, config_hash(raw), seed=args.seed, threads=args.threads)
        if getattr(args, "config", None):
            man.inputs.append(str(args.config))
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "domain":
            code = cmd_domain(ProblemConfig.from_dict(raw), out, man)
        elif args.command == "solve":
            code = cmd_solve(ProblemConfig.from_dict(raw), out, man)
        elif args.command == "curvature":
            man.config_hash = config_hash({"solution": str(args.solution)})
            code = cmd_curvature(args.solution, out, man)
        elif args.command == "verify":
            suites = [s.strip() for s in args.suite.split(",") if s.strip()]
            man.config_hash = config_hash({"solution": str(args.solution), "suites": suites})
            code = cmd_verify(args.solution, suites, out, man)
        elif args.command == "bound":
            code = cmd_bound(BoundConfig.from_dict(raw), out, man)
        else:
            code = cmd_sweep(raw, out, man)
    except Exception as exc:  # every failure becomes a diagnostic and a nonzero exit
        from .meshing import MeshError
        kind = "config" if isinstance(exc, (ConfigError, MeshError, KeyError, TypeError, ValueError)) else "run"
        print(f"scherkh2 {args.command}: {kind} error: {exc}", file=sys.stderr)
        if args.verbose:
            log.exception("details")
        return EXIT_USAGE
    man.wall_time = time.perf_counter() - t0
    man.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
