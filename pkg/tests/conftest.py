"""Shared, expensive numerical fixtures (built once per test session)."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from scherkh2.analysis import build_scherk_reference
from scherkh2.hypgeom import build_symmetric_domain
from scherkh2.meshing import RefinementConfig, triangulate
from scherkh2.solver import (DirichletProblem, SolverConfig, build_entire_graph_un, function_data,
                             solve_minimal_graph, solve_scherk)

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

UN_LADDER = (2, 4, 8, 16)


@pytest.fixture(scope="session")
def d1_mesh():
    return triangulate(build_symmetric_domain(1.0), RefinementConfig(h=0.05))


@pytest.fixture(scope="session")
def scherk2():
    """Capped Scherk solution on D_2 (cap 8, h = 0.02, caps 1, 2, 4, 8)."""
    u, rep, per_cap = solve_scherk(2.0, 8.0, SolverConfig(continuation=(1.0, 2.0, 4.0, 8.0)),
                                   mesh_cfg=RefinementConfig(h=0.02))
    return u, rep, per_cap


@pytest.fixture(scope="session")
def linear_solutions():
    """Solutions with boundary data of ``a x`` on D_1 at h = 0.01."""
    mesh = triangulate(build_symmetric_domain(1.0), RefinementConfig(h=0.01))
    out = {}
    for a in (0.25, 1.0, 4.0):
        u, _ = solve_minimal_graph(DirichletProblem(mesh, function_data(mesh, lambda x, y, a=a: a * x)))
        out[a] = u
    return out


@pytest.fixture(scope="session")
def reference():
    """Approximation of the ideal Scherk graph used for kappa (h = 0.01, caps 4, 8, 16)."""
    return build_scherk_reference()


@pytest.fixture(scope="session")
def un_ladder():
    return {n: build_entire_graph_un(float(n), mesh_cfg=RefinementConfig(h=0.01)) for n in UN_LADDER}



# ---------------------------------------------------------------------------
# one pass/fail line per acceptance criterion in the terminal summary

_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    num, title = m.args
    status = "xfail" if hasattr(rep, "wasxfail") else rep.outcome
    _CRITERIA.setdefault(num, (title, []))[1].append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, results = _CRITERIA[num]
        bad = [n for n, s in results if s in ("failed", "skipped")]
        xf = [n for n, s in results if s == "xfail"]
        line = f"criterion {num} ({title}): {'FAIL' if bad else 'PASS'}"
        if bad:
            line += f"  failing: {', '.join(bad)}"
        if xf:
            line += f"  documented unattainable sub-checks: {', '.join(xf)}"
        tr.write_line(line)
