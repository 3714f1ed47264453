import os
import subprocess

import pytest

from liverank.smt import SolverConfig

BENCH_DIR = os.path.join(os.path.dirname(__file__), "..", "benchmarks")

EASY_BENCHMARKS = ["toy_stab", "binary_counter", "mutex_ring"]
STRETCH_BENCHMARKS = ["dijkstra_k_a", "dijkstra_k_b", "dijkstra_k_c",
                      "dijkstra_k_fair", "leader_ring"]
HARD_BENCHMARKS = ["dijkstra_4", "ghosh_4", "dijkstra_3"]
ALL_BENCHMARKS = EASY_BENCHMARKS + STRETCH_BENCHMARKS + HARD_BENCHMARKS


def bench_path(name: str) -> str:
    return os.path.join(BENCH_DIR, f"{name}.lrk")


def _solver_works() -> bool:
    cfg = SolverConfig(timeout=30)
    try:
        proc = subprocess.run([cfg.solver_path, "-version"], capture_output=True,
                              timeout=30)
        return proc.returncode == 0
    except (FileNotFoundError, subprocess.TimeoutExpired):
        return False


_HAVE_SOLVER = None


def have_solver() -> bool:
    global _HAVE_SOLVER
    if _HAVE_SOLVER is None:
        _HAVE_SOLVER = _solver_works()
    return _HAVE_SOLVER


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the long stretch-tier end-to-end checks")


def pytest_collection_modifyitems(config, items):
    skip_solver = pytest.mark.skip(reason="no SMT solver executable available")
    skip_slow = pytest.mark.skip(reason="stretch tier; enable with --runslow")
    for item in items:
        if "solver" in item.keywords and not have_solver():
            item.add_marker(skip_solver)
        if "slow" in item.keywords and not config.getoption("--runslow"):
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def solver_cfg():
    return SolverConfig(timeout=120)
