import functools
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from translators.profile_ode import SolverConfig, solve_bowl, solve_wing


@functools.lru_cache(maxsize=None)
def wing(n, R, r_max=100.0, tol=1e-10):
    return solve_wing(n, R, SolverConfig.with_tol(tol, r_max=r_max))


@functools.lru_cache(maxsize=None)
def bowl(n, r_max=100.0, tol=1e-10):
    return solve_bowl(n, SolverConfig.with_tol(tol, r_max=r_max))


ACCEPTANCE = {}


def record(k, ok, detail):
    ACCEPTANCE[k] = (ok, detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")
