"""Shared fixtures and a session-wide audit of every solver trace."""

from __future__ import annotations

import numpy as np
import pytest

from netmaxcorr import mep, network

TRACE_STEP_ATOL = 1e-12

# (origin, worst step decrease) for every trace produced during the session
TRACE_LOG: list[tuple[str, float]] = []


def worst_decrease(trace) -> float:
    t = np.asarray(trace, dtype=float)
    return float(np.max(t[:-1] - t[1:], initial=0.0)) if len(t) > 1 else 0.0


def _record(origin: str, trace) -> None:
    TRACE_LOG.append((origin, worst_decrease(trace)))


_solution_post_init = network.NmcSolution.__post_init__


def _audited_post_init(self):
    _solution_post_init(self)
    _record(f"NmcSolution[{self.config.get('solver', '?')}]", self.trace)


network.NmcSolution.__post_init__ = _audited_post_init

_mep_run_init = mep.MepRun.__init__


def _audited_mep_run_init(self, *args, **kwargs):
    _mep_run_init(self, *args, **kwargs)
    _record("MepRun", self.trace)


mep.MepRun.__init__ = _audited_mep_run_init


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pmf(rng: np.random.Generator, a: int, b: int, floor: float = 0.0) -> np.ndarray:
    P = rng.dirichlet(np.ones(a * b)).reshape(a, b)
    if floor:
        P = (1 - floor) * P + floor / (a * b)
    return P


def bsc(eps: float = 0.1) -> np.ndarray:
    return np.array([[1 - eps, eps], [eps, 1 - eps]]) / 2


# ------------------------------------------------------------ acceptance log

ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    if TRACE_LOG:
        worst = max(TRACE_LOG, key=lambda t: t[1])
        terminalreporter.section("solver trace audit")
        terminalreporter.write_line(
            f"{len(TRACE_LOG)} traces recorded; largest single-step decrease {worst[1]:.3g} ({worst[0]})"
        )
