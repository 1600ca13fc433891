import os
from pathlib import Path

import numpy as np
import pytest

from anticomm.cli import random_hamiltonian

_ACCEPTANCE: dict[str, list[str]] = {}
_ORDER: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion this test checks")


def pytest_runtest_logreport(report):
    name = getattr(report, "acceptance_name", None)
    if name is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if name not in _ACCEPTANCE:
            _ACCEPTANCE[name] = []
            _ORDER.append(name)
        _ACCEPTANCE[name].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        rep.acceptance_name = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _ORDER:
        return
    terminalreporter.section("acceptance criteria")
    for name in _ORDER:
        outcomes = _ACCEPTANCE[name]
        if any(o == "failed" for o in outcomes):
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"{status}  {name}")


def random_suite(seed: int, count: int, n_max: int = 6, l_max: int = 10):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, n_max + 1))
        L = int(rng.integers(1, l_max + 1))
        out.append(random_hamiltonian(rng, n, L, f"random-{seed}-{i}"))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def dataset_dir():
    d = os.environ.get("ANTICOMM_DATASET_DIR")
    if not d or not Path(d).is_dir():
        pytest.skip("molecular dataset not available (set ANTICOMM_DATASET_DIR)")
    return Path(d)
