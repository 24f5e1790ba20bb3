from __future__ import annotations

import random
from pathlib import Path

import pytest

from dimerlab.graph_core import Graph, validate
from dimerlab.graph_sources import SAMPLE, SourceSpec, sample_graphs

DATA = Path(__file__).parent / "data"

# criterion number -> (description, outcome); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_addoption(parser):
    parser.addoption("--run-stretch", action="store_true", default=False,
                     help="run multi-hour stretch checks (full built-in v = 20 enumeration)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-stretch"):
        return
    skip = pytest.mark.skip(reason="stretch check; pass --run-stretch")
    for item in items:
        if "stretch" in item.keywords:
            item.add_marker(skip)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = dict(report.user_properties).get("acceptance")
    if crit is None:
        return
    num, desc = crit
    outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
    ACCEPTANCE[num] = (desc, outcome)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        desc, outcome = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2}: {outcome}  {desc}")


@pytest.fixture
def c4() -> Graph:
    return validate({0: [0, 1], 1: [0, 1]})


@pytest.fixture
def k33() -> Graph:
    return validate([[0, 1, 2]] * 3)


@pytest.fixture
def c6() -> Graph:
    return validate([[0, 1], [1, 2], [2, 0]])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


def random_graph(r: int, v: int, seed: int) -> Graph:
    return next(sample_graphs(SourceSpec(SAMPLE, r=r, v=v, seed=seed, connected_only=False)))
