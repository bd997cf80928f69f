"""Shared fixtures: one synthetic panel per session, processed once.

The real survey panel is not distributed with the repository; tests
that reproduce published numbers look for it via the LIFELADDER_PANEL
environment variable (or data/panel.csv) and skip when absent. All
machinery tests run on the deterministic synthetic panel.
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from lifeladder import (
    default_scheme,
    discretize,
    filter_countries,
    impute,
    load_raw,
    split,
)
from lifeladder.pipeline import SplitSpec, read_aliases

from synthpanel import write_panel

PANEL_SEED = 0

_REPO_ROOT = Path(__file__).resolve().parent.parent
_ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_acceptance(criterion: str, passed: bool, detail: str = ""):
    _ACCEPTANCE_RESULTS.append((criterion, "PASS" if passed else "FAIL", detail))
    assert passed, f"{criterion}: {detail}"


def record_acceptance_skip(criterion: str, reason: str):
    _ACCEPTANCE_RESULTS.append((criterion, "SKIP", reason))
    pytest.skip(reason)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in sorted(_ACCEPTANCE_RESULTS):
        line = f"{criterion}: {status}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)


def real_panel_path() -> Path | None:
    env = os.environ.get("LIFELADDER_PANEL")
    if env:
        p = Path(env)
        if p.exists():
            return p
    default = _REPO_ROOT / "data" / "panel.csv"
    return default if default.exists() else None


def real_panel_aliases() -> dict:
    config = _REPO_ROOT / "data" / "whr2020_aliases.ini"
    return read_aliases(config) if config.exists() else {}


@pytest.fixture(scope="session")
def panel_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("panel") / "panel.csv"
    write_panel(path, seed=PANEL_SEED)
    return path


@pytest.fixture(scope="session")
def raw_table(panel_csv):
    return load_raw(panel_csv)


@pytest.fixture(scope="session")
def feature_table(raw_table):
    return impute(filter_countries(raw_table))


@pytest.fixture(scope="session")
def train_test(feature_table):
    return split(feature_table, SplitSpec())


@pytest.fixture(scope="session")
def discrete_table(feature_table):
    return discretize(feature_table, default_scheme())
