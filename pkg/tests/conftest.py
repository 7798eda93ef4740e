from __future__ import annotations

import pytest

from hjred.chain import analyze
from hjred.legendre import build_hj_system
from hjred.model import resolve_model

FIXTURES = ("relativistic_particle", "disc", "punctured_plane")


def _analysis(name: str):
    model = resolve_model(f"builtin:{name}")
    sys = build_hj_system(model)
    return model, sys, analyze(sys)


@pytest.fixture(scope="session")
def relativistic():
    return _analysis("relativistic_particle")


@pytest.fixture(scope="session")
def disc():
    return _analysis("disc")


@pytest.fixture(scope="session")
def punctured():
    return _analysis("punctured_plane")


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
