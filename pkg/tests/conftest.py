from pathlib import Path

import pytest

from trojanscan import default_registry, load_tables

DATA = Path(__file__).parent / "data"

# Acceptance results, printed once at the end of the session.
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def tables():
    return load_tables()


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def fig1_text():
    return (DATA / "fig1.c").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fig2_text():
    return (DATA / "fig2.txt").read_text(encoding="utf-8")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
