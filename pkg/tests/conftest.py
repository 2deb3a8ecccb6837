"""Shared fixtures: parsed domain files from the domains/ directory."""

import pathlib

import pytest

import polyfred as pf

ROOT = pathlib.Path(__file__).resolve().parents[1]

# one line per acceptance criterion, echoed in the terminal summary
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)

DOMAINS = ROOT / "domains"

ALL_DOMAINS = ("square", "lshape", "hexagon", "circle",
               "slit_square", "slit_disk", "tcrack_square")
CRACK_DOMAINS = ("slit_square", "slit_disk", "tcrack_square")


def domain_path(name: str) -> str:
    return str(DOMAINS / f"{name}.json")


@pytest.fixture(scope="session")
def square():
    return pf.parse_domain(domain_path("square"))


@pytest.fixture(scope="session")
def lshape():
    return pf.parse_domain(domain_path("lshape"))


@pytest.fixture(scope="session")
def hexagon():
    return pf.parse_domain(domain_path("hexagon"))


@pytest.fixture(scope="session")
def circle():
    return pf.parse_domain(domain_path("circle"))


@pytest.fixture(scope="session")
def slit_square():
    return pf.parse_domain(domain_path("slit_square"))


@pytest.fixture(scope="session")
def slit_disk():
    return pf.parse_domain(domain_path("slit_disk"))


@pytest.fixture(scope="session")
def tcrack_square():
    return pf.parse_domain(domain_path("tcrack_square"))
