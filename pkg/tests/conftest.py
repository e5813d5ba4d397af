import pathlib

import pytest

from msrmp import parse_model

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

RUNNING = FIXTURES / "running-example.json"
SMALL = FIXTURES / "example-small.json"


@pytest.fixture(scope="session")
def running_model():
    """Five threats, 25 controls, two stakeholders, fixed assignment."""
    return parse_model(RUNNING.read_bytes())


@pytest.fixture(scope="session")
def small_model():
    """Three threats, five controls, two stakeholders, no assignment."""
    return parse_model(SMALL.read_bytes())
