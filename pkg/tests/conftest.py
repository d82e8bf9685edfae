from pathlib import Path

import pytest
from hypothesis import settings

from swiptbf.serialization import load_scenario

FIXTURES = Path(__file__).resolve().parent / "fixtures"

settings.register_profile("repo", max_examples=40, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / name


@pytest.fixture
def load_fixture():
    return lambda name: load_scenario(FIXTURES / name)
