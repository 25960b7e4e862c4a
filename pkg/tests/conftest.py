import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
sys.path.insert(0, str(TESTS))

settings.register_profile("suite", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture
def samples() -> Path:
    return ROOT / "samples"


@pytest.fixture
def has_disease_text(samples) -> str:
    return (samples / "has_disease.dpp").read_text()


@pytest.fixture
def f_family_text(samples) -> str:
    return (samples / "f_family.dpp").read_text()
