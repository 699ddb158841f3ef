import random
from pathlib import Path

import pytest

from stratkit import builtin_rules, builtin_signature
from stratkit.files import load_signature

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def sig():
    return builtin_signature()


@pytest.fixture(scope="session")
def rules():
    """Built-in rule set keyed by name."""
    return {r.name: r for r in builtin_rules()}


@pytest.fixture(scope="session")
def company_sig():
    return load_signature(FIXTURES / "company.sig")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture()
def rng():
    return random.Random(99)
