import os
from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

from ezdkit.algebra import load_algebra
from ezdkit.relparser import parse_matrix

settings.register_profile(
    "ezdkit", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ezdkit"))

FIXTURES = resources.files("ezdkit") / "fixtures"
ALGEBRA_FIXTURES = sorted(p.name for p in FIXTURES.iterdir() if p.name.endswith(".alg"))

_cache = {}


def load(name):
    """Bundled fixture algebra, built once per session."""
    if not name.endswith(".alg"):
        name += ".alg"
    if name not in _cache:
        _cache[name] = load_algebra((FIXTURES / name).read_text())
    return _cache[name]


def load_matrix(A, name):
    return parse_matrix((FIXTURES / name).read_text(), A)


@pytest.fixture
def ring8_f5():
    return load("ring8_f5")


@pytest.fixture
def selfpair_e3():
    return load("selfpair_e3_f5")


# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
