"""Session fixtures and a deterministic hypothesis profile."""

from __future__ import annotations

import sys

import pytest
from hypothesis import HealthCheck, settings

from stochorder import catalog

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def named_distributions():
    return catalog.distributions()


@pytest.fixture(scope="session")
def named_distortions():
    return catalog.distortions()


@pytest.fixture(scope="session")
def named_signatures():
    return catalog.signatures()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance criterion lines into the run summary."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", ()) if mod else ()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
