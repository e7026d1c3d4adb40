from __future__ import annotations

import time

import pytest
from hypothesis import HealthCheck, settings

# Deterministic property tests: same examples on every run.
settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

SESSION_START = time.monotonic()


@pytest.fixture(scope="session")
def session_start() -> float:
    return SESSION_START
