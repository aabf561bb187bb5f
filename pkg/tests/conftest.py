"""Shared fixtures and hypothesis settings."""

from hypothesis import HealthCheck, settings

import pytest

from totsim.victim import load_devices

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def devices():
    return load_devices()
