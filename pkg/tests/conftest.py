import os
import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def mock():
    from zkinfer.algebra import get_engine

    return get_engine("mock")


@pytest.fixture(scope="session")
def bn254():
    from zkinfer.algebra import get_engine

    return get_engine("bn254")


# -- acceptance summary ------------------------------------------------------------------------

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record PASS/FAIL for an acceptance criterion: ``with criterion(3, "title"): ...``."""
    import contextlib
    import time

    @contextlib.contextmanager
    def run(number, title):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException:
            ACCEPTANCE[number] = ("FAIL", title, time.perf_counter() - t0)
            raise
        ACCEPTANCE[number] = ("PASS", title, time.perf_counter() - t0)

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, seconds = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}  ({seconds:.1f}s)")
