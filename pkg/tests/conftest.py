import numpy as np
import pytest

from dbfilter import _engine


@pytest.fixture(scope="session", autouse=True)
def compiled_engine():
    """Pay the JIT compilation cost once, before any timed test runs."""
    _engine.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
