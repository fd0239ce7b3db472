import numpy as np
import pytest

from fods_ident._backend import get_kernels

try:
    get_kernels("cython")
    BACKENDS = ["python", "cython"]
except ImportError:
    BACKENDS = ["python"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Swap the active kernel module for the duration of a test."""
    import fods_ident.gl as gl

    monkeypatch.setattr(gl, "kernels", get_kernels(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
