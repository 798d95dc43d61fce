import numpy as np
import pytest

from opencavity import _kernels
from opencavity.geometry import CavityGeometry


@pytest.fixture(scope="session")
def fig3_stack():
    """n1 = 1.25, 21 layers, half-wave cavity."""
    return CavityGeometry.build(1.25, 11, 0.5)


@pytest.fixture(scope="session")
def high_q():
    """n1 = 2, 19 layers, half-wave cavity: gamma ~ 4e-7."""
    return CavityGeometry.build(2.0, 10, 0.5)


BACKENDS = [pytest.param(_kernels.fallback, id="numpy")]
if _kernels.compiled is not None:
    BACKENDS.append(pytest.param(_kernels.compiled, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
