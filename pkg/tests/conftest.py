import numpy as np
import pytest

from swarmsteer import _kernels_py

BACKENDS = [pytest.param(_kernels_py, id="python")]
try:
    from swarmsteer import _ckernels
    BACKENDS.append(pytest.param(_ckernels, id="cython"))
except ImportError:
    pass


@pytest.fixture(params=BACKENDS)
def kern(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])
