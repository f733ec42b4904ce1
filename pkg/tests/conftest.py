import numpy as np
import pytest

from nrm_lab import validate_instance
from nrm_lab._backend import compiled_kernels, python_kernels

MULTI_BOM = [
    [1, 0, 1, 0, 0],
    [0, 1, 0, 1, 1],
    [1, 1, 0, 0, 0],
    [0, 0, 0, 0, 1],
]


def two_class(r1=2.0, b=1.0, T=1000.0):
    """Two unit-rate classes sharing one resource with capacity b*T."""
    return validate_instance({"horizon": T, "lambda": [1, 1], "revenue": [r1, 1],
                              "bom": [[1, 1]], "capacity": [b * T]})


def multi_resource(T=1000.0):
    return validate_instance({"horizon": T, "lambda": [1] * 5, "revenue": [10, 3, 6, 1, 2],
                              "bom": MULTI_BOM, "capacity": [T] * 4})


def single_class(T=100.0, C=None):
    return validate_instance({"horizon": T, "lambda": [1], "revenue": [1], "bom": [[1]],
                              "capacity": [T if C is None else C]})


_compiled = compiled_kernels()
BACKENDS = [pytest.param(python_kernels, id="python")]
BACKENDS.append(pytest.param(_compiled, id="cython", marks=pytest.mark.skipif(
    _compiled is None, reason="compiled kernels not built")))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_REPORT_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request, capsys):
    """Record one PASS/FAIL line per acceptance criterion and echo it immediately."""
    lines = request.config.stash.setdefault(_REPORT_KEY, [])

    def emit(label, ok, detail):
        line = f"{label}: {'PASS' if ok else 'FAIL'} ({detail})"
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
