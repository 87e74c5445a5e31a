import numpy as np
import pytest
from hypothesis import settings

from lrqtc.arrays import QuaternionMatrix
from lrqtc.linalg import qmatmul

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unitarity_residual(U: QuaternionMatrix) -> float:
    """max of ||U^H U - I||_F and ||U U^H - I||_F."""
    n1, n2 = U.shape
    a = (qmatmul(U.H, U) - QuaternionMatrix.identity(n2)).norm()
    b = (qmatmul(U, U.H) - QuaternionMatrix.identity(n1)).norm()
    return max(a, b)


@pytest.fixture
def acceptance_log(request):
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        lines.append(f"[{status}] {name}: {detail}")

    def skip(name: str, reason: str):
        lines.append(f"[SKIP] {name}: {reason}")

    record.skip = skip
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
