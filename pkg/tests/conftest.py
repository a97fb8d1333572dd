import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mkcslab import _kernels  # noqa: E402

KERNEL_SETS = [pytest.param(_kernels.numpy_kernels, id="numpy")]
if _kernels.numba_kernels is not None:
    KERNEL_SETS.append(pytest.param(_kernels.numba_kernels, id="numba"))


@pytest.fixture(params=KERNEL_SETS)
def kernels(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in range(1, 11):
        ok, detail = mod.RESULTS.get(number, (False, "did not complete"))
        tr.write_line(f"{number:2d} {'PASS' if ok else 'FAIL'}  {detail}")
