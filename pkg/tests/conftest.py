import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from leadersync.numerics import kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compilation must not be charged to any individual test
    kernels.warmup()
