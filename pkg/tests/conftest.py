import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dexanno import _backend  # noqa: E402

BACKENDS = ["python"] + (["cython"] if _backend.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = _backend.name()
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
