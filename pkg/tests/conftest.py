import numpy as np
import pytest

# master seed fixed before any test was run; never tuned
SEED = 12345


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
