import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from robustspline.spline import DesignPoints  # noqa: E402


def jittered_design(rng, n, a=0.0, b=1.0, jitter=0.4):
    """Quasi-uniform design: cell midpoints jittered by up to ``jitter`` cells."""
    u = (np.arange(n) + 0.5 + rng.uniform(-jitter, jitter, n)) / n
    return DesignPoints(a + (b - a) * u, (a, b))


@st.composite
def designs(draw, min_n=5, max_n=30):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return jittered_design(np.random.default_rng(seed), n)


log_lams = st.floats(-6.0, 2.0).map(lambda e: 10.0 ** e)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
