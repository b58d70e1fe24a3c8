import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hhsim.model import HHParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def two_site_params():
    """The paper-scale two-site chain: U = omega0 = 8k, 8-level modes."""
    return HHParams(omega0=8.0, u=8.0, k=1.0, g=0.5, lattice=(1, 2), boson_levels=8)


@pytest.fixture
def small_two_site_params():
    """Two sites with minimal truncation, cheap enough for dense cross-checks."""
    return HHParams(omega0=3.0, u=2.0, k=1.0, g=0.4, lattice=(1, 2), boson_levels=4)
