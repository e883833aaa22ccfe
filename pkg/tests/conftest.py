import numpy as np
import pytest
from hypothesis import settings

from cavity_duet.params import FIGURE_PRESETS, INITIAL_KET
from cavity_duet.sector import basis_state, build_sector_basis

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sector3():
    return build_sector_basis(3)


@pytest.fixture(scope="session")
def psi_ref(sector3):
    return basis_state(sector3, INITIAL_KET)


@pytest.fixture(scope="session")
def fig_params():
    return FIGURE_PRESETS


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(basis, rng):
    amp = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    from cavity_duet.sector import PureState
    return PureState(basis, amp / np.linalg.norm(amp))
