import numpy as np
import pytest

from nsplab import Grid, shock_speed, solve_profile


@pytest.fixture(scope="session")
def ref_endstates():
    """Reference 2-shock: (v-, u-, v+) = (1, 0, 1.2), delta_S ~ 0.258."""
    return shock_speed(1.0, 0.0, 1.2)


@pytest.fixture(scope="session")
def ref_profile(ref_endstates):
    return solve_profile(ref_endstates)


@pytest.fixture(scope="session")
def weak_profile():
    """Half-strength shock (v+ = 1.1) for scaling comparisons."""
    return solve_profile(shock_speed(1.0, 0.0, 1.1))


@pytest.fixture
def small_grid():
    return Grid(20.0, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
