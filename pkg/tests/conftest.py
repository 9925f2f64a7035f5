import math

import pytest

from gwcavity.model import INFINITE_MASS, PhysicalConstants, SystemParams, derive_couplings


def desk_constants(eps_gw_target: float, c: float = 5000.0, omega0_alpha: float = 1.0) -> PhysicalConstants:
    """Nondimensional constants dialed so epsilon_gw comes out at the target."""
    G = eps_gw_target * 15.0 * c**5 / (8.0 * omega0_alpha**2)
    return PhysicalConstants(G=G, c=c, hbar=1.0)


@pytest.fixture
def si_consts():
    return PhysicalConstants()


@pytest.fixture
def tuned_params():
    return SystemParams(omega0=2.0, alpha_bar=1.5, gamma=1.0, delta=0.0, m=3.0, L=2.0)


@pytest.fixture
def detuned_params():
    return SystemParams(omega0=2.0, alpha_bar=1.5, gamma=1.0, delta=0.7, m=INFINITE_MASS, L=2.0)


@pytest.fixture
def lab_consts():
    # desk units with non-negligible couplings for cross checks
    return PhysicalConstants(G=1e-3, c=30.0, hbar=1.0)


def couplings_for(params, consts):
    return derive_couplings(params, consts)
