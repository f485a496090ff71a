import numpy as np
import pytest

from prospectus import CptParams
from prospectus import defaults


@pytest.fixture
def coeffs():
    return defaults.utility_coefficients()

@pytest.fixture
def cpt_means():
    """Estimated risk parameters, sign-dependent distortion."""
    return defaults.cpt_params(sign_dependent_alpha=True)


@pytest.fixture
def cpt_single_alpha():
    """Estimated risk parameters with one distortion exponent for both regimes."""
    return defaults.cpt_params(sign_dependent_alpha=False)


@pytest.fixture
def risk_neutral():
    return CptParams.risk_neutral()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_prospect(rng, max_n=20, scale=10.0):
    """A random strictly-ascending discrete prospect."""
    from prospectus import DiscreteProspect

    n = int(rng.integers(2, max_n + 1))
    utilities = np.sort(rng.normal(0.0, scale, size=n))
    utilities += np.arange(n) * 1e-9  # break ties
    probabilities = rng.dirichlet(np.ones(n))
    return DiscreteProspect.from_outcomes(utilities, probabilities)
