import numpy as np
import pytest

from refldp import StepperConfig
from refldp.instances import build_model


@pytest.fixture(scope="session")
def press_scalar_model():
    """Boundary-pressing scalar: near-zero eigenvalue, constant drift 5."""
    return build_model("linear-damped", dict(
        dim=1, eigenvalues=[1e-4], gamma=0.0, forcing=5.0, sigma_amp=0.0, u0=0.0))


@pytest.fixture(scope="session")
def press_cfg():
    return StepperConfig(dt=1e-3, T=1.0, penalty_n=1e4)


@pytest.fixture(scope="session")
def lq_scalar_model():
    """Controllable scalar: eigenvalue 1, unit constant diffusion."""
    return build_model("constant-sigma-scalar", dict(
        lambda1=1.0, gamma=0.0, sigma_amp=1.0, u0=0.0))


@pytest.fixture(scope="session")
def lq_cfg():
    return StepperConfig(dt=0.005, T=1.0, penalty_n=1e4)


@pytest.fixture(scope="session")
def nse8_model():
    return build_model("nse-torus-8", dict(gamma=0.1, sigma_amp=0.5, u0_amp=0.6))


@pytest.fixture(scope="session")
def nse8_cfg():
    return StepperConfig(dt=1e-3, T=1.0, penalty_n=1e4)


@pytest.fixture()
def rng0():
    return np.random.default_rng(0)
