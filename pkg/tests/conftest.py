import pytest

from varexp import ExponentSpec, ModelSpec, SimConfig, gbm


@pytest.fixture(scope="session")
def p1_spec():
    """Exponent 1 + 0.005 exp(-0.1 x)."""
    return ExponentSpec.exp_decay(0.005, 0.1)


@pytest.fixture(scope="session")
def p2_spec():
    """Exponent 1 + 1e-3 / (1 + x)."""
    return ExponentSpec.rational_decay(1e-3)


@pytest.fixture(scope="session")
def inv_square_spec():
    """Exponent 1 + 1 / (1 + x)^2."""
    return ExponentSpec.inverse_square(1.0)


@pytest.fixture(scope="session")
def gbm_model():
    return gbm(0.05, 0.2)


@pytest.fixture(scope="session")
def p1_model(p1_spec):
    return ModelSpec(mu=0.05, sigma=0.2, exponent=p1_spec)


@pytest.fixture(scope="session")
def p2_model(p2_spec):
    return ModelSpec(mu=0.05, sigma=0.2, exponent=p2_spec)


@pytest.fixture
def small_cfg():
    """Fast config for functional tests."""
    return SimConfig(t_horizon=0.5, dt=0.01, n_base_paths=64, seed=1234)


def all_kinds():
    """One representative spec per exponent kind."""
    return [
        ExponentSpec.constant(1.0),
        ExponentSpec.constant(2.0),
        ExponentSpec.exp_decay(0.005, 0.1),
        ExponentSpec.inverse_square(1.0),
        ExponentSpec.rational_decay(1e-3),
    ]
