import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "ci",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def trained_models():
    from texive.corpus import build_models

    return build_models(seed=11)


@pytest.fixture(scope="session")
def activity_model(trained_models):
    return trained_models.activity


@pytest.fixture(scope="session")
def side_model(trained_models):
    return trained_models.side
