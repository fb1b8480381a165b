import pytest

from timelot import Domain
from timelot.models import (
    GLBU,
    Disappointment,
    ExpCubic,
    ExpGain,
    Exponential,
    Hyperbolic,
    IdentityCurvature,
    IdentityValue,
    MultiplicativeEU,
    edu,
    example_model,
)

EDU_DOMAIN = Domain(1.0, 100.0, 0.0, 10.0)
WIDE_DOMAIN = Domain(1.0, 100.0, 0.0, 12.0)


@pytest.fixture(scope="session")
def edu_model():
    return edu(0.9, EDU_DOMAIN)


@pytest.fixture(scope="session")
def edu_wide():
    return edu(0.9, WIDE_DOMAIN)


@pytest.fixture(scope="session")
def example1():
    return example_model()


@pytest.fixture(scope="session")
def hyperbolic_model():
    return MultiplicativeEU(IdentityCurvature(), Hyperbolic(1.0), IdentityValue(), EDU_DOMAIN)


@pytest.fixture(scope="session")
def expcubic_model():
    return MultiplicativeEU(IdentityCurvature(), ExpCubic(), IdentityValue(), Domain(1.0, 100.0, 0.0, 3.0))


@pytest.fixture(scope="session")
def glbu03():
    return GLBU(0.3, Exponential(0.9), IdentityValue(), WIDE_DOMAIN)


@pytest.fixture(scope="session")
def disappointment_model():
    return Disappointment(Exponential(0.9), IdentityValue(), ExpGain(0.5, 1.0), EDU_DOMAIN)
