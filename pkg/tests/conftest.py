import pytest

from stclab import kernels
from stclab.algebra import golden_code, perfect_code_4x4
from stclab.alphabet import make_qam


@pytest.fixture(scope="session")
def golden():
    return golden_code()


@pytest.fixture(scope="session")
def perfect4():
    return perfect_code_4x4()


@pytest.fixture(scope="session")
def qam4():
    return make_qam(4)


@pytest.fixture(scope="session")
def qam16():
    return make_qam(16)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run the test once per available kernel backend."""
    return request.param
