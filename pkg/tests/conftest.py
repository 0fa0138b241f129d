import pytest

from randcurv.rng import RngStream


@pytest.fixture
def stream():
    return RngStream(20240611)
