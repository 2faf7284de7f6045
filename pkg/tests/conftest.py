import pytest

from chainsparse.core import Code
from chainsparse.generators import cut_code, k3


@pytest.fixture
def k3_code():
    return cut_code(k3())


@pytest.fixture
def i4():
    return Code.identity(4)
