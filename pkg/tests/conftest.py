import warnings

import pytest

from landau_eig import potential_chain as pc
from landau_eig.cmatrix import make_bundle
from landau_eig.errors import TruncationWarning
from landau_eig.family_solver import iterate_family


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


@pytest.fixture(scope="session")
def family_m1():
    return iterate_family(0.1, make_bundle(1))


@pytest.fixture(scope="session")
def family_m2():
    return iterate_family(0.05, make_bundle(2))


@pytest.fixture(scope="session")
def chain_m1(family_m1):
    return pc.from_family(family_m1)


@pytest.fixture(scope="session")
def chain_m2(family_m2):
    return pc.from_family(family_m2)
