import numpy as np
import pytest

from mtdirac.clifford import build_dirac_rep, build_weyl_rep


@pytest.fixture(scope="session")
def dirac():
    return build_dirac_rep()


@pytest.fixture(scope="session")
def weyl():
    return build_weyl_rep()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
