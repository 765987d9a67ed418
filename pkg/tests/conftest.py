import numpy as np
import pytest

from anosovlab.families import FamilyParams, derived_examples, family_st, fuchsian_octagon, schottky


@pytest.fixture(scope="session")
def fuchsian():
    return fuchsian_octagon()


@pytest.fixture(scope="session")
def rho1(fuchsian):
    return fuchsian[0]


@pytest.fixture(scope="session")
def hmodel(fuchsian):
    return fuchsian[1]


@pytest.fixture(scope="session")
def derived(rho1):
    return derived_examples(rho1)


@pytest.fixture(scope="session")
def sym3(derived):
    return derived["Sym3"].rep


@pytest.fixture(scope="session")
def dsum1(derived):
    return derived["DirectSumTrivial1"].rep


@pytest.fixture(scope="session")
def rho_st(rho1):
    return family_st(rho1, FamilyParams(1.0, 0.1))


@pytest.fixture(scope="session")
def free2():
    return schottky(3.0)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))
