import numpy as np
import pytest

from mslab import maxa
from mslab.finquant import bounded_closure
from mslab.subspace import canonicalize


@pytest.fixture(scope="session")
def spin_half():
    return maxa.spin_half_fixtures()


@pytest.fixture(scope="session")
def spin_one():
    return maxa.spin_one_fixtures()


@pytest.fixture(scope="session")
def half_closure(spin_half):
    return bounded_closure(list(spin_half.named.values()), 3)


def make_random_subspace(rng, n, dim=None):
    if dim is None:
        dim = int(rng.integers(1, n * n))
    gens = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(dim)]
    return canonicalize(gens)


@pytest.fixture
def random_subspace():
    return make_random_subspace
