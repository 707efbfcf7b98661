import numpy as np
import pytest

from bsd_kuramoto.domains import DomainSpec

ALL_TYPES = [
    DomainSpec.type_i(1, 1),
    DomainSpec.type_i(2, 2),
    DomainSpec.type_i(3, 2),
    DomainSpec.type_i(3, 1),
    DomainSpec.type_ii(2),
    DomainSpec.type_ii(3),
    DomainSpec.type_ii(4),
    DomainSpec.type_iii(1),
    DomainSpec.type_iii(2),
    DomainSpec.type_iii(3),
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def spec_id(spec):
    return spec.label()
