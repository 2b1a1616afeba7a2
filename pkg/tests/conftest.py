import functools
import warnings

import pytest
from hypothesis import settings

from dimpoly.diffring import parse_poly
from dimpoly.extdim import ExtensionSpec, compute_phi
from dimpoly.lattice import Partition

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# four-term relation with exponents a=3, b=2, c=1; its Phi has total degree 2
QUAD4 = "a1^3 y1 + a1^-3 y1 + a2^2 y1 + a3^1 y1"


def spec_from(blocks, n, *polys):
    part = Partition.from_sizes(blocks)
    return ExtensionSpec(part, n, tuple(parse_poly(p, part.m, n) for p in polys))


def four_term(a, b, c):
    return f"a1^{a} y1 + a1^-{a} y1 + a2^{b} y1 + a3^{c} y1"


@functools.lru_cache(maxsize=None)
def phi_for(blocks, n, polys, check_lambda=True):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return compute_phi(spec_from(blocks, n, *polys), check_lambda=check_lambda)


@pytest.fixture(scope="session")
def quad4_spec():
    return spec_from((1, 1, 1), 1, QUAD4)


@pytest.fixture(scope="session")
def quad4_result():
    return phi_for((1, 1, 1), 1, (QUAD4,))


@pytest.fixture(scope="session")
def shift_spec():
    return spec_from((1,), 1, "a1^1 y1 + y1")
