from pathlib import Path

import pytest

from latcover.geom_core import cube, standard_simplex
from latcover.lattice_cover import Lattice

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def triangle():
    return standard_simplex(2)


@pytest.fixture
def tetrahedron():
    return standard_simplex(3)


@pytest.fixture
def unit_square():
    return cube(2, centered=False)


@pytest.fixture
def fary_lattice():
    """Triangle lattice of density 3/2 for the standard triangle."""
    return Lattice.of([["2/3", "-1/3"], ["-1/3", "2/3"]])
