from pathlib import Path

import pytest

from dualgraph import load_graph

SAMPLES = Path(__file__).parent.parent / "samples"


def sample_path(name):
    return str(SAMPLES / f"{name}.graph")


@pytest.fixture
def ex4p():
    """Tree with det(S)=4, L and A on a, one branch on each other vertex."""
    return load_graph(sample_path("ex4p"))


@pytest.fixture
def x1():
    return load_graph(sample_path("x1"))


@pytest.fixture
def x3():
    return load_graph(sample_path("x3"))


@pytest.fixture
def d4():
    return load_graph(sample_path("d4"))


@pytest.fixture
def a1():
    return load_graph(sample_path("a1"))
