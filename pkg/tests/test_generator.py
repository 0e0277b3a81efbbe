import pytest

from dualgraph import BranchPoint, FreePoint, IntersectionPoint, format_graph, is_arborescent
from errors import InputError
from exactalg import is_negative_definite
from generator import GRAPH, MAX_BRANCHES, TREE, generate_graph, generate_instance, generate_tree, random_blow_up


@pytest.mark.parametrize("seed", range(10))
def test_generated_trees_are_valid(seed):
    g = generate_tree(seed, 7)
    assert g.vertex_names == tuple(f"v{i}" for i in range(7))
    assert is_arborescent(g)
    assert is_negative_definite(g.intersection_matrix())
    assert g.branch_names[0] == "L"
    assert 2 <= len(g.branches) <= MAX_BRANCHES + 1


@pytest.mark.parametrize("seed", range(5))
def test_rejection_sampled_trees_are_negative_definite(seed):
    g = generate_tree(seed, 6, reject_sample=True)
    assert is_negative_definite(g.intersection_matrix())
    assert is_arborescent(g)


@pytest.mark.parametrize("seed", range(10))
def test_generated_graphs_have_cycles(seed):
    g = generate_graph(seed, 5)
    assert not is_arborescent(g)
    assert is_negative_definite(g.intersection_matrix())


def test_generation_is_deterministic():
    assert format_graph(generate_instance(11, 9)) == format_graph(generate_instance(11, 9))
    assert format_graph(generate_instance(11, 9, GRAPH)) == format_graph(generate_instance(11, 9, GRAPH))
    assert generate_tree(3, 5) == generate_tree(3, 5)


def test_instance_sizes():
    for seed in range(20):
        assert 1 <= len(generate_instance(seed, 4, TREE).vertices) <= 4
        assert 2 <= len(generate_instance(seed, 4, GRAPH).vertices) <= 4


def test_bad_arguments():
    with pytest.raises(InputError):
        generate_tree(0, 0)
    with pytest.raises(InputError):
        generate_graph(0, 1)
    with pytest.raises(InputError):
        generate_instance(0, 5, "forest")


def test_random_blow_up(ex4p):
    seen = set()
    for seed in range(30):
        g2, site = random_blow_up(seed, ex4p)
        seen.add(type(site))
        assert len(g2.vertices) == len(ex4p.vertices) + 1
        assert g2.weight("n") == -1
        assert is_arborescent(g2)
    assert seen == {FreePoint, IntersectionPoint, BranchPoint}


@pytest.mark.parametrize("seed", range(40))
def test_single_vertex_tree_has_weight_at_most_minus_two(seed):
    g = generate_tree(seed, 1)
    assert len(g.vertices) == 1
    assert not g.edges
    assert g.vertices[0].weight <= -2


def test_max_vertices_must_be_positive():
    with pytest.raises(InputError):
        generate_instance(0, 0)
