from itertools import combinations

import pytest

from dualgraph import (Branch, BranchPoint, FreePoint, IntersectionPoint, Vertex, WeightedDualGraph, blow_up,
                       format_graph, fresh_name, geodesic, graph_to_json, infimum, is_arborescent, load_graph,
                       parse_graph, require_tree, subtree_in_direction, total_transform_tree, with_branch)
from errors import GraphSyntaxError, GraphValidationError, InputError, NotATreeError, UnknownNameError
from generator import generate_tree


def test_parse_ex4p(ex4p):
    assert ex4p.vertex_names == ("a", "b", "c", "d", "e", "f")
    assert ex4p.branch_names == ("L", "A", "B", "C", "D", "E", "F")
    assert ex4p.weight("f") == -3
    assert ex4p.attachment("A") == "a"
    assert ex4p.neighbors("a") == ["b", "c", "d"]
    assert ex4p.degree("b") == 3
    assert is_arborescent(ex4p)


def test_parse_multiplicities(x1):
    assert x1.multiplicity("a", "l") == 3
    assert x1.multiplicity("l", "a") == 3
    assert x1.multiplicity("a", "a") == 0
    assert x1.degree("a") == 6
    assert not is_arborescent(x1)


def test_intersection_matrix(x1):
    I = x1.intersection_matrix()
    assert I.index == ("a", "b", "c", "l")
    assert I.entries.tolist() == [
        [-4, 1, 2, 3],
        [1, -5, 1, 2],
        [2, 1, -6, 1],
        [3, 2, 1, -7],
    ]


def test_repeated_edge_lines_add_up():
    g = parse_graph("vertex a -3\nvertex b -3\nedge a b\nedge b a\n")
    assert g.edges == (("a", "b", 2),)
    assert not is_arborescent(g)


def test_comments_genus_and_blank_lines():
    g = parse_graph("# header\n\nvertex a -2 genus 1   # trailing\n")
    assert g.vertices == (Vertex("a", -2, 1),)


def test_format_graph_parses_back(x1):
    assert parse_graph(format_graph(x1)) == x1


def test_graph_to_json(a1):
    assert graph_to_json(a1) == {
        "vertices": [{"name": "a", "weight": -2, "genus": 0}],
        "edges": [],
        "branches": [{"name": "A", "at": "a"}],
    }


@pytest.mark.parametrize("text, line", [
    ("vertex a\n", 1),
    ("vertex a -2\nvertex b x\n", 2),
    ("vertex a -2\nedge a\n", 2),
    ("vertex a -2\nbranch A on a\n", 2),
    ("vertex a -2\nfoo a\n", 2),
    ("vertex a -2\nvertex b -2\nedge a b 0\n", 3),
    ("vertex a -2 genus -1\n", 1),
])
def test_syntax_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphSyntaxError) as info:
        parse_graph(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


@pytest.mark.parametrize("text, message", [
    ("vertex a 0\n", "nonnegative weight"),
    ("vertex a -2\nvertex a -3\n", "duplicate name"),
    ("vertex a -2\nbranch a at a\n", "duplicate name"),
    ("vertex a -2\nedge a a\n", "loop edge"),
    ("vertex a -2\nedge a b\n", "unknown vertex"),
    ("vertex a -2\nbranch A at b\n", "unknown vertex"),
    ("vertex a -2\nvertex b -2\n", "disconnected"),
    ("# nothing\n", "no vertices"),
])
def test_validation_errors(text, message):
    with pytest.raises(GraphValidationError, match=message):
        parse_graph(text)


def test_validation_errors_are_input_errors():
    assert issubclass(GraphValidationError, InputError)
    assert InputError.exit_code == 2


def test_unknown_names(ex4p):
    with pytest.raises(UnknownNameError):
        ex4p.weight("z")
    with pytest.raises(UnknownNameError):
        ex4p.attachment("Z")


def test_geodesic_and_infimum(ex4p):
    assert geodesic(ex4p, "c", "e") == ("c", "a", "b", "e")
    assert geodesic(ex4p, "d", "d") == ("d",)
    assert infimum(ex4p, "a", "e", "f") == "b"
    assert infimum(ex4p, "a", "c", "f") == "a"
    assert infimum(ex4p, "c", "e", "f") == "b"


def test_tree_queries_reject_cycles(x1):
    with pytest.raises(NotATreeError, match="defined only for trees"):
        require_tree(x1, "geodesics")
    with pytest.raises(NotATreeError):
        geodesic(x1, "a", "b")


def test_subtree_in_direction(ex4p):
    sub = subtree_in_direction(ex4p, "a", ("a", "b"))
    assert sub.vertex_names == ("b", "e", "f")
    assert sub.branches == ()
    with pytest.raises(GraphValidationError):
        subtree_in_direction(ex4p, "a", ("c", "d"))
    with pytest.raises(GraphValidationError):
        subtree_in_direction(ex4p, "a", ("a", "e"))


def test_blow_up_free_point(a1):
    g = blow_up(a1, FreePoint("a"))
    assert g.vertices == (Vertex("a", -3), Vertex("n", -1))
    assert g.edges == (("a", "n", 1),)
    assert g.attachment("A") == "a"


def test_blow_up_intersection_point(x1):
    g = blow_up(x1, IntersectionPoint("a", "l"), "n")
    assert g.weight("a") == -5
    assert g.weight("l") == -8
    assert g.weight("n") == -1
    assert g.multiplicity("a", "l") == 2
    assert g.multiplicity("a", "n") == 1
    assert g.multiplicity("l", "n") == 1


def test_blow_up_branch_point_moves_the_branch(ex4p):
    g = blow_up(ex4p, BranchPoint("F"))
    assert g.attachment("F") == "n"
    assert g.weight("f") == -4
    assert is_arborescent(g)


def test_blow_up_rejects_bad_sites(ex4p):
    with pytest.raises(GraphValidationError):
        blow_up(ex4p, IntersectionPoint("c", "d"))
    with pytest.raises(GraphValidationError):
        blow_up(ex4p, FreePoint("a"), "b")


def test_fresh_name_skips_taken_names(ex4p):
    assert fresh_name(ex4p, "n") == "n"
    assert fresh_name(ex4p, "a") == "a1"
    g = with_branch(ex4p, "a1", "a")
    assert fresh_name(g, "a") == "a2"


def test_with_branch(ex4p):
    assert with_branch(ex4p, "G", "c").attachment("G") == "c"
    with pytest.raises(GraphValidationError):
        with_branch(ex4p, "A", "c")


def test_total_transform_tree(ex4p):
    G = total_transform_tree(ex4p)
    assert G.number_of_nodes() == 13
    assert G.nodes["L"]["kind"] == "branch"
    assert G.nodes["a"]["kind"] == "vertex"
    assert set(G.neighbors("a")) == {"b", "c", "d", "L", "A"}


def test_direct_construction_normalizes_edges():
    g = WeightedDualGraph(
        (Vertex("x", -2), Vertex("y", -2)),
        (("y", "x"),),
        (Branch("B", "y"),),
    )
    assert g.edges == (("x", "y", 1),)


@pytest.mark.parametrize("seed", range(8))
def test_geodesics_reverse_and_infima_commute(seed):
    g = generate_tree(seed, 8)
    names = g.vertex_names
    for u, v in combinations(names, 2):
        assert geodesic(g, v, u) == geodesic(g, u, v)[::-1]
    for root in names:
        for a, b in combinations(names, 2):
            assert infimum(g, root, a, b) == infimum(g, root, b, a)


@pytest.mark.parametrize("seed", range(8))
def test_directional_subtrees_partition_the_rest(seed):
    g = generate_tree(seed, 8)
    for u in g.vertex_names:
        parts = [set(subtree_in_direction(g, u, (u, w)).vertex_names) for w in g.neighbors(u)]
        assert sum(len(p) for p in parts) == len(g.vertex_names) - 1
        assert set().union(*parts) == set(g.vertex_names) - {u}


def test_invalid_utf8_is_an_input_error(tmp_path):
    path = tmp_path / "bad.graph"
    path.write_bytes(b"vertex \xff -2\n")
    with pytest.raises(InputError, match="not valid UTF-8"):
        load_graph(path)
