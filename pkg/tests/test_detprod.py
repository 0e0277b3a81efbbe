from fractions import Fraction

import pytest

from detprod import (DetProductTable, affinity, build_table, determinant_product, duchon_det, edge_determinant,
                     edge_determinants, refined_four_point)
from dualgraph import parse_graph
from errors import CrossCheckError, InputError, NotATreeError
from exactalg import IntMatrix

EX4P_TABLE = [
    [28, 24, 14, 14, 12, 8],
    [24, 24, 12, 12, 12, 8],
    [14, 12, 9, 7, 6, 4],
    [14, 12, 7, 9, 6, 4],
    [12, 12, 6, 6, 8, 4],
    [8, 8, 4, 4, 4, 4],
]


def test_edge_determinants(ex4p):
    assert edge_determinants(ex4p) == {
        ("a", "b"): 7, ("b", "a"): 4,
        ("a", "c"): 2, ("c", "a"): 9,
        ("a", "d"): 2, ("d", "a"): 9,
        ("b", "e"): 2, ("e", "b"): 8,
        ("b", "f"): 3, ("f", "b"): 4,
    }
    assert edge_determinant(ex4p, "b", ("b", "f")) == 3


def test_determinant_products(ex4p):
    assert determinant_product(ex4p, "a", "a") == 28
    assert determinant_product(ex4p, "c", "e") == 6
    assert determinant_product(ex4p, "e", "f") == 4


def test_table_matches_adjugate(ex4p):
    T = build_table(ex4p)
    assert T.det_s == 4
    assert T.index == ex4p.vertex_names
    assert T.p.entries.tolist() == EX4P_TABLE
    assert T.to_json() == {"detS": 4, "p": EX4P_TABLE}


def test_single_vertex_table(a1):
    T = build_table(a1)
    assert T("a", "a") == 1
    assert T.det_s == 2


def test_duchon(ex4p):
    assert duchon_det(ex4p, "a") == (Fraction(1, 7), 4)
    assert duchon_det(ex4p, "f")[1] == 4


def test_duchon_rejects_non_definite_subtree():
    g = parse_graph("vertex a -1\nvertex b -1\nedge a b\n")
    with pytest.raises(InputError):
        duchon_det(g, "a")


def test_tree_only(x1):
    with pytest.raises(NotATreeError, match="determinant products defined only for trees"):
        build_table(x1)
    with pytest.raises(NotATreeError):
        edge_determinants(x1)


def test_affinity(ex4p):
    T = build_table(ex4p)
    q = affinity(T, "a", "b")
    assert q.q == Fraction(6, 7)
    assert q.distance > 0
    assert affinity(T, "c", "c").q == 1


def test_affinity_is_multiplicative_along_geodesics(ex4p):
    T = build_table(ex4p)
    assert affinity(T, "c", "a").q * affinity(T, "a", "e").q == affinity(T, "c", "e").q


@pytest.mark.parametrize("quad, lhs, rhs, holds_strictly, equal", [
    (("c", "e", "d", "f"), 6 * 4, 7 * 4, True, False),
    (("c", "d", "e", "f"), 7 * 4, 6 * 4, False, False),
    (("c", "e", "b", "a"), 6 * 24, 12 * 12, True, True),
])
def test_refined_four_point(ex4p, quad, lhs, rhs, holds_strictly, equal):
    T = build_table(ex4p)
    report = refined_four_point(ex4p, T, *quad)
    assert (report.lhs, report.rhs) == (lhs, rhs)
    assert report.meets == holds_strictly
    assert (report.lhs == report.rhs) == equal
    assert report.holds


def test_crosscheck_catches_corrupted_products(ex4p, monkeypatch):
    import detprod

    real = detprod.edge_determinants

    def off_by_one(g):
        dets = real(g)
        dets[("a", "b")] += 1
        return dets

    monkeypatch.setattr(detprod, "edge_determinants", off_by_one)
    with pytest.raises(CrossCheckError, match="adj"):
        build_table(ex4p)
    assert build_table(ex4p, crosscheck=False)("a", "a") == 32


def test_table_call_uses_names():
    T = DetProductTable(IntMatrix("xy", [[2, 1], [1, 2]]), 3)
    assert T("x", "y") == 1
