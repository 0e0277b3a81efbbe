from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

import ultra
from dualgraph import IntersectionPoint, WeightedDualGraph, blow_up
from errors import InputError, NotATreeError, ReducibleHyperplaneError
from exactalg import RatMatrix
from generator import generate_graph, generate_tree
from lattice import build_lattice, mumford_intersection
from ultra import (METRIC_ONLY, NOT_METRIC, ULTRAMETRIC, UltrametricSpace, check_bound, check_teissier, classify,
                   formula_crosscheck, space_from_function, ul_upper_bound, ultrametric_UL, ultrametric_UO,
                   verify_metric, verify_ultrametric)

EX4P_UL = [
    [0, 7, 7, 7, 7, 7],
    [7, 0, 7, 7, 6, 6],
    [7, 7, 0, 7, 7, 7],
    [7, 7, 7, 0, 7, 7],
    [7, 6, 7, 7, 0, 6],
    [7, 6, 7, 7, 6, 0],
]


def test_ex4p_ultrametric(ex4p):
    U = ultrametric_UL(ex4p, "L")
    assert U.labels == ("A", "B", "C", "D", "E", "F")
    assert U.dist.entries.tolist() == EX4P_UL
    assert classify(U).verdict == ULTRAMETRIC
    assert classify(U).witness is None


def test_tree_route_agrees_with_mumford_numbers(ex4p):
    U = ultrametric_UL(ex4p, "L")
    lattice = build_lattice(ex4p)
    for A, B in combinations(U.labels, 2):
        expected = (mumford_intersection(lattice, "L", A) * mumford_intersection(lattice, "L", B)
                    / mumford_intersection(lattice, A, B))
        assert U(A, B) == expected


def test_measured_subset(ex4p):
    U = ultrametric_UL(ex4p, "L", ["E", "B"])
    assert U.labels == ("E", "B")
    assert U("B", "E") == 6


def test_measured_set_errors(ex4p):
    with pytest.raises(InputError):
        ultrametric_UL(ex4p, "L", ["L", "A"])
    with pytest.raises(InputError):
        ultrametric_UL(ex4p, "L", ["A", "A"])


def test_x1_is_metric_but_not_ultrametric(x1):
    U = ultrametric_UL(x1, "L")
    assert U("A", "B") == Fraction(114 * 70, 98 * 56)
    assert U("A", "C") == Fraction(114 * 64, 92 * 56)
    assert U("B", "C") == Fraction(70 * 64, 56 * 56)
    verdict = classify(U)
    assert verdict.verdict == METRIC_ONLY
    assert verdict.witness.triple == ("A", "B", "C")
    assert "U(A,B)" in verdict.witness.reason


def test_x3_is_not_a_metric(x3):
    U = ultrametric_UL(x3, "L")
    scaled = U.scaled(480)
    assert (scaled("A", "B"), scaled("A", "C"), scaled("B", "C")) == (75, 35, 35)
    verdict = classify(U)
    assert verdict.verdict == NOT_METRIC
    assert verdict.witness.triple == ("A", "B", "C")
    assert verify_metric(U) is not None


def test_ul_invariant_under_blow_up(x1):
    g = blow_up(x1, IntersectionPoint("a", "l"))
    assert ultrametric_UL(g, "L").dist == ultrametric_UL(x1, "L").dist


def test_square_metric_witness():
    dist = {frozenset("wx"): 1, frozenset("xy"): 1, frozenset("yz"): 1, frozenset("wz"): 1,
            frozenset("wy"): 2, frozenset("xz"): 2}
    U = space_from_function("wxyz", lambda a, b: Fraction(dist[frozenset((a, b))]))
    witness = verify_ultrametric(U)
    assert witness is not None
    assert witness.triple == ("w", "x", "y")
    assert verify_metric(U) is None
    assert classify(U).verdict == METRIC_ONLY


def test_space_validation():
    with pytest.raises(InputError):
        UltrametricSpace(RatMatrix("ab", [[0, 1], [2, 0]]))
    with pytest.raises(InputError):
        UltrametricSpace(RatMatrix("ab", [[1, 1], [1, 0]]))
    with pytest.raises(InputError):
        UltrametricSpace(RatMatrix("ab", [[0, 0], [0, 0]]))


def test_formula_crosscheck(ex4p, x1):
    assert formula_crosscheck(ex4p, "L", "B", "E") == (6, 6, 6)
    assert formula_crosscheck(ex4p, "L", "C", "F") == (7, 7, 7)
    with pytest.raises(NotATreeError):
        formula_crosscheck(x1, "L", "A", "B")


def test_upper_bound(ex4p):
    assert ul_upper_bound(ex4p, "L") == 7
    tight = check_bound(ex4p, "L", "C", "D")
    assert (tight.value, tight.bound, tight.tight) == (7, 7, True)
    loose = check_bound(ex4p, "L", "B", "E")
    assert (loose.value, loose.bound, loose.tight) == (6, 7, False)


def test_uo_d4(d4):
    U = ultrametric_UO(d4)
    assert U.labels == ("A", "B", "C")
    assert all(U(a, b) == 2 for a, b in combinations(U.labels, 2))
    teissier = check_teissier(d4)
    assert (teissier.vertex, teissier.multiplicity, teissier.largest) == ("c", 2, 2)
    assert teissier.holds


def test_uo_ex4p(ex4p):
    U = ultrametric_UO(ex4p)
    assert U("A", "B") == Fraction(2, 3)
    assert U("E", "F") == 1
    teissier = check_teissier(ex4p)
    assert teissier.vertex == "f"
    assert teissier.multiplicity == 1
    assert teissier.holds


def test_uo_needs_irreducible_hyperplane(a1):
    with pytest.raises(ReducibleHyperplaneError, match="reducible"):
        ultrametric_UO(a1)


@pytest.mark.parametrize("seed", range(6))
def test_ul_is_equivariant_under_relabelling(seed):
    g = generate_tree(seed, 7)
    U = ultrametric_UL(g, "L")
    order = [U.labels[i] for i in np.random.default_rng(seed).permutation(len(U.labels))]
    shuffled = ultrametric_UL(g, "L", F=order)
    assert shuffled.labels == tuple(order)
    for a, b in combinations(U.labels, 2):
        assert shuffled(a, b) == U(a, b)


@pytest.mark.parametrize("make", [generate_tree, generate_graph])
@pytest.mark.parametrize("seed", range(4))
def test_ul_ignores_vertex_order(make, seed):
    g = make(seed, 6)
    flipped = WeightedDualGraph(tuple(reversed(g.vertices)), g.edges, g.branches)
    assert flipped.vertex_names != g.vertex_names
    U, V = ultrametric_UL(g, "L"), ultrametric_UL(flipped, "L")
    assert U.labels == V.labels
    assert U.dist == V.dist


def test_teissier_reuses_a_computed_space(d4, monkeypatch):
    U = ultrametric_UO(d4)

    def recompute(*args, **kwargs):
        raise AssertionError("U_O recomputed")

    monkeypatch.setattr(ultra, "ultrametric_UO", recompute)
    teissier = check_teissier(d4, space=U)
    assert (teissier.vertex, teissier.multiplicity, teissier.largest) == ("c", 2, 2)
