from fractions import Fraction
from itertools import product

import pytest

from dualgraph import parse_graph
from errors import CrossCheckError, InputError, NotNegativeDefiniteError, UnknownNameError
from lattice import (ExceptionalCycle, build_lattice, cone_membership, dual_pairing, exceptional_transform,
                     fundamental_cycle, generic_hyperplane_vertex, multiplicity, mumford_intersection)

STAR = """
vertex c -3
vertex x -2
vertex y -2
vertex z -2
edge c x
edge c y
edge c z
"""


def _anti_nef_box_minimum(lattice, bound=3):
    """Smallest cycle with coefficients in 1..bound that meets every E_v non-positively."""
    names = lattice.vertex_names
    candidates = []
    for coefficients in product(range(1, bound + 1), repeat=len(names)):
        Z = ExceptionalCycle(dict(zip(names, coefficients)))
        if cone_membership(lattice, Z).anti_nef:
            candidates.append(Z)
    minimum = min(candidates, key=lambda Z: sum(c for _, c in Z.items()))
    assert all(all(minimum.coefficient(v) <= Z.coefficient(v) for v in names) for Z in candidates)
    return minimum


def test_ex4p_lattice(ex4p):
    L = build_lattice(ex4p)
    assert L.det_s == 4
    assert dual_pairing(L, "a", "a") == Fraction(-7)
    assert dual_pairing(L, "a", "b") == Fraction(-6)
    assert dual_pairing(L, "e", "f") == Fraction(-1)


def test_dual_vector_is_dual_basis(ex4p):
    L = build_lattice(ex4p)
    for u in L.vertex_names:
        for v in L.vertex_names:
            assert L.intersect(L.dual_vector(u), v) == (1 if u == v else 0)


def test_mumford_intersection(ex4p):
    L = build_lattice(ex4p)
    assert mumford_intersection(L, "A", "B") == 6
    assert mumford_intersection(L, "L", "A") == 7
    assert mumford_intersection(L, "E", "F") == 1
    with pytest.raises(InputError):
        mumford_intersection(L, "A", "A")


def test_not_negative_definite_reports_minor():
    g = parse_graph("vertex a -1\nvertex b -1\nedge a b\n")
    with pytest.raises(NotNegativeDefiniteError) as info:
        build_lattice(g)
    assert (info.value.index, info.value.minor) == (2, 0)


def test_exceptional_transform(ex4p):
    L = build_lattice(ex4p)
    D = exceptional_transform(L, {"b": 1, "c": 2})
    assert L.intersect(D, "b") == -1
    assert L.intersect(D, "c") == -2
    assert L.intersect(D, "f") == 0
    assert D.coefficient("a") == Fraction(6) + 2 * Fraction(14, 4)
    flags = cone_membership(L, D)
    assert flags.effective and flags.anti_nef


def test_exceptional_transform_rejects_bad_degrees(ex4p):
    L = build_lattice(ex4p)
    with pytest.raises(InputError):
        exceptional_transform(L, {"a": 0})
    with pytest.raises(InputError):
        exceptional_transform(L, {"a": -1})
    with pytest.raises(UnknownNameError):
        exceptional_transform(L, {"z": 1})


def test_cone_membership_flags(ex4p):
    L = build_lattice(ex4p)
    assert cone_membership(L, L.basis_vector("a")) == cone_membership(L, ExceptionalCycle({"a": 1}))
    flags = cone_membership(L, L.basis_vector("a"))
    assert flags.effective and not flags.anti_nef
    flags = cone_membership(L, L.dual_vector("a"))
    assert not flags.effective and not flags.anti_nef


def test_fundamental_cycle_ex4p(ex4p):
    L = build_lattice(ex4p)
    Z = fundamental_cycle(L)
    assert Z == ExceptionalCycle({"a": 2, "b": 2, "c": 1, "d": 1, "e": 1, "f": 1})
    assert Z == -L.dual_vector("f")
    assert generic_hyperplane_vertex(L) == "f"
    assert multiplicity(L) == 1


def test_fundamental_cycle_d4(d4):
    L = build_lattice(d4)
    assert fundamental_cycle(L) == ExceptionalCycle({"c": 2, "x": 1, "y": 1, "z": 1})
    assert generic_hyperplane_vertex(L) == "c"
    assert multiplicity(L) == 2


def test_fundamental_cycle_without_hyperplane_vertex(a1):
    L = build_lattice(a1)
    assert fundamental_cycle(L) == ExceptionalCycle({"a": 1})
    assert generic_hyperplane_vertex(L) is None

    star = build_lattice(parse_graph(STAR))
    assert star.det_s == 12
    assert fundamental_cycle(star) == ExceptionalCycle({"c": 1, "x": 1, "y": 1, "z": 1})
    assert generic_hyperplane_vertex(star) is None


@pytest.mark.parametrize("name", ["ex4p", "d4", "x3"])
def test_fundamental_cycle_is_box_minimum(name, request):
    L = build_lattice(request.getfixturevalue(name))
    assert fundamental_cycle(L) == _anti_nef_box_minimum(L)


def test_non_tree_lattice(x1, x3):
    assert build_lattice(x1).det_s == 56
    L = build_lattice(x3)
    assert L.det_s == 480
    assert mumford_intersection(L, "A", "B") == Fraction(12, 480)


def test_cycle_arithmetic():
    D = ExceptionalCycle({"a": 1, "b": Fraction(1, 2)})
    E = ExceptionalCycle({"b": Fraction(1, 2), "c": 0})
    assert D - E == ExceptionalCycle({"a": 1})
    assert (D + E).coefficient("b") == 1
    assert not D.is_integral()
    assert (D + E).is_integral()
    assert ExceptionalCycle({"a": 0}).is_zero()
    assert hash(ExceptionalCycle({"a": 1, "b": 0})) == hash(ExceptionalCycle({"a": 1}))
    assert D.to_json() == {"a": "1", "b": "1/2"}


def test_lattice_cycle_rejects_unknown_vertex(ex4p):
    L = build_lattice(ex4p)
    with pytest.raises(UnknownNameError):
        L.cycle({"z": 1})


def test_crosscheck_error_exit_code():
    assert CrossCheckError.exit_code == 4
