"""
Branch Ultrametric Service
U_L(A,B) = (L.A)(L.B)/(A.B) and its multiplicity analogue U_O, with
exact (ultra)metric verification and the upper bound -E_l*.E_l*.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence, Tuple

from detprod import DetProductTable, affinity, build_table
from dualgraph import WeightedDualGraph, fresh_name, geodesic, infimum, is_arborescent, require_tree, with_branch
from errors import CrossCheckError, InputError, ReducibleHyperplaneError
from exactalg import RatMatrix
from lattice import IntersectionLattice, build_lattice, fundamental_cycle, generic_hyperplane_vertex, mumford_intersection

logger = logging.getLogger(__name__)

ULTRAMETRIC = "ultrametric"
METRIC_ONLY = "metric-only"
NOT_METRIC = "not-metric"


@dataclass(frozen=True, eq=False)
class UltrametricSpace:
    """Finite label set with an exact symmetric distance and zero diagonal."""

    dist: RatMatrix

    def __post_init__(self):
        labels = self.dist.index
        if not self.dist.is_symmetric():
            raise InputError("distance matrix is not symmetric")
        for a in labels:
            if self.dist.entry(a, a) != 0:
                raise InputError(f"distance of {a!r} to itself is {self.dist.entry(a, a)}")
        for a, b in combinations(labels, 2):
            if self.dist.entry(a, b) <= 0:
                raise InputError(f"distance between distinct labels {a!r}, {b!r} is not positive")

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.dist.index

    def __call__(self, a: str, b: str) -> Fraction:
        return self.dist.entry(a, b)

    def scaled(self, k) -> "UltrametricSpace":
        return UltrametricSpace(RatMatrix(self.labels, (self.dist.entries * Fraction(k)).tolist()))

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.to_json()}


def space_from_function(labels: Sequence[str], fn) -> UltrametricSpace:
    labels = tuple(labels)
    rows = [[Fraction(0) if a == b else fn(a, b) for b in labels] for a in labels]
    return UltrametricSpace(RatMatrix(labels, rows))


# ============= U_L =============

def _branch_set(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]]) -> Tuple[str, ...]:
    g.attachment(L)
    if F is None:
        F = [b for b in g.branch_names if b != L]
    F = tuple(F)
    for A in F:
        g.attachment(A)
    if L in F:
        raise InputError(f"base branch {L!r} cannot be one of the measured branches")
    if len(set(F)) != len(F):
        raise InputError("duplicate branch in the measured set")
    return F


def ultrametric_UL(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]] = None,
                   table: Optional[DetProductTable] = None,
                   lattice: Optional[IntersectionLattice] = None,
                   crosscheck: bool = True) -> UltrametricSpace:
    """
    U_L over the branches F (default: every branch except L). Trees use the
    determinant products, p(l,a) p(l,b) / (p(a,b) det S); other graphs use
    Mumford numbers from the dual matrix.
    """
    F = _branch_set(g, L, F)
    l = g.attachment(L)

    if is_arborescent(g):
        T = table or build_table(g, crosscheck=crosscheck)

        def value(A, B):
            a, b = g.attachment(A), g.attachment(B)
            return Fraction(T(l, a) * T(l, b), T(a, b) * T.det_s)
    else:
        lat = lattice or build_lattice(g)

        def value(A, B):
            return mumford_intersection(lat, L, A) * mumford_intersection(lat, L, B) / mumford_intersection(lat, A, B)

    U = space_from_function(F, value)
    logger.debug("U_%s computed on %d branches", L, len(F))
    return U


def formula_crosscheck(g: WeightedDualGraph, L: str, A: str, B: str,
                       table: Optional[DetProductTable] = None) -> Tuple[Fraction, Fraction, Fraction]:
    """
    The three tree formulas for U_L(A,B), with c = a ^_l b:

        p(l,a) p(l,b) / (p(a,b) det S)
        p(l,c)^2 / (p(c,c) det S)
        p(l,l) q(l,c) / det S
    """
    require_tree(g, "formula cross-check")
    T = table or build_table(g)
    l, a, b = g.attachment(L), g.attachment(A), g.attachment(B)
    c = infimum(g, l, a, b)

    first = Fraction(T(l, a) * T(l, b), T(a, b) * T.det_s)
    second = Fraction(T(l, c) ** 2, T(c, c) * T.det_s)
    third = Fraction(T(l, l), T.det_s) * affinity(T, l, c).q
    if not first == second == third:
        raise CrossCheckError(f"U_{L}({A},{B}) formulas disagree: {first}, {second}, {third}")
    return first, second, third


# ============= Verification =============

@dataclass(frozen=True)
class Witness:
    triple: Tuple[str, str, str]
    reason: str


@dataclass(frozen=True)
class Classification:
    verdict: str
    witness: Optional[Witness] = None


def _triples(U: UltrametricSpace):
    return combinations(sorted(U.labels), 3)


def verify_ultrametric(U: UltrametricSpace) -> Optional[Witness]:
    """None if U(x,y) <= max(U(x,z), U(y,z)) on every triple, else the first failing triple."""
    for triple in _triples(U):
        a, b, c = triple
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            if U(x, y) > max(U(x, z), U(y, z)):
                return Witness(triple, f"U({x},{y}) = {U(x, y)} > max(U({x},{z}), U({y},{z})) = {max(U(x, z), U(y, z))}")
    return None


def verify_metric(U: UltrametricSpace) -> Optional[Witness]:
    """None if the triangle inequality holds on every triple."""
    for triple in _triples(U):
        a, b, c = triple
        for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
            if U(x, y) > U(x, z) + U(z, y):
                return Witness(triple, f"U({x},{y}) = {U(x, y)} > U({x},{z}) + U({z},{y}) = {U(x, z) + U(z, y)}")
    return None


def classify(U: UltrametricSpace) -> Classification:
    broken = verify_ultrametric(U)
    if broken is None:
        return Classification(ULTRAMETRIC)
    not_metric = verify_metric(U)
    if not_metric is None:
        return Classification(METRIC_ONLY, broken)
    return Classification(NOT_METRIC, not_metric)


# ============= Upper bound =============

@dataclass(frozen=True)
class BoundCheck:
    value: Fraction
    bound: Fraction
    tight: bool


def ul_upper_bound(g: WeightedDualGraph, L: str, table: Optional[DetProductTable] = None) -> Fraction:
    """p(l,l)/det S = -E_l*.E_l*"""
    require_tree(g, "the U_L upper bound")
    T = table or build_table(g)
    l = g.attachment(L)
    return Fraction(T(l, l), T.det_s)


def check_bound(g: WeightedDualGraph, L: str, A: str, B: str,
                table: Optional[DetProductTable] = None) -> BoundCheck:
    """U_L(A,B) against the bound; tight means l lies on [u(A) u(B)]."""
    require_tree(g, "the U_L upper bound")
    T = table or build_table(g)
    l, a, b = g.attachment(L), g.attachment(A), g.attachment(B)
    value = Fraction(T(l, a) * T(l, b), T(a, b) * T.det_s)
    return BoundCheck(value, Fraction(T(l, l), T.det_s), l in geodesic(g, a, b))


# ============= U_O =============

def ultrametric_UO(g: WeightedDualGraph, F: Optional[Iterable[str]] = None,
                   lattice: Optional[IntersectionLattice] = None) -> UltrametricSpace:
    """
    U_O(A,B) = m_O(A) m_O(B) / (A.B) with m_O(A) = -Z_f.D_A, available when
    Z_f = -E_u* for some vertex u. The result is checked against U_L for a
    virtual branch attached at u.
    """
    lat = lattice or build_lattice(g)
    u = generic_hyperplane_vertex(lat)
    if u is None:
        raise ReducibleHyperplaneError(
            "generic hyperplane section is reducible: the fundamental cycle Z_f "
            "differs from -E_u* for every vertex u"
        )

    F = tuple(g.branch_names if F is None else F)
    for A in F:
        g.attachment(A)
    if len(set(F)) != len(F):
        raise InputError("duplicate branch in the measured set")

    Z = fundamental_cycle(lat)

    def m_O(A):
        D_A = -lat.dual_vector(g.attachment(A))
        return -lat.pairing(Z, D_A)

    U = space_from_function(F, lambda A, B: m_O(A) * m_O(B) / mumford_intersection(lat, A, B))

    virtual = fresh_name(g, "H")
    g_virtual = with_branch(g, virtual, u)
    reference = ultrametric_UL(g_virtual, virtual, F, lattice=IntersectionLattice(
        g_virtual, lat.intersection, lat.dual, lat.det_s))
    if reference.dist != U.dist:
        raise CrossCheckError("U_O differs from U_L of the virtual hyperplane branch")

    logger.debug("U_O computed at hyperplane vertex %s on %d branches", u, len(F))
    return U


@dataclass(frozen=True)
class TeissierCheck:
    vertex: str
    multiplicity: Fraction
    largest: Optional[Fraction]
    holds: bool


def check_teissier(g: WeightedDualGraph, F: Optional[Iterable[str]] = None,
                   lattice: Optional[IntersectionLattice] = None,
                   space: Optional[UltrametricSpace] = None) -> TeissierCheck:
    """
    U_O(A,B) <= m_O(S) = -E_u*.E_u* for all pairs in F. An already computed
    U_O can be passed as space, in which case F is ignored.
    """
    lat = lattice or build_lattice(g)
    U = space if space is not None else ultrametric_UO(g, F, lat)
    u = generic_hyperplane_vertex(lat)
    m = -lat.dual.entry(u, u)
    values = [U(a, b) for a, b in combinations(U.labels, 2)]
    largest = max(values) if values else None
    return TeissierCheck(u, m, largest, largest is None or largest <= m)
