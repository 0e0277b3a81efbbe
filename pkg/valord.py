"""
Valuation Order Service
Divisorial valuations ord_v^L and intersection semivaluations int_A^L,
both normalized so the base branch L has value 1, and the valuative
partial order they carry on an arborescent configuration.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Iterable, Optional, Tuple, Union

from detprod import DetProductTable, build_table
from dualgraph import WeightedDualGraph, require_tree
from errors import CrossCheckError, InputError, UnsupportedComparisonError
from lattice import ExceptionalCycle, IntersectionLattice, cone_membership
from treekit import RootedTree, full_dual_tree

logger = logging.getLogger(__name__)

EQUAL = "="
BELOW = "<="
ABOVE = ">="
INCOMPARABLE = "||"
UNSUPPORTED = "unsupported"

DIVISORIAL = "divisorial"
INTERSECTION = "intersection"


@total_ordering
class _Infinity:
    """+infinity as taken by int_A^L on functions vanishing along A."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __hash__(self):
        return hash("+inf")

    def __repr__(self):
        return "inf"

    __str__ = __repr__


INFINITY = _Infinity()

Value = Union[Fraction, _Infinity]


@dataclass(frozen=True, eq=False)
class NormalizedValuation:
    kind: str             # DIVISORIAL or INTERSECTION
    target: str           # vertex v, or branch A
    base: str             # branch L
    lattice: IntersectionLattice

    def __post_init__(self):
        if self.kind not in (DIVISORIAL, INTERSECTION):
            raise InputError(f"unknown valuation kind {self.kind!r}")
        if self.normalizer <= 0:
            raise CrossCheckError(f"normalizer of {self} is not positive")

    @property
    def center(self) -> str:
        g = self.lattice.graph
        return self.target if self.kind == DIVISORIAL else g.attachment(self.target)

    @property
    def normalizer(self) -> Fraction:
        """-E_c*.E_l*, which is A.L for the intersection kind."""
        l = self.lattice.graph.attachment(self.base)
        return -self.lattice.dual.entry(self.center, l)

    def __call__(self, D: ExceptionalCycle, target_not_component: bool = True) -> Value:
        _require_transform(self.lattice, D)
        if self.kind == INTERSECTION and not target_not_component:
            return INFINITY
        # E_c*.D is the coefficient of E_c in D
        return D.coefficient(self.center) / self.normalizer

    def __str__(self):
        name = "ord" if self.kind == DIVISORIAL else "int"
        return f"{name}_{self.target}^{self.base}"


def _require_transform(L: IntersectionLattice, D: ExceptionalCycle) -> None:
    flags = cone_membership(L, D)
    if D.is_zero() or not (flags.effective and flags.anti_nef):
        raise InputError("cycle is not the exceptional transform of an effective divisor")


def eval_ord(L: IntersectionLattice, base: str, v: str, D: ExceptionalCycle) -> Fraction:
    """ord_v^L evaluated on the function whose exceptional transform is D."""
    L.intersection.position(v)
    return NormalizedValuation(DIVISORIAL, v, base, L)(D)


def eval_int(L: IntersectionLattice, base: str, A: str, D: ExceptionalCycle,
             A_not_component: bool = True) -> Value:
    """int_A^L; infinity when A is a component of the zero locus."""
    return NormalizedValuation(INTERSECTION, A, base, L)(D, A_not_component)


# ============= Orders =============

def tree_order(g: WeightedDualGraph, L: str, x: str, y: str,
               tree: Optional[RootedTree] = None) -> str:
    """Relative position of x and y in the dual tree of the total transform rooted at L."""
    T = tree or full_dual_tree(g, L)
    if x == y:
        T.require_node(x)
        return EQUAL
    if T.precedes(x, y):
        return BELOW
    if T.precedes(y, x):
        return ABOVE
    return INCOMPARABLE


def val_order_divisorial(g: WeightedDualGraph, L: str, u: str, v: str,
                         table: Optional[DetProductTable] = None) -> bool:
    """ord_u^L <= ord_v^L, decided by p(l,v) p(u,w) <= p(l,u) p(v,w) for all w."""
    require_tree(g, "the valuative order")
    T = table or build_table(g)
    l = g.attachment(L)
    g.require_vertex(u)
    g.require_vertex(v)
    return all(T(l, v) * T(u, w) <= T(l, u) * T(v, w) for w in g.vertex_names)


def val_order_intersection(g: WeightedDualGraph, L: str, u: str, A: str,
                           table: Optional[DetProductTable] = None) -> bool:
    """ord_u^L <= int_A^L, decided by p(l,a) p(u,w) <= p(l,u) p(a,w) for all w."""
    require_tree(g, "the valuative order")
    if A == L:
        raise InputError(f"the base branch {L!r} cannot be compared with itself")
    T = table or build_table(g)
    l, a = g.attachment(L), g.attachment(A)
    g.require_vertex(u)
    return all(T(l, a) * T(u, w) <= T(l, u) * T(a, w) for w in g.vertex_names)


def compare_valuations(g: WeightedDualGraph, L: str, x: str, y: str,
                       table: Optional[DetProductTable] = None) -> str:
    """
    Valuative order of two elements of V u F, where vertices stand for
    ord_v^L and branches for int_A^L. Two distinct branches cannot be compared.
    """
    T = table or build_table(g)
    x_vertex, y_vertex = g.has_vertex(x), g.has_vertex(y)
    if not x_vertex:
        g.attachment(x)
    if not y_vertex:
        g.attachment(y)
    if x == y:
        return EQUAL

    if x_vertex and y_vertex:
        below = val_order_divisorial(g, L, x, y, T)
        above = val_order_divisorial(g, L, y, x, T)
        if below and above:
            raise CrossCheckError(f"ord_{x} and ord_{y} compare equal")
        return BELOW if below else ABOVE if above else INCOMPARABLE
    if x_vertex:
        return BELOW if val_order_intersection(g, L, x, y, T) else INCOMPARABLE
    if y_vertex:
        return ABOVE if val_order_intersection(g, L, y, x, T) else INCOMPARABLE
    raise UnsupportedComparisonError(f"int_{x} and int_{y} are not compared by the valuative criterion")


@dataclass(frozen=True)
class OrderMatrix:
    elements: Tuple[str, ...]
    relation: Dict[Tuple[str, str], str]

    def __call__(self, x: str, y: str) -> str:
        return self.relation[(x, y)]

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "order": [[self.relation[(x, y)] for y in self.elements] for x in self.elements],
        }


def _measured(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]]) -> Tuple[str, ...]:
    g.attachment(L)
    F = tuple(b for b in g.branch_names if b != L) if F is None else tuple(F)
    if L in F:
        raise InputError(f"base branch {L!r} cannot be one of the measured branches")
    for A in F:
        g.attachment(A)
    return F


def order_matrix(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]] = None,
                 table: Optional[DetProductTable] = None) -> OrderMatrix:
    require_tree(g, "the valuative order")
    T = table or build_table(g)
    elements = g.vertex_names + _measured(g, L, F)
    relation = {}
    for x in elements:
        for y in elements:
            try:
                relation[(x, y)] = compare_valuations(g, L, x, y, T)
            except UnsupportedComparisonError:
                relation[(x, y)] = UNSUPPORTED
    return OrderMatrix(elements, relation)


def valuation_tree(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]] = None,
                   table: Optional[DetProductTable] = None) -> RootedTree:
    """
    Extended rooted tree of the valuative poset on V u F: each element hangs
    below its largest strict predecessor, minimal elements below a new root
    named after L.
    """
    M = order_matrix(g, L, F, table)
    predecessors = {
        x: [y for y in M.elements if y != x and M(y, x) == BELOW]
        for x in M.elements
    }

    parent = {}
    for x, preds in predecessors.items():
        ranked = sorted(preds, key=lambda y: len(predecessors[y]))
        for lower, upper in zip(ranked, ranked[1:]):
            if M(lower, upper) != BELOW:
                raise CrossCheckError(f"predecessors of {x!r} do not form a chain")
        parent[x] = ranked[-1] if ranked else L

    F = [x for x in M.elements if not g.has_vertex(x)]
    logger.debug("valuation tree on %d elements rooted at %s", len(M.elements), L)
    return RootedTree(L, parent, {A: A for A in F})
