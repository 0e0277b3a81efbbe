"""
Intersection Lattice Service
Lipman dual basis, exceptional transforms, Mumford intersection numbers,
cone membership and the fundamental cycle of a resolution.

Everything is computed from the intersection matrix (E_u . E_v) and its
exact inverse (E_u* . E_v*).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple

from dualgraph import WeightedDualGraph
from errors import CrossCheckError, InputError, NotNegativeDefiniteError, UnknownNameError
from exactalg import IntMatrix, RatMatrix, determinant, first_failing_minor, inverse

logger = logging.getLogger(__name__)


class ExceptionalCycle:
    """
    A rational cycle sum_v c_v E_v supported on the exceptional divisor.
    Missing vertices have coefficient zero.
    """

    __slots__ = ("_coefficients",)

    def __init__(self, coefficients: Mapping[str, object]):
        self._coefficients: Dict[str, Fraction] = {v: Fraction(c) for v, c in coefficients.items()}

    def coefficient(self, v: str) -> Fraction:
        return self._coefficients.get(v, Fraction(0))

    @property
    def support(self) -> Tuple[str, ...]:
        return tuple(v for v, c in self._coefficients.items() if c)

    def items(self):
        return self._coefficients.items()

    def is_zero(self) -> bool:
        return not self.support

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self._coefficients.values())

    def scaled(self, k) -> "ExceptionalCycle":
        return ExceptionalCycle({v: c * k for v, c in self._coefficients.items()})

    def __add__(self, other: "ExceptionalCycle") -> "ExceptionalCycle":
        keys = list(self._coefficients) + [v for v in other._coefficients if v not in self._coefficients]
        return ExceptionalCycle({v: self.coefficient(v) + other.coefficient(v) for v in keys})

    def __neg__(self) -> "ExceptionalCycle":
        return self.scaled(-1)

    def __sub__(self, other: "ExceptionalCycle") -> "ExceptionalCycle":
        return self + (-other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExceptionalCycle):
            return NotImplemented
        keys = set(self._coefficients) | set(other._coefficients)
        return all(self.coefficient(v) == other.coefficient(v) for v in keys)

    def __hash__(self):
        return hash(frozenset((v, c) for v, c in self._coefficients.items() if c))

    def to_json(self) -> Dict[str, str]:
        return {v: str(c) for v, c in self._coefficients.items()}

    def __repr__(self):
        return "ExceptionalCycle({" + ", ".join(f"{v!r}: {c}" for v, c in self._coefficients.items()) + "})"


@dataclass(frozen=True, eq=False)
class IntersectionLattice:
    graph: WeightedDualGraph
    intersection: IntMatrix
    dual: RatMatrix
    det_s: int

    @property
    def vertex_names(self) -> Tuple[str, ...]:
        return self.intersection.index

    def basis_vector(self, u: str) -> ExceptionalCycle:
        self.intersection.position(u)
        return ExceptionalCycle({u: 1})

    def dual_vector(self, u: str) -> ExceptionalCycle:
        """E_u* written in the basis (E_v): its coefficients are E_u* . E_v*."""
        return ExceptionalCycle(self.dual.row(u))

    def intersect(self, D: ExceptionalCycle, u: str) -> Fraction:
        """D . E_u"""
        row = self.intersection.row(u)
        return sum((c * row[v] for v, c in D.items()), Fraction(0))

    def pairing(self, D1: ExceptionalCycle, D2: ExceptionalCycle) -> Fraction:
        return sum((c * self.intersect(D2, v) for v, c in D1.items()), Fraction(0))

    def cycle(self, coefficients: Mapping[str, object]) -> ExceptionalCycle:
        for v in coefficients:
            if not self.graph.has_vertex(v):
                raise UnknownNameError(f"cycle uses unknown vertex {v!r}")
        return ExceptionalCycle(coefficients)


@dataclass(frozen=True)
class ConeFlags:
    effective: bool
    anti_nef: bool


def build_lattice(g: WeightedDualGraph) -> IntersectionLattice:
    """Intersection matrix, its exact inverse and det(S) for a negative definite graph."""
    I = g.intersection_matrix()
    failing = first_failing_minor(I)
    if failing is not None:
        raise NotNegativeDefiniteError(*failing)

    det_s = determinant(-I)
    dual = inverse(I)

    bad = [(u, v) for u in dual.index for v in dual.index if dual.entry(u, v) >= 0]
    if bad:
        raise CrossCheckError(f"dual matrix has nonnegative entry at {bad[0]}")

    logger.debug("lattice built: %d vertices, det(S)=%d", len(I.index), det_s)
    return IntersectionLattice(g, I, dual, det_s)


def dual_pairing(L: IntersectionLattice, u: str, v: str) -> Fraction:
    """E_u* . E_v* (always negative)."""
    return L.dual.entry(u, v)


def mumford_intersection(L: IntersectionLattice, A: str, B: str) -> Fraction:
    """A . B = -E_{u(A)}* . E_{u(B)}* for two distinct branches."""
    if A == B:
        raise InputError(f"intersection number of branch {A!r} with itself is undefined")
    g = L.graph
    return -dual_pairing(L, g.attachment(A), g.attachment(B))


def exceptional_transform(L: IntersectionLattice, strict_transform_degrees: Mapping[str, int]) -> ExceptionalCycle:
    """
    D = -sum_u deg(u) E_u*, where deg(u) is the intersection number of the
    strict transform with E_u. D is effective and D . E_u = -deg(u).
    """
    degrees = {}
    for v, k in strict_transform_degrees.items():
        L.intersection.position(v)
        if not isinstance(k, int) or k < 0:
            raise InputError(f"degree at {v!r} must be a nonnegative integer, got {k!r}")
        if k:
            degrees[v] = k
    if not degrees:
        raise InputError("all strict-transform degrees are zero")

    total = {w: Fraction(0) for w in L.vertex_names}
    for v, k in degrees.items():
        for w, c in L.dual.row(v).items():
            total[w] -= k * c
    return ExceptionalCycle(total)


def cone_membership(L: IntersectionLattice, D: ExceptionalCycle) -> ConeFlags:
    effective = all(c >= 0 for _, c in D.items())
    anti_nef = all(L.intersect(D, u) <= 0 for u in L.vertex_names)
    return ConeFlags(effective, anti_nef)


def fundamental_cycle(L: IntersectionLattice) -> ExceptionalCycle:
    """
    Artin's fundamental cycle by Laufer's iteration: start from sum E_u and
    add E_u for the smallest-named u with Z . E_u > 0 until none is left.
    """
    names = L.vertex_names
    I = L.intersection
    coefficients = {v: 1 for v in names}
    products = {u: sum(I.entry(v, u) for v in names) for u in names}

    steps = 0
    while True:
        violating = [u for u in names if products[u] > 0]
        if not violating:
            break
        u = min(violating)
        coefficients[u] += 1
        for w in names:
            products[w] += I.entry(u, w)
        steps += 1

    logger.debug("fundamental cycle after %d Laufer steps", steps)
    return ExceptionalCycle(coefficients)


def generic_hyperplane_vertex(L: IntersectionLattice) -> Optional[str]:
    """The vertex u with Z_f = -E_u*, if there is one."""
    Z = fundamental_cycle(L)
    for u in L.vertex_names:
        candidate = -L.dual_vector(u)
        if candidate.is_integral() and candidate == Z:
            return u
    return None


def multiplicity(L: IntersectionLattice) -> int:
    """-Z_f . Z_f, the multiplicity of the singularity when it is rational."""
    Z = fundamental_cycle(L)
    return int(-L.pairing(Z, Z))
