"""
Determinant Product Service
Edge determinants, Eisenbud-Neumann determinant products, Duchon's
continued-fraction determinant and the determinant affinity of a tree.

Only arborescent graphs are accepted here. Non-tree graphs go through the
lattice (adjugate) route instead.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import networkx as nx

from dualgraph import WeightedDualGraph, geodesic, require_tree, subtree_in_direction
from errors import CrossCheckError, InputError
from exactalg import IntMatrix, adjugate, determinant

logger = logging.getLogger(__name__)

# (u, w) -> det_{u,[uw]}: determinant of the subtree hanging off u through w
EdgeDeterminants = Dict[Tuple[str, str], int]


def edge_determinants(g: WeightedDualGraph) -> EdgeDeterminants:
    """Every directed edge determinant of the tree at once."""
    require_tree(g, "edge determinants")
    dets: EdgeDeterminants = {}
    for u, w, _ in g.edges:
        for a, b in ((u, w), (w, u)):
            sub = subtree_in_direction(g, a, (a, b))
            dets[(a, b)] = determinant(-sub.intersection_matrix())
    return dets


def edge_determinant(g: WeightedDualGraph, u: str, edge: Tuple[str, str]) -> int:
    """det_{u,e}: the determinant of the subtree of u in the direction e."""
    require_tree(g, "edge determinants")
    sub = subtree_in_direction(g, u, edge)
    return determinant(-sub.intersection_matrix())


def determinant_product(g: WeightedDualGraph, v: str, w: str,
                        dets: Optional[EdgeDeterminants] = None) -> int:
    """
    p(v,w): product, over the vertices x of the geodesic [vw], of the edge
    determinants at x in the directions of the edges not on [vw].
    An empty product is 1.
    """
    require_tree(g, "determinant products")
    if dets is None:
        dets = edge_determinants(g)
    path = geodesic(g, v, w)
    on_path = set(path)
    product = 1
    for x in path:
        for y in g.neighbors(x):
            if y not in on_path:
                product *= dets[(x, y)]
    return product


def duchon_det(g: WeightedDualGraph, root: str) -> Tuple[Fraction, int]:
    """
    Duchon's recursion rooted at root:

        cf(u)  = -E_u.E_u - sum_j 1/cf(child_j)
        det(u) = cf(u) * prod_j det(child_j)

    Returns (cf(root), det(root)); the latter equals det(-I).
    """
    require_tree(g, "Duchon's algorithm")
    g.require_vertex(root)
    G = g.simple_graph
    children: Dict[str, list] = {v: [] for v in g.vertex_names}
    for parent, child in nx.bfs_edges(G, root):
        children[parent].append(child)

    cf: Dict[str, Fraction] = {}
    det: Dict[str, Fraction] = {}
    for u in nx.dfs_postorder_nodes(G, root):
        value = Fraction(-g.weight(u)) - sum((1 / cf[c] for c in children[u]), Fraction(0))
        if value <= 0:
            raise InputError(
                f"continued fraction of the subtree at {u!r} is {value}; the graph is not negative definite"
            )
        cf[u] = value
        d = value
        for c in children[u]:
            d *= det[c]
        det[u] = d

    if det[root].denominator != 1:
        raise CrossCheckError(f"Duchon determinant {det[root]} is not an integer")
    return cf[root], det[root].numerator


@dataclass(frozen=True, eq=False)
class DetProductTable:
    """Symmetric table of determinant products p(u,v) together with det(S)."""

    p: IntMatrix
    det_s: int

    @property
    def index(self) -> Tuple[str, ...]:
        return self.p.index

    def __call__(self, u: str, v: str) -> int:
        return self.p.entry(u, v)

    def to_json(self) -> dict:
        return {"detS": self.det_s, "p": [[int(x) for x in row] for row in self.p.entries.tolist()]}


def build_table(g: WeightedDualGraph, crosscheck: bool = True) -> DetProductTable:
    """
    Full p-table through edge determinants. With crosscheck on, the table is
    compared entrywise with adj(-I) and det(S) with Duchon's recursion.
    """
    require_tree(g, "determinant products")
    names = g.vertex_names
    dets = edge_determinants(g)
    rows = [[determinant_product(g, v, w, dets) for w in names] for v in names]
    table = IntMatrix(names, rows)
    minus_I = -g.intersection_matrix()
    det_s = determinant(minus_I)

    if crosscheck:
        adj = adjugate(minus_I)
        for v in names:
            for w in names:
                if table.entry(v, w) != adj.entry(v, w):
                    raise CrossCheckError(
                        f"p({v},{w}) = {table.entry(v, w)} but adj(-I) gives {adj.entry(v, w)}"
                    )
        _, duchon = duchon_det(g, names[0])
        if duchon != det_s:
            raise CrossCheckError(f"Duchon determinant {duchon} differs from det(-I) = {det_s}")
        logger.debug("determinant product table cross-checked on %d vertices", len(names))

    return DetProductTable(table, det_s)


@dataclass(frozen=True)
class Affinity:
    """q(u,v) = p(u,v)^2 / (p(u,u) p(v,v)), the exact form of exp(-2 d(u,v))."""

    q: Fraction

    @property
    def distance(self) -> float:
        """Determinant distance -log(q)/2. Display only."""
        return -0.5 * math.log(self.q)


def affinity(T: DetProductTable, u: str, v: str) -> Affinity:
    return Affinity(Fraction(T(u, v) ** 2, T(u, u) * T(v, v)))


@dataclass(frozen=True)
class RefinedFourPoint:
    lhs: int            # p(l,v) p(u,w)
    rhs: int            # p(l,u) p(v,w)
    meets: bool         # [lv] and [uw] intersect
    also_meets: bool    # [lu] and [vw] intersect

    @property
    def holds(self) -> bool:
        return (self.lhs <= self.rhs) == self.meets and (self.lhs == self.rhs) == (self.meets and self.also_meets)


def refined_four_point(g: WeightedDualGraph, T: DetProductTable,
                       l: str, v: str, u: str, w: str) -> RefinedFourPoint:
    """
    Evaluate p(l,v) p(u,w) <= p(l,u) p(v,w) together with the geodesic
    conditions it is equivalent to: the inequality holds iff [lv] meets
    [uw], with equality iff moreover [lu] meets [vw].
    """
    meets = bool(set(geodesic(g, l, v)) & set(geodesic(g, u, w)))
    also_meets = bool(set(geodesic(g, l, u)) & set(geodesic(g, v, w)))
    return RefinedFourPoint(T(l, v) * T(u, w), T(l, u) * T(v, w), meets, also_meets)
