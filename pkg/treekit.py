"""
Rooted Tree Service
Hierarchies of closed balls, interior- and end-rooted trees of an
ultrametric, depth dating, the four-point condition, and the comparison of
the U_L tree with the embedded dual tree of the branches.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from detprod import DetProductTable, build_table
from dualgraph import WeightedDualGraph, require_tree, total_transform_tree
from errors import InputError, NotUltrametricError, UnknownNameError
from exactalg import ExactMatrix
from ultra import space_from_function, ultrametric_UL, verify_ultrametric

logger = logging.getLogger(__name__)

END_ROOT = "^"

Cluster = FrozenSet[str]


@dataclass(frozen=True, eq=False)
class RootedTree:
    """
    Rooted tree given by parent links. Leaves may carry labels and any node
    may carry an exact decoration (a depth or height value).
    """

    root: str
    parent: Mapping[str, str]
    labels: Mapping[str, str] = field(default_factory=dict)
    decoration: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.root in self.parent:
            raise InputError(f"root {self.root!r} has a parent")
        nodes = self.nodes
        for v in nodes:
            seen = set()
            while v != self.root:
                if v in seen or v not in self.parent:
                    raise InputError(f"node {v!r} does not reach the root")
                seen.add(v)
                v = self.parent[v]
        for v in self.labels:
            if v not in nodes:
                raise UnknownNameError(f"label on unknown node {v!r}")
            if self.children(v):
                raise InputError(f"labelled node {v!r} is not a leaf")
        if len(set(self.labels.values())) != len(self.labels):
            raise InputError("leaf labels are not distinct")

    @cached_property
    def nodes(self) -> Tuple[str, ...]:
        found = {self.root} | set(self.parent) | set(self.parent.values())
        return tuple(sorted(found))

    @cached_property
    def _children(self) -> Dict[str, List[str]]:
        children: Dict[str, List[str]] = {v: [] for v in self.nodes}
        for child, parent in self.parent.items():
            children[parent].append(child)
        for v in children:
            children[v].sort()
        return children

    @cached_property
    def digraph(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(self.nodes)
        G.add_edges_from((p, c) for c, p in self.parent.items())
        return G

    def require_node(self, v: str) -> None:
        if v not in self._children:
            raise UnknownNameError(f"unknown tree node {v!r}")

    def children(self, v: str) -> List[str]:
        self.require_node(v)
        return list(self._children[v])

    def is_leaf(self, v: str) -> bool:
        return not self.children(v)

    @property
    def leaves(self) -> Tuple[str, ...]:
        return tuple(v for v in self.nodes if not self._children[v] and v != self.root)

    def path_from_root(self, v: str) -> List[str]:
        self.require_node(v)
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def precedes(self, u: str, v: str) -> bool:
        """u <=_root v, i.e. u lies on the path from the root to v."""
        return u in self.path_from_root(v)

    def meet(self, a: str, b: str) -> str:
        meet = self.root
        for x, y in zip(self.path_from_root(a), self.path_from_root(b)):
            if x != y:
                break
            meet = x
        return meet

    def node_of_label(self, label: str) -> str:
        for node, lab in self.labels.items():
            if lab == label:
                return node
        raise UnknownNameError(f"no leaf labelled {label!r}")

    def restricted_to(self, labels: Iterable[str]) -> "RootedTree":
        """Union of the paths from the root to the leaves carrying the given labels."""
        keep = set()
        for label in labels:
            keep.update(self.path_from_root(self.node_of_label(label)))
        return RootedTree(
            self.root,
            {c: p for c, p in self.parent.items() if c in keep},
            {v: lab for v, lab in self.labels.items() if v in keep},
            {v: d for v, d in self.decoration.items() if v in keep},
        )

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "nodes": list(self.nodes),
            "parent": {c: self.parent[c] for c in sorted(self.parent)},
            "label": {v: self.labels[v] for v in sorted(self.labels)},
            "decoration": {v: str(self.decoration[v]) for v in sorted(self.decoration)},
        }


@dataclass(frozen=True)
class Hierarchy:
    """Laminar family of clusters on X containing X and every singleton."""

    labels: Tuple[str, ...]
    clusters: Tuple[Cluster, ...]
    diameters: Mapping[Cluster, Fraction] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = frozenset(self.labels)
        clusters = set(self.clusters)
        if X not in clusters:
            raise InputError("hierarchy does not contain the full label set")
        for a in self.labels:
            if frozenset((a,)) not in clusters:
                raise InputError(f"hierarchy is missing the singleton {{{a}}}")
        for C in clusters:
            if not C or not C <= X:
                raise InputError(f"cluster {sorted(C)} is empty or not a subset of the labels")
        for C, D in combinations(clusters, 2):
            if C & D and not (C <= D or D <= C):
                raise InputError(f"clusters {sorted(C)} and {sorted(D)} overlap without nesting")


def cluster_id(C: Cluster) -> str:
    if len(C) == 1:
        (only,) = C
        return only
    return "{" + ",".join(sorted(C)) + "}"


# ============= Ultrametric <-> hierarchy <-> dated tree =============

def closed_balls(U) -> Hierarchy:
    """The hierarchy of closed balls B(a,r) of an ultrametric, with their diameters."""
    witness = verify_ultrametric(U)
    if witness is not None:
        raise NotUltrametricError(f"not an ultrametric on {witness.triple}: {witness.reason}")

    labels = U.labels
    balls = set()
    for a in labels:
        for r in {U(a, b) for b in labels}:
            balls.add(frozenset(b for b in labels if U(a, b) <= r))

    diameters = {
        C: max((U(a, b) for a, b in combinations(sorted(C), 2)), default=Fraction(0))
        for C in balls
    }
    ordered = tuple(sorted(balls, key=lambda C: (len(C), sorted(C))))
    logger.debug("%d closed balls on %d labels", len(ordered), len(labels))
    return Hierarchy(labels, ordered, diameters)


def hierarchy_to_trees(H: Hierarchy, diameters: Optional[Mapping[Cluster, Fraction]] = None
                       ) -> Tuple[RootedTree, RootedTree]:
    """
    The interior-rooted tree (Hasse diagram of the clusters under reverse
    inclusion) and its end-rooted extension with a new root above X.
    Non-singleton clusters are decorated with their diameter.
    """
    diameters = H.diameters if diameters is None else diameters
    X = frozenset(H.labels)
    clusters = sorted(set(H.clusters), key=len)

    parent = {}
    for i, C in enumerate(clusters):
        if C == X:
            continue
        smallest = next(D for D in clusters[i + 1:] if C < D)
        parent[cluster_id(C)] = cluster_id(smallest)

    labels = {a: a for a in H.labels}
    decoration = {cluster_id(C): Fraction(diameters[C]) for C in clusters if len(C) > 1 and C in diameters}

    interior = RootedTree(cluster_id(X), parent, labels, decoration)
    end_parent = dict(parent)
    end_parent[cluster_id(X)] = END_ROOT
    end = RootedTree(END_ROOT, end_parent, labels, decoration)
    return interior, end


def ultrametric_from_depth(T: RootedTree):
    """U(a,b) = depth of the meet of the leaves labelled a and b."""
    for child, parent in T.parent.items():
        if child in T.decoration and parent in T.decoration:
            if not T.decoration[child] < T.decoration[parent]:
                raise InputError(
                    f"depth is not strictly decreasing from {parent!r} ({T.decoration[parent]}) "
                    f"to {child!r} ({T.decoration[child]})"
                )

    def depth(a, b):
        m = T.meet(T.node_of_label(a), T.node_of_label(b))
        if m not in T.decoration:
            raise InputError(f"meet {m!r} of {a} and {b} carries no depth")
        return T.decoration[m]

    return space_from_function(sorted(T.labels.values()), depth)


def cluster_map(T: RootedTree, v: str) -> FrozenSet[str]:
    """Labels of the leaves weakly above v."""
    T.require_node(v)
    return frozenset(T.labels[x] for x in nx.descendants(T.digraph, v) | {v} if x in T.labels)


# ============= Four-point condition =============

@dataclass(frozen=True)
class FourPointWitness:
    quadruple: Tuple[str, str, str, str]
    sums: Tuple[Fraction, Fraction, Fraction]


def four_point_check(d: ExactMatrix, multiplicative: bool = False) -> Optional[FourPointWitness]:
    """
    Additive mode: among d(l,u)+d(v,w), d(l,v)+d(u,w), d(l,w)+d(u,v) the two
    largest are equal. Multiplicative mode (affinities or determinant
    products): among the three products the two smallest are equal.
    """
    names = sorted(d.index)
    for l, u, v, w in combinations(names, 4):
        pairings = ((l, u, v, w), (l, v, u, w), (l, w, u, v))
        if multiplicative:
            values = sorted(Fraction(d[a, b]) * Fraction(d[c, e]) for a, b, c, e in pairings)
            ok = values[0] == values[1]
        else:
            values = sorted(Fraction(d[a, b]) + Fraction(d[c, e]) for a, b, c, e in pairings)
            ok = values[1] == values[2]
        if not ok:
            return FourPointWitness((l, u, v, w), tuple(values))
    return None


# ============= Dual trees of branch configurations =============

def full_dual_tree(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]] = None) -> RootedTree:
    """
    The dual tree of the total transform rooted at the leaf of L, keeping
    every vertex and the branches of F (default: all other branches).
    """
    require_tree(g, "the dual tree of the total transform")
    g.attachment(L)
    F = [b for b in g.branch_names if b != L] if F is None else list(F)
    keep = set(g.vertex_names) | set(F) | {L}
    G = total_transform_tree(g).subgraph(keep)
    parent = {child: par for par, child in nx.bfs_edges(G, L)}
    return RootedTree(L, parent, {A: A for A in F})


def embedded_dual_tree(g: WeightedDualGraph, L: str, F: Iterable[str]) -> RootedTree:
    """Union of the geodesics from the leaf of L to the leaves of F, rooted at L."""
    F = list(F)
    if not F:
        raise InputError("the measured branch set is empty")
    if L in F:
        raise InputError(f"base branch {L!r} cannot be one of the measured branches")
    return full_dual_tree(g, L, F).restricted_to(F)


def convex_hull_tree(g: WeightedDualGraph, L: str, F: Iterable[str]) -> RootedTree:
    """
    Union of the geodesics between members of F, rooted at the point where
    the geodesic from L reaches it.
    """
    T = embedded_dual_tree(g, L, F)
    root = T.root
    while len(T.children(root)) == 1 and root not in T.labels:
        root = T.children(root)[0]
    hull = {v for v in T.nodes if T.precedes(root, v)}
    return RootedTree(
        root,
        {c: p for c, p in T.parent.items() if c in hull and c != root},
        {v: lab for v, lab in T.labels.items() if v in hull},
    )


def topological_vertices(T: RootedTree) -> Tuple[str, ...]:
    """Leaves, branching nodes and the root."""
    return tuple(v for v in T.nodes if v == T.root or len(T.children(v)) != 1)


def height_to_depth(T: DetProductTable, l: str, v: str) -> Fraction:
    """Depth p(l,v)^2 / (p(v,v) det S) attached to vertex v of the tree rooted at l."""
    return Fraction(T(l, v) ** 2, T(v, v) * T.det_s)


def dated_dual_tree(g: WeightedDualGraph, L: str, F: Iterable[str],
                    table: Optional[DetProductTable] = None) -> RootedTree:
    """embedded_dual_tree with every exceptional vertex decorated by its depth."""
    T = table or build_table(g)
    tree = embedded_dual_tree(g, L, F)
    l = g.attachment(L)
    vertices = set(g.vertex_names)
    decoration = {v: height_to_depth(T, l, v) for v in tree.nodes if v in vertices}
    return RootedTree(tree.root, tree.parent, tree.labels, decoration)


# ============= Canonical forms and the isomorphism check =============

def canonical_form(T: RootedTree, decorated: bool = False, suppress: bool = True) -> tuple:
    """
    Label-driven canonical code: children sorted by code, non-root nodes with
    a single child replaced by that child when suppress is set.
    """
    codes: Dict[str, tuple] = {}
    for v in nx.dfs_postorder_nodes(T.digraph, T.root):
        if v in T.labels:
            codes[v] = ("leaf", T.labels[v])
            continue
        children = T._children[v]
        if suppress and v != T.root and len(children) == 1:
            codes[v] = codes[children[0]]
            continue
        deco = str(T.decoration[v]) if decorated and v in T.decoration else ""
        codes[v] = ("node", deco, tuple(sorted(codes[c] for c in children)))
    return codes[T.root]


@dataclass(frozen=True)
class IsomorphismReport:
    mismatches: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.mismatches


def topint_isomorphism(g: WeightedDualGraph, L: str, F: Optional[Iterable[str]] = None,
                       table: Optional[DetProductTable] = None) -> IsomorphismReport:
    """
    Compare the end-rooted tree of U_L with the embedded dual tree (plain
    and depth-decorated) and the interior-rooted tree with the convex hull
    of F.
    """
    require_tree(g, "the dual tree comparison")
    T = table or build_table(g)
    U = ultrametric_UL(g, L, F, table=T)
    F = U.labels
    interior, end = hierarchy_to_trees(closed_balls(U))
    dated = dated_dual_tree(g, L, F, T)
    hull = convex_hull_tree(g, L, F)

    mismatches = []
    if canonical_form(end) != canonical_form(dated):
        mismatches.append("end-rooted tree of U_L differs from the embedded dual tree")
    elif canonical_form(end, decorated=True) != canonical_form(dated, decorated=True):
        mismatches.append("cluster diameters differ from the depths of the corresponding meets")
    if canonical_form(interior) != canonical_form(hull):
        mismatches.append("interior-rooted tree of U_L differs from the convex hull of the branches")

    for m in mismatches:
        logger.warning("dual tree comparison for base %s: %s", L, m)
    return IsomorphismReport(tuple(mismatches))


def _preorder(T: RootedTree) -> List[str]:
    order, stack = [], [T.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(T._children[v]))
    return order


def to_dot(T: RootedTree, name: str = "T") -> str:
    """DOT text: labelled leaves boxed, decorations shown as exact rationals."""
    lines = [f"digraph {name} {{"]
    for v in _preorder(T):
        attrs = []
        if v in T.labels:
            attrs.append("shape=box")
            text = T.labels[v]
        else:
            text = v
        if v in T.decoration:
            text += f"\\n{T.decoration[v]}"
        attrs.append(f'label="{text}"')
        lines.append(f'  "{v}" [{", ".join(attrs)}];')
    for v in _preorder(T):
        for c in T._children[v]:
            lines.append(f'  "{v}" -> "{c}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
