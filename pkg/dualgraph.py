"""
Weighted Dual Graph Service
Parses, validates and transforms weighted dual graphs of good resolutions
of normal surface singularities, together with the branches attached to them.

Graph file format (UTF-8, line oriented, '#' starts a comment):

    vertex <name> <weight> [genus <g>]
    edge <name> <name> [<multiplicity>]
    branch <name> at <vertex>

Genera are accepted and carried along but never used by any computation.
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import networkx as nx

from errors import GraphSyntaxError, GraphValidationError, InputError, NotATreeError, UnknownNameError
from exactalg import IntMatrix

logger = logging.getLogger(__name__)

NAME_PATTERN = re.compile(r"^[A-Za-z0-9_.'\-]+$")

TreePath = Tuple[str, ...]


@dataclass(frozen=True)
class Vertex:
    name: str
    weight: int
    genus: int = 0


@dataclass(frozen=True)
class Branch:
    name: str
    attach: str


@dataclass(frozen=True)
class WeightedDualGraph:
    """
    Dual graph of a good resolution: vertices weighted by self-intersection,
    a multiset of edges (stored once per unordered pair with its multiplicity)
    and named branches recorded by their attachment vertex.

    Instances are validated on construction and never mutated.
    """

    vertices: Tuple[Vertex, ...]
    edges: Tuple[Tuple[str, str, int], ...] = ()
    branches: Tuple[Branch, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "branches", tuple(self.branches))
        _validate_names(self.vertices, self.branches)
        object.__setattr__(self, "edges", _normalize_edges(self.vertices, self.edges))
        _validate_structure(self)

    # ---- basic accessors ----

    @cached_property
    def vertex_names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.vertices)

    @cached_property
    def branch_names(self) -> Tuple[str, ...]:
        return tuple(b.name for b in self.branches)

    @cached_property
    def _weights(self) -> Dict[str, int]:
        return {v.name: v.weight for v in self.vertices}

    @cached_property
    def _multiplicities(self) -> Dict[frozenset, int]:
        return {frozenset((u, v)): m for u, v, m in self.edges}

    @cached_property
    def _attachments(self) -> Dict[str, str]:
        return {b.name: b.attach for b in self.branches}

    def has_vertex(self, name: str) -> bool:
        return name in self._weights

    def weight(self, v: str) -> int:
        self.require_vertex(v)
        return self._weights[v]

    def multiplicity(self, u: str, v: str) -> int:
        self.require_vertex(u)
        self.require_vertex(v)
        return self._multiplicities.get(frozenset((u, v)), 0) if u != v else 0

    def neighbors(self, v: str) -> List[str]:
        self.require_vertex(v)
        return [w for w in self.vertex_names if w != v and frozenset((v, w)) in self._multiplicities]

    def degree(self, v: str) -> int:
        """Number of edges at v, counted with multiplicity."""
        return sum(self.multiplicity(v, w) for w in self.neighbors(v))

    def attachment(self, branch: str) -> str:
        try:
            return self._attachments[branch]
        except KeyError:
            raise UnknownNameError(f"unknown branch {branch!r}") from None

    def require_vertex(self, v: str) -> None:
        if v not in self._weights:
            raise UnknownNameError(f"unknown vertex {v!r}")

    # ---- derived structures ----

    def intersection_matrix(self) -> IntMatrix:
        """The matrix (E_u . E_v) in vertex order."""
        names = self.vertex_names
        rows = [
            [self._weights[u] if u == v else self._multiplicities.get(frozenset((u, v)), 0) for v in names]
            for u in names
        ]
        return IntMatrix(names, rows)

    @cached_property
    def simple_graph(self) -> nx.Graph:
        """Underlying simple graph; multiplicities kept as an edge attribute."""
        G = nx.Graph()
        G.add_nodes_from(self.vertex_names)
        for u, v, m in self.edges:
            G.add_edge(u, v, multiplicity=m)
        return G

    def __str__(self):
        return format_graph(self)


# ============= Validation helpers =============

def _check_name(name: str, what: str) -> None:
    if not isinstance(name, str) or not NAME_PATTERN.match(name):
        raise GraphValidationError(f"invalid {what} name {name!r}")


def _validate_names(vertices, branches) -> None:
    if not vertices:
        raise GraphValidationError("graph has no vertices")
    seen = set()
    for v in vertices:
        _check_name(v.name, "vertex")
        if v.name in seen:
            raise GraphValidationError(f"duplicate vertex {v.name!r}")
        seen.add(v.name)
        if not isinstance(v.weight, int) or v.weight >= 0:
            raise GraphValidationError(f"vertex {v.name!r} has nonnegative weight {v.weight}")
    vertex_names = set(seen)
    for b in branches:
        _check_name(b.name, "branch")
        if b.name in seen:
            what = "vertex name" if b.name in vertex_names else "branch"
            raise GraphValidationError(f"duplicate {what} {b.name!r}")
        seen.add(b.name)
        if b.attach not in vertex_names:
            raise GraphValidationError(f"branch {b.name!r} attached to unknown vertex {b.attach!r}")


def _normalize_edges(vertices, edges) -> Tuple[Tuple[str, str, int], ...]:
    order = {v.name: i for i, v in enumerate(vertices)}
    merged: Dict[Tuple[str, str], int] = {}
    for edge in edges:
        u, v, m = edge if len(edge) == 3 else (*edge, 1)
        if u not in order or v not in order:
            missing = u if u not in order else v
            raise GraphValidationError(f"edge {u}-{v} uses unknown vertex {missing!r}")
        if u == v:
            raise GraphValidationError(f"loop edge at {u!r}")
        if not isinstance(m, int) or m < 1:
            raise GraphValidationError(f"edge {u}-{v} has invalid multiplicity {m!r}")
        key = (u, v) if order[u] < order[v] else (v, u)
        merged[key] = merged.get(key, 0) + m
    return tuple(sorted(((u, v, m) for (u, v), m in merged.items()), key=lambda e: (order[e[0]], order[e[1]])))


def _validate_structure(g: WeightedDualGraph) -> None:
    if not nx.is_connected(g.simple_graph):
        raise GraphValidationError("graph is disconnected")


# ============= Parsing and formatting =============

def parse_graph(text: str) -> WeightedDualGraph:
    """
    Parse the graph file format into a validated WeightedDualGraph.
    Vertex order is file order.
    """
    vertices: List[Vertex] = []
    edges: List[Tuple[str, str, int]] = []
    branches: List[Branch] = []
    declared: Dict[str, int] = {}

    def declare(name: str, lineno: int, what: str) -> None:
        if not NAME_PATTERN.match(name):
            raise GraphSyntaxError(lineno, f"invalid {what} name {name!r}")
        if name in declared:
            raise GraphValidationError(
                f"line {lineno}: duplicate name {name!r} (first declared on line {declared[name]})"
            )
        declared[name] = lineno

    def integer(token: str, lineno: int, what: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise GraphSyntaxError(lineno, f"{what} must be an integer, got {token!r}") from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if keyword == "vertex":
            if len(tokens) not in (3, 5) or (len(tokens) == 5 and tokens[3] != "genus"):
                raise GraphSyntaxError(lineno, "expected: vertex <name> <weight> [genus <g>]")
            declare(tokens[1], lineno, "vertex")
            weight = integer(tokens[2], lineno, "weight")
            if weight >= 0:
                raise GraphValidationError(f"line {lineno}: vertex {tokens[1]!r} has nonnegative weight {weight}")
            genus = integer(tokens[4], lineno, "genus") if len(tokens) == 5 else 0
            if genus < 0:
                raise GraphSyntaxError(lineno, f"genus must be nonnegative, got {genus}")
            vertices.append(Vertex(tokens[1], weight, genus))

        elif keyword == "edge":
            if len(tokens) not in (3, 4):
                raise GraphSyntaxError(lineno, "expected: edge <name> <name> [<multiplicity>]")
            u, v = tokens[1], tokens[2]
            if u == v:
                raise GraphValidationError(f"line {lineno}: loop edge at {u!r}")
            m = integer(tokens[3], lineno, "multiplicity") if len(tokens) == 4 else 1
            if m < 1:
                raise GraphSyntaxError(lineno, f"multiplicity must be at least 1, got {m}")
            edges.append((u, v, m))

        elif keyword == "branch":
            if len(tokens) != 4 or tokens[2] != "at":
                raise GraphSyntaxError(lineno, "expected: branch <name> at <vertex>")
            declare(tokens[1], lineno, "branch")
            branches.append(Branch(tokens[1], tokens[3]))

        else:
            raise GraphSyntaxError(lineno, f"unknown keyword {keyword!r}")

    g = WeightedDualGraph(tuple(vertices), tuple(edges), tuple(branches))
    logger.debug("parsed graph with %d vertices, %d edges, %d branches",
                 len(g.vertices), len(g.edges), len(g.branches))
    return g


def load_graph(path: Union[str, Path]) -> WeightedDualGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"{path} is not valid UTF-8: byte {e.start} cannot be decoded") from e
    return parse_graph(text)


def format_graph(g: WeightedDualGraph) -> str:
    """Serialize back to the graph file format (parse_graph inverts it)."""
    lines = []
    for v in g.vertices:
        lines.append(f"vertex {v.name} {v.weight}" + (f" genus {v.genus}" if v.genus else ""))
    for u, v, m in g.edges:
        lines.append(f"edge {u} {v}" + (f" {m}" if m != 1 else ""))
    for b in g.branches:
        lines.append(f"branch {b.name} at {b.attach}")
    return "\n".join(lines) + "\n"


def graph_to_json(g: WeightedDualGraph) -> dict:
    return {
        "vertices": [{"name": v.name, "weight": v.weight, "genus": v.genus} for v in g.vertices],
        "edges": [{"u": u, "v": v, "multiplicity": m} for u, v, m in g.edges],
        "branches": [{"name": b.name, "at": b.attach} for b in g.branches],
    }


# ============= Tree queries =============

def is_arborescent(g: WeightedDualGraph) -> bool:
    """True iff the multigraph is a tree (no cycles, no multiple edges)."""
    total = sum(m for _, _, m in g.edges)
    return total == len(g.vertices) - 1 and all(m == 1 for _, _, m in g.edges)


def require_tree(g: WeightedDualGraph, what: str = "this operation") -> None:
    if not is_arborescent(g):
        raise NotATreeError(f"{what} defined only for trees (the dual graph has cycles or multiple edges)")


def geodesic(g: WeightedDualGraph, u: str, v: str) -> TreePath:
    """The unique simple path [uv] in a tree."""
    require_tree(g, "geodesic")
    g.require_vertex(u)
    g.require_vertex(v)
    return tuple(nx.shortest_path(g.simple_graph, u, v))


def infimum(g: WeightedDualGraph, root: str, a: str, b: str) -> str:
    """a ∧ b for the partial order of the tree rooted at root."""
    path_a = geodesic(g, root, a)
    path_b = geodesic(g, root, b)
    meet = root
    for x, y in zip(path_a, path_b):
        if x != y:
            break
        meet = x
    return meet


def subtree_in_direction(g: WeightedDualGraph, u: str, edge: Tuple[str, str]) -> WeightedDualGraph:
    """
    The full weighted subtree on the vertices t != u whose geodesic [ut]
    starts with the given edge. Branches are dropped.
    """
    require_tree(g, "subtree_in_direction")
    g.require_vertex(u)
    if u not in edge or len(set(edge)) != 2:
        raise GraphValidationError(f"edge {edge!r} is not incident to {u!r}")
    (w,) = [x for x in edge if x != u]
    if g.multiplicity(u, w) == 0:
        raise GraphValidationError(f"{u}-{w} is not an edge")

    pruned = g.simple_graph.copy()
    pruned.remove_node(u)
    keep = nx.node_connected_component(pruned, w)
    return _induced(g, keep)


def _induced(g: WeightedDualGraph, names) -> WeightedDualGraph:
    names = set(names)
    return WeightedDualGraph(
        tuple(v for v in g.vertices if v.name in names),
        tuple(e for e in g.edges if e[0] in names and e[1] in names),
        (),
    )


# ============= Blow-ups and branch edits =============

@dataclass(frozen=True)
class FreePoint:
    """A point of E_v lying on no other component."""
    vertex: str


@dataclass(frozen=True)
class IntersectionPoint:
    """One of the intersection points of E_u and E_v."""
    u: str
    v: str


@dataclass(frozen=True)
class BranchPoint:
    """The point where the strict transform of a branch meets E."""
    branch: str


BlowUpSite = Union[FreePoint, IntersectionPoint, BranchPoint]


def fresh_name(g: WeightedDualGraph, stem: str = "n") -> str:
    taken = set(g.vertex_names) | set(g.branch_names)
    if stem not in taken:
        return stem
    k = 1
    while f"{stem}{k}" in taken:
        k += 1
    return f"{stem}{k}"


def blow_up(g: WeightedDualGraph, site: BlowUpSite, new_name: Optional[str] = None) -> WeightedDualGraph:
    """
    Blow up one point of the exceptional divisor. The new component has
    self-intersection -1; strict transforms through the point drop by 1.
    """
    n = new_name or fresh_name(g)
    if n in g.vertex_names or n in g.branch_names:
        raise GraphValidationError(f"name {n!r} already in use")

    weights = {v.name: v.weight for v in g.vertices}
    edges = {frozenset((u, v)): m for u, v, m in g.edges}
    branches = list(g.branches)

    if isinstance(site, IntersectionPoint):
        key = frozenset((site.u, site.v))
        if site.u == site.v or edges.get(key, 0) < 1:
            raise GraphValidationError(f"{site.u}-{site.v} is not an edge")
        edges[key] -= 1
        if edges[key] == 0:
            del edges[key]
        touched = [site.u, site.v]
    elif isinstance(site, FreePoint):
        g.require_vertex(site.vertex)
        touched = [site.vertex]
    elif isinstance(site, BranchPoint):
        attach = g.attachment(site.branch)
        touched = [attach]
        branches = [Branch(b.name, n) if b.name == site.branch else b for b in branches]
    else:
        raise TypeError(f"unknown blow-up site {site!r}")

    for t in touched:
        weights[t] -= 1
        edges[frozenset((n, t))] = 1

    vertices = tuple(Vertex(v.name, weights[v.name], v.genus) for v in g.vertices) + (Vertex(n, -1),)
    order = {v.name: i for i, v in enumerate(vertices)}
    edge_list = []
    for key, m in edges.items():
        u, v = sorted(key, key=order.__getitem__)
        edge_list.append((u, v, m))
    logger.debug("blew up %r creating %r", site, n)
    return WeightedDualGraph(vertices, tuple(edge_list), tuple(branches))


def with_branch(g: WeightedDualGraph, name: str, attach: str) -> WeightedDualGraph:
    """Copy of g with one more branch attached at the given vertex."""
    return WeightedDualGraph(g.vertices, g.edges, g.branches + (Branch(name, attach),))


def total_transform_tree(g: WeightedDualGraph) -> nx.Graph:
    """
    Dual graph of the total transform: every vertex of g plus one leaf node
    per branch, joined to its attachment vertex. Nodes carry kind='vertex'
    or kind='branch'.
    """
    G = nx.Graph()
    for v in g.vertex_names:
        G.add_node(v, kind="vertex")
    for u, v, _ in g.edges:
        G.add_edge(u, v)
    for b in g.branches:
        G.add_node(b.name, kind="branch")
        G.add_edge(b.name, b.attach)
    return G
