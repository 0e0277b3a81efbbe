"""
Instance Generator
Seeded random negative definite dual graphs with branch attachments, used
by the property suite and the `gen` subcommand.
"""

import logging
import string
from typing import List, Optional, Tuple, Union

import numpy as np

from dualgraph import (Branch, BranchPoint, FreePoint, IntersectionPoint, Vertex, WeightedDualGraph,
                       blow_up, fresh_name)
from errors import InputError
from exactalg import is_negative_definite

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

MAX_BRANCHES = 5
REJECT_ATTEMPTS = 1000
TREE = "tree"
GRAPH = "graph"


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _attach_branches(rng: np.random.Generator, names: List[str]) -> Tuple[Branch, ...]:
    """The base branch L plus 1-5 further branches at random vertices."""
    k = int(rng.integers(1, MAX_BRANCHES + 1))
    labels = ["L"] + list(string.ascii_uppercase[:k])
    return tuple(Branch(b, names[int(rng.integers(0, len(names)))]) for b in labels)


def _dominant_weights(rng: np.random.Generator, names: List[str], edges) -> List[Vertex]:
    degree = {v: 0 for v in names}
    for u, v, m in edges:
        degree[u] += m
        degree[v] += m
    return [Vertex(v, -(max(degree[v], 1) + 1 + int(rng.integers(0, 4)))) for v in names]


def generate_tree(seed: SeedLike, n: int, reject_sample: bool = False) -> WeightedDualGraph:
    """
    Random tree on n vertices: vertex i joins a uniformly chosen earlier
    vertex. Weights are -(max(degree, 1) + 1 + r), r in 0..3, which makes -I strictly
    diagonally dominant. With reject_sample the weights are drawn from
    -5..-2 instead and redrawn until Sylvester's criterion passes.
    """
    if n < 1:
        raise InputError(f"vertex count must be at least 1, got {n}")
    rng = _rng(seed)
    names = [f"v{i}" for i in range(n)]
    edges = [(names[int(rng.integers(0, i))], names[i], 1) for i in range(1, n)]

    if reject_sample:
        vertices = _rejection_weights(rng, names, edges)
    else:
        vertices = _dominant_weights(rng, names, edges)
    return WeightedDualGraph(tuple(vertices), tuple(edges), _attach_branches(rng, names))


def _rejection_weights(rng: np.random.Generator, names: List[str], edges) -> List[Vertex]:
    for attempt in range(REJECT_ATTEMPTS):
        vertices = [Vertex(v, -int(rng.integers(2, 6))) for v in names]
        candidate = WeightedDualGraph(tuple(vertices), tuple(edges))
        if is_negative_definite(candidate.intersection_matrix()):
            if attempt:
                logger.debug("rejection sampling accepted after %d attempts", attempt + 1)
            return vertices
    logger.warning("rejection sampling gave up after %d attempts; using dominant weights", REJECT_ATTEMPTS)
    return _dominant_weights(rng, names, edges)


def generate_graph(seed: SeedLike, n: int) -> WeightedDualGraph:
    """
    Non-arborescent instance: a random tree plus one or two extra edges
    (possibly doubling an existing one), with dominant weights.
    """
    if n < 2:
        raise InputError(f"a graph with cycles needs at least 2 vertices, got {n}")
    rng = _rng(seed)
    names = [f"v{i}" for i in range(n)]
    edges = [(names[int(rng.integers(0, i))], names[i], 1) for i in range(1, n)]
    for _ in range(int(rng.integers(1, 3))):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((names[int(u)], names[int(v)], 1))
    merged = WeightedDualGraph(tuple(Vertex(v, -1) for v in names), tuple(edges))
    vertices = _dominant_weights(rng, names, merged.edges)
    return WeightedDualGraph(tuple(vertices), merged.edges, _attach_branches(rng, names))


def generate_instance(seed: SeedLike, max_vertices: int, mode: str = TREE,
                      reject_sample: bool = False) -> WeightedDualGraph:
    """One instance with a random vertex count in 1..max_vertices (2.. for graphs)."""
    if max_vertices < 1:
        raise InputError(f"max-vertices must be at least 1, got {max_vertices}")
    rng = _rng(seed)
    if mode == TREE:
        return generate_tree(rng, int(rng.integers(1, max_vertices + 1)), reject_sample)
    if mode == GRAPH:
        return generate_graph(rng, int(rng.integers(2, max(max_vertices, 2) + 1)))
    raise InputError(f"unknown generator mode {mode!r}")


def random_blow_up(seed: SeedLike, g: WeightedDualGraph, new_name: Optional[str] = None):
    """Blow up a random free point, intersection point or branch point. Returns (graph, site)."""
    rng = _rng(seed)
    kinds = ["free"]
    if g.edges:
        kinds.append("intersection")
    if g.branches:
        kinds.append("branch")
    kind = kinds[int(rng.integers(0, len(kinds)))]

    if kind == "free":
        site = FreePoint(g.vertex_names[int(rng.integers(0, len(g.vertices)))])
    elif kind == "intersection":
        u, v, _ = g.edges[int(rng.integers(0, len(g.edges)))]
        site = IntersectionPoint(u, v)
    else:
        site = BranchPoint(g.branch_names[int(rng.integers(0, len(g.branches)))])
    return blow_up(g, site, new_name or fresh_name(g, "n")), site
