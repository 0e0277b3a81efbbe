"""
Property Suite
Runs every exact identity and structural property over seeded random instances
and reports a deterministic summary. Any violation carries a reproducer in
the graph file format.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from detprod import DetProductTable, affinity, build_table, duchon_det, refined_four_point
from dualgraph import WeightedDualGraph, format_graph, geodesic
from errors import BranchspaceError, InputError
from exactalg import IntMatrix, adjugate, determinant, identity, inverse
from generator import GRAPH, TREE, generate_instance, random_blow_up
from lattice import (ExceptionalCycle, IntersectionLattice, build_lattice, cone_membership,
                     exceptional_transform, fundamental_cycle, generic_hyperplane_vertex)
from treekit import (canonical_form, closed_balls, embedded_dual_tree, full_dual_tree,
                     hierarchy_to_trees, topint_isomorphism, ultrametric_from_depth)
from ultra import (NOT_METRIC, METRIC_ONLY, ULTRAMETRIC, check_bound, check_teissier, classify, formula_crosscheck,
                   ultrametric_UL, ultrametric_UO)
from valord import BELOW, EQUAL, eval_ord, tree_order, val_order_divisorial, val_order_intersection, valuation_tree

logger = logging.getLogger(__name__)

BASE = "L"
FOUR_POINT_SAMPLES = 40


@dataclass
class Instance:
    index: int
    graph: WeightedDualGraph
    rng: np.random.Generator
    lattice: IntersectionLattice
    table: Optional[DetProductTable] = None

    @property
    def measured(self) -> Tuple[str, ...]:
        return tuple(b for b in self.graph.branch_names if b != BASE)


@dataclass
class PropertyTally:
    checked: int = 0
    skipped: int = 0
    failed: int = 0


@dataclass
class Failure:
    instance: int
    prop: str
    message: str
    reproducer: str


@dataclass
class CheckSummary:
    seed: int
    count: int
    max_vertices: int
    mode: str
    tallies: Dict[str, PropertyTally] = field(default_factory=dict)
    failures: List[Failure] = field(default_factory=list)
    findings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


PropertyFn = Callable[[Instance], Optional[str]]

TREE_PROPERTIES: List[Tuple[str, PropertyFn]] = []
GRAPH_PROPERTIES: List[Tuple[str, PropertyFn]] = []


def _property(name: str, *registries):
    def register(fn: PropertyFn) -> PropertyFn:
        for registry in registries or (TREE_PROPERTIES,):
            registry.append((name, fn))
        return fn
    return register


class Skip(Exception):
    """Raised by a property that does not apply to the instance."""


# ============= Matrix kernel and lattice =============

@_property("inverse-adjugate", TREE_PROPERTIES, GRAPH_PROPERTIES)
def _inverse_adjugate(inst: Instance) -> Optional[str]:
    minus_I = -inst.graph.intersection_matrix()
    det = determinant(minus_I)
    inv = inverse(minus_I)
    if inv @ minus_I != identity(minus_I.index):
        return "inverse(-I) @ -I is not the identity"
    adj = adjugate(minus_I)
    for u in adj.index:
        for v in adj.index:
            if adj.entry(u, v) != det * inv.entry(u, v):
                return f"adj(-I)[{u},{v}] != det * inverse"
            if inst.lattice.dual.entry(u, v) >= 0:
                return f"E_{u}*.E_{v}* is not negative"
    return None


@_property("exceptional-transform", TREE_PROPERTIES, GRAPH_PROPERTIES)
def _exceptional_transform(inst: Instance) -> Optional[str]:
    L = inst.lattice
    degrees = {v: int(inst.rng.integers(0, 3)) for v in L.vertex_names}
    if not any(degrees.values()):
        degrees[L.vertex_names[0]] = 1
    D = exceptional_transform(L, degrees)
    for u in L.vertex_names:
        if L.intersect(D, u) != -degrees[u]:
            return f"D.E_{u} = {L.intersect(D, u)}, expected {-degrees[u]}"
    flags = cone_membership(L, D)
    if not (flags.effective and flags.anti_nef):
        return f"exceptional transform has cone flags {flags}"
    if any(c <= 0 for _, c in D.items()):
        return "exceptional transform has a non-positive coefficient"

    nef = ExceptionalCycle({})
    for u, k in degrees.items():
        nef = nef + L.dual_vector(u).scaled(k)
    if any(c >= 0 for _, c in nef.items()):
        return "nef cycle has a nonnegative coefficient"
    return None


@_property("fundamental-cycle", TREE_PROPERTIES, GRAPH_PROPERTIES)
def _fundamental_cycle(inst: Instance) -> Optional[str]:
    L = inst.lattice
    Z = fundamental_cycle(L)
    if not Z.is_integral() or any(c < 1 for _, c in Z.items()):
        return f"fundamental cycle {Z} is not a positive integral cycle"
    if not cone_membership(L, Z).anti_nef:
        return "fundamental cycle is not anti-nef"

    u = generic_hyperplane_vertex(L)
    if u is None:
        return None
    UO = ultrametric_UO(inst.graph, lattice=L)
    if inst.table is None:
        # the bound and ultrametricity are only known for trees
        return None
    teissier = check_teissier(inst.graph, lattice=L, space=UO)
    if not teissier.holds:
        return f"U_O value {teissier.largest} exceeds m_O(S) = {teissier.multiplicity}"
    if len(UO.labels) >= 3 and classify(UO).verdict != ULTRAMETRIC:
        return "U_O is not an ultrametric on an arborescent graph"
    return None


@_property("blow-up-invariance", TREE_PROPERTIES, GRAPH_PROPERTIES)
def _blow_up_invariance(inst: Instance) -> Optional[str]:
    g = inst.graph
    g2, site = random_blow_up(inst.rng, g)
    L2 = build_lattice(g2)
    if L2.det_s != inst.lattice.det_s:
        return f"det(S) changed from {inst.lattice.det_s} to {L2.det_s} after blowing up {site}"
    for u in g.vertex_names:
        for v in g.vertex_names:
            if L2.dual.entry(u, v) != inst.lattice.dual.entry(u, v):
                return f"E_{u}*.E_{v}* changed after blowing up {site}"
    F = inst.measured
    if F:
        before = ultrametric_UL(g, BASE, F, lattice=inst.lattice, table=inst.table)
        after = ultrametric_UL(g2, BASE, F, lattice=L2)
        if before.dist != after.dist:
            return f"U_L changed after blowing up {site}"
    return None


# ============= Determinant products (trees) =============

@_property("table-oracle")
def _table_oracle(inst: Instance) -> Optional[str]:
    minus_I = -inst.graph.intersection_matrix()
    adj = adjugate(minus_I)
    T = inst.table
    for u in T.index:
        for v in T.index:
            if T(u, v) != adj.entry(u, v):
                return f"p({u},{v}) = {T(u, v)} but adj(-I) gives {adj.entry(u, v)}"
    for root in (T.index[0], T.index[-1]):
        _, det = duchon_det(inst.graph, root)
        if det != determinant(minus_I):
            return f"Duchon determinant from {root} is {det}, expected {determinant(minus_I)}"
    return None


@_property("eisenbud-neumann")
def _eisenbud_neumann(inst: Instance) -> Optional[str]:
    g, T = inst.graph, inst.table
    for u in g.vertex_names:
        for w in g.vertex_names:
            for v in geodesic(g, u, w):
                if T(u, v) * T(v, w) != T(v, v) * T(u, w):
                    return f"p({u},{v}) p({v},{w}) != p({v},{v}) p({u},{w})"
                if affinity(T, u, v).q * affinity(T, v, w).q != affinity(T, u, w).q:
                    return f"affinity is not multiplicative along [{u}{w}] at {v}"
    for u, v in combinations(g.vertex_names, 2):
        if T(u, u) * T(v, v) <= T(u, v) ** 2:
            return f"p({u},{u}) p({v},{v}) <= p({u},{v})^2"
    return None


@_property("refined-four-point")
def _refined_four_point(inst: Instance) -> Optional[str]:
    g = inst.graph
    n = len(g.vertices)
    if n < 4:
        raise Skip
    for _ in range(FOUR_POINT_SAMPLES):
        l, v, u, w = (g.vertex_names[int(i)] for i in inst.rng.choice(n, size=4, replace=False))
        report = refined_four_point(g, inst.table, l, v, u, w)
        if not report.holds:
            return f"refined four-point law fails on ({l},{v},{u},{w}): {report}"
        products = sorted([inst.table(l, u) * inst.table(v, w), inst.table(l, v) * inst.table(u, w),
                           inst.table(l, w) * inst.table(u, v)])
        if products[0] != products[1]:
            return f"multiplicative four-point condition fails on ({l},{v},{u},{w})"
    return None


# ============= U_L and trees =============

@_property("ultrametric")
def _ultrametric(inst: Instance) -> Optional[str]:
    g, F = inst.graph, inst.measured
    U = ultrametric_UL(g, BASE, F, table=inst.table)
    verdict = classify(U)
    if verdict.witness is not None:
        return f"U_L is {verdict.verdict}: {verdict.witness.reason}"
    for A, B in combinations(F, 2):
        formula_crosscheck(g, BASE, A, B, inst.table)
        bound = check_bound(g, BASE, A, B, inst.table)
        if bound.value > bound.bound:
            return f"U_L({A},{B}) = {bound.value} exceeds the bound {bound.bound}"
        if (bound.value == bound.bound) != bound.tight:
            return f"bound tightness for ({A},{B}) disagrees with the geodesic test"
    return None


@_property("hierarchy-round-trip")
def _round_trip(inst: Instance) -> Optional[str]:
    F = inst.measured
    if not F:
        raise Skip
    U = ultrametric_UL(inst.graph, BASE, F, table=inst.table)
    _, end = hierarchy_to_trees(closed_balls(U))
    back = ultrametric_from_depth(end)
    for a, b in combinations(U.labels, 2):
        if back(a, b) != U(a, b):
            return f"round trip changed U({a},{b}) from {U(a, b)} to {back(a, b)}"
    return None


@_property("dual-tree-isomorphism")
def _dual_tree_isomorphism(inst: Instance) -> Optional[str]:
    if not inst.measured:
        raise Skip
    report = topint_isomorphism(inst.graph, BASE, inst.measured, inst.table)
    return "; ".join(report.mismatches) or None


@_property("valuative-order")
def _valuative_order(inst: Instance) -> Optional[str]:
    g, T = inst.graph, inst.table
    tree = full_dual_tree(g, BASE)
    for u in g.vertex_names:
        for v in g.vertex_names:
            expected = tree_order(g, BASE, u, v, tree) in (BELOW, EQUAL)
            if val_order_divisorial(g, BASE, u, v, T) != expected:
                return f"ord_{u} <= ord_{v} disagrees with the tree order"
        for A in inst.measured:
            expected = tree_order(g, BASE, u, A, tree) == BELOW
            if val_order_intersection(g, BASE, u, A, T) != expected:
                return f"ord_{u} <= int_{A} disagrees with the tree order"

    D = ExceptionalCycle({})
    for w in g.vertex_names:
        D = D - inst.lattice.dual_vector(w).scaled(int(inst.rng.integers(0, 3)))
    if not D.is_zero():
        for u in g.vertex_names:
            for v in g.vertex_names:
                if tree_order(g, BASE, u, v, tree) == BELOW:
                    if eval_ord(inst.lattice, BASE, u, D) > eval_ord(inst.lattice, BASE, v, D):
                        return f"ord_{u}(D) > ord_{v}(D) although {u} precedes {v}"
    return None


@_property("valuation-tree")
def _valuation_tree(inst: Instance) -> Optional[str]:
    g, F = inst.graph, inst.measured
    V = valuation_tree(g, BASE, F, inst.table)
    dual = full_dual_tree(g, BASE, F)
    if dict(V.parent) != dict(dual.parent):
        return "valuation tree differs from the dual tree of the total transform"
    if F and canonical_form(V.restricted_to(F)) != canonical_form(embedded_dual_tree(g, BASE, F)):
        return "valuation tree restricted to F differs from the embedded dual tree"
    return None


# ============= Runner =============

def _corrupt(T: DetProductTable) -> DetProductTable:
    first = T.index[0]
    rows = [[T(u, v) + (1 if u == v == first else 0) for v in T.index] for u in T.index]
    return DetProductTable(IntMatrix(T.index, rows), T.det_s)


def _reproducer(seed: int, index: int, prop: str, g: WeightedDualGraph) -> str:
    return f"# seed {seed} instance {index} property {prop}\n" + format_graph(g)


def run_suite(seed: int, count: int, max_vertices: int, mode: str = TREE,
              reject_sample: bool = False, inject_fault: bool = False,
              crosscheck: bool = True) -> CheckSummary:
    """
    Instance i is generated from the i-th child of SeedSequence(seed), so a
    run is fully determined by its arguments.
    """
    if count < 0:
        raise InputError(f"count must be nonnegative, got {count}")
    properties = TREE_PROPERTIES if mode == TREE else GRAPH_PROPERTIES
    summary = CheckSummary(seed, count, max_vertices, mode)
    for name, _ in properties:
        summary.tallies[name] = PropertyTally()
    if mode == GRAPH:
        summary.tallies["ultrametric-survey"] = PropertyTally()

    children = np.random.SeedSequence(seed).spawn(count)
    for index, child in enumerate(children):
        rng = np.random.default_rng(child)
        g = generate_instance(rng, max_vertices, mode, reject_sample)
        try:
            lattice = build_lattice(g)
            table = None
            if mode == TREE:
                table = build_table(g, crosscheck=crosscheck)
                if inject_fault:
                    table = _corrupt(table)
        except BranchspaceError as e:
            summary.failures.append(Failure(index, "setup", str(e), _reproducer(seed, index, "setup", g)))
            continue

        inst = Instance(index, g, rng, lattice, table)
        for name, fn in properties:
            tally = summary.tallies[name]
            try:
                message = fn(inst)
            except Skip:
                tally.skipped += 1
                continue
            except BranchspaceError as e:
                message = f"{type(e).__name__}: {e}"
            tally.checked += 1
            if message is not None:
                tally.failed += 1
                summary.failures.append(Failure(index, name, message, _reproducer(seed, index, name, g)))
                logger.info("instance %d failed %s: %s", index, name, message)

        if mode == GRAPH:
            _survey(inst, summary)

    summary.failures.sort(key=lambda f: (f.instance, f.prop))
    return summary


def _survey(inst: Instance, summary: CheckSummary) -> None:
    """Record (non-)ultrametric findings on graphs with cycles; these are not failures."""
    tally = summary.tallies["ultrametric-survey"]
    F = inst.measured
    if len(F) < 3:
        tally.skipped += 1
        return
    tally.checked += 1
    verdict = classify(ultrametric_UL(inst.graph, BASE, F, lattice=inst.lattice))
    if verdict.verdict in (METRIC_ONLY, NOT_METRIC):
        summary.findings.append(
            f"instance {inst.index}: {verdict.verdict} on {','.join(verdict.witness.triple)}"
        )
