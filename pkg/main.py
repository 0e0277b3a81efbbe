"""
branchspace command-line entry point.

Every subcommand handler returns a result dict
    {'success': True, 'output': ...}  or
    {'success': False, 'error': ..., 'exit_code': ...}
and main() turns it into stdout/stderr and a process exit code.
"""
import argparse
import functools
import logging
import os
import sys

import checks
import dualgraph
import generator
import serialize
from detprod import build_table, edge_determinants
from errors import BranchspaceError, InputError
from lattice import build_lattice, fundamental_cycle, generic_hyperplane_vertex, multiplicity
from treekit import closed_balls, hierarchy_to_trees, to_dot, topint_isomorphism
from ultra import ULTRAMETRIC, METRIC_ONLY, check_teissier, classify, ultrametric_UL, ultrametric_UO
from valord import order_matrix, valuation_tree

# Configuration
COLOR = os.environ.get('BRANCHSPACE_COLOR', '1') != '0'
LOG_LEVEL = os.environ.get('BRANCHSPACE_LOG_LEVEL', 'WARNING').upper()
DEFAULT_SEED = int(os.environ.get('BRANCHSPACE_SEED', 42))
DEFAULT_COUNT = int(os.environ.get('BRANCHSPACE_COUNT', 200))
DEFAULT_MAX_VERTICES = int(os.environ.get('BRANCHSPACE_MAX_VERTICES', 12))

FORMATS = {
    'validate': ('text', 'json'),
    'matrix': ('text', 'json'),
    'dual': ('text', 'json'),
    'detprod': ('text', 'json'),
    'ultrametric': ('text', 'json'),
    'tree': ('text', 'json', 'dot'),
    'valorder': ('text', 'json', 'dot'),
    'uo': ('text', 'json'),
    'check': ('text', 'json'),
    'gen': ('text', 'json'),
}

VERDICT_COLORS = {ULTRAMETRIC: 'green', METRIC_ONLY: 'yellow'}

logger = logging.getLogger('branchspace')


def service(fn):
    """Convert library exceptions into failure dicts."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BranchspaceError as e:
            logger.debug("%s failed: %s", fn.__name__, e)
            return {'success': False, 'error': str(e), 'exit_code': e.exit_code}
        except OSError as e:
            return {'success': False, 'error': f"cannot read input: {e}", 'exit_code': InputError.exit_code}
    return wrapper


def _verdict(verdict, color):
    return serialize.colorize(verdict, VERDICT_COLORS.get(verdict, 'red'), color)


# ============= Single-graph subcommands =============

@service
def cmd_validate(path, fmt='text', color=False):
    g = dualgraph.load_graph(path)
    lattice = build_lattice(g)
    shape = 'arborescent' if dualgraph.is_arborescent(g) else 'non-arborescent'
    if fmt == 'json':
        output = serialize.dumps({
            'arborescent': dualgraph.is_arborescent(g),
            'negativeDefinite': True,
            'detS': lattice.det_s,
            'graph': dualgraph.graph_to_json(g),
        })
    else:
        output = f"{shape}, negative definite, det(S)={lattice.det_s}\n"
    return {'success': True, 'output': output}


@service
def cmd_matrix(path, fmt='text', color=False):
    g = dualgraph.load_graph(path)
    I = g.intersection_matrix()
    if fmt == 'json':
        output = serialize.dumps({'index': list(I.index), 'I': I.to_json()})
    else:
        output = serialize.matrix_text(I) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_dual(path, fmt='text', color=False):
    g = dualgraph.load_graph(path)
    lattice = build_lattice(g)
    Z = fundamental_cycle(lattice)
    u = generic_hyperplane_vertex(lattice)
    if fmt == 'json':
        output = serialize.dumps({
            'index': list(lattice.vertex_names),
            'detS': lattice.det_s,
            'dual': lattice.dual.to_json(),
            'fundamentalCycle': Z.to_json(),
            'hyperplaneVertex': u,
            'multiplicity': multiplicity(lattice),
        })
    else:
        lines = [
            f"det(S) = {lattice.det_s}",
            "E_u*.E_v*:",
            serialize.matrix_text(lattice.dual),
            f"Z_f = {serialize.cycle_text(dict(Z.items()))}",
            f"-Z_f.Z_f = {multiplicity(lattice)}",
            f"Z_f = -E_u* at: {u if u is not None else 'none'}",
        ]
        output = "\n".join(lines) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_detprod(path, fmt='text', color=False, crosscheck=True):
    g = dualgraph.load_graph(path)
    dualgraph.require_tree(g, "determinant products")
    build_lattice(g)
    T = build_table(g, crosscheck=crosscheck)
    if fmt == 'json':
        output = serialize.dumps(T.to_json())
    else:
        dets = edge_determinants(g)
        lines = [f"det(S) = {T.det_s}", serialize.matrix_text(T.p), "edge determinants:"]
        lines += [f"  det[{u},{u}{w}] = {d}" for (u, w), d in sorted(dets.items())]
        output = "\n".join(lines) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_ultrametric(path, base='L', fmt='text', color=False, crosscheck=True):
    g = dualgraph.load_graph(path)
    lattice = build_lattice(g)
    U = ultrametric_UL(g, base, lattice=lattice, crosscheck=crosscheck)
    verdict = classify(U)
    if fmt == 'json':
        output = serialize.dumps({
            'base': base,
            'labels': list(U.labels),
            'U': U.dist.to_json(),
            'verdict': verdict.verdict,
            'witness': list(verdict.witness.triple) if verdict.witness else None,
        })
    else:
        lines = [f"U_{base}:", serialize.matrix_text(U.dist), _verdict(verdict.verdict, color)]
        if verdict.witness:
            lines.append(f"witness {','.join(verdict.witness.triple)}: {verdict.witness.reason}")
        output = "\n".join(lines) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_tree(path, base='L', fmt='text', color=False, crosscheck=True):
    g = dualgraph.load_graph(path)
    lattice = build_lattice(g)
    table = build_table(g, crosscheck=crosscheck) if dualgraph.is_arborescent(g) else None
    U = ultrametric_UL(g, base, lattice=lattice, table=table)
    if not U.labels:
        raise InputError(f"no branches to measure besides the base {base!r}")
    H = closed_balls(U)
    _, end = hierarchy_to_trees(H)
    report = topint_isomorphism(g, base, U.labels, table) if table is not None else None

    if fmt == 'dot':
        return {'success': True, 'output': to_dot(end, 'U_' + base)}
    if fmt == 'json':
        output = serialize.dumps({
            'base': base,
            'tree': end.to_json(),
            'dualTreeMatch': None if report is None else report.ok,
        })
    else:
        lines = [f"clusters of U_{base}:"]
        for C in H.clusters:
            if len(C) > 1:
                lines.append(f"  {{{','.join(sorted(C))}}}  diameter {serialize.rational(H.diameters[C])}")
        if report is not None:
            status = 'ok' if report.ok else '; '.join(report.mismatches)
            lines.append(f"embedded dual tree: {status}")
        output = "\n".join(lines) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_valorder(path, base='L', fmt='text', color=False, crosscheck=True):
    g = dualgraph.load_graph(path)
    dualgraph.require_tree(g, "the valuative order")
    build_lattice(g)
    table = build_table(g, crosscheck=crosscheck)
    M = order_matrix(g, base, table=table)
    tree = valuation_tree(g, base, table=table)
    if fmt == 'dot':
        return {'success': True, 'output': to_dot(tree, 'valuations')}
    if fmt == 'json':
        output = serialize.dumps({'base': base, **M.to_json(), 'tree': tree.to_json()})
    else:
        header = [""] + list(M.elements)
        rows = [[x] + [M(x, y) for y in M.elements] for x in M.elements]
        output = serialize.table(header, rows) + "\n"
    return {'success': True, 'output': output}


@service
def cmd_uo(path, fmt='text', color=False):
    g = dualgraph.load_graph(path)
    lattice = build_lattice(g)
    U = ultrametric_UO(g, lattice=lattice)
    teissier = check_teissier(g, lattice=lattice, space=U)
    note = "combinatorial criterion only"
    if fmt == 'json':
        output = serialize.dumps({
            'hyperplaneVertex': teissier.vertex,
            'labels': list(U.labels),
            'U': U.dist.to_json(),
            'multiplicity': serialize.rational(teissier.multiplicity),
            'teissier': teissier.holds,
            'note': note,
        })
    else:
        lines = [
            f"U_O (generic hyperplane branch at {teissier.vertex}; {note}):",
            serialize.matrix_text(U.dist),
            f"m_O(S) = {serialize.rational(teissier.multiplicity)}; "
            f"Teissier bound {'holds' if teissier.holds else 'fails'}",
        ]
        output = "\n".join(lines) + "\n"
    return {'success': True, 'output': output}


# ============= Generated-instance subcommands =============

@service
def cmd_check(seed, count, max_vertices, mode=generator.TREE, reject_sample=False,
              inject_fault=False, fmt='text', color=False, crosscheck=True):
    summary = checks.run_suite(seed, count, max_vertices, mode, reject_sample, inject_fault, crosscheck)
    if fmt == 'json':
        output = serialize.dumps(serialize.check_summary_json(summary))
    else:
        verdict = serialize.colorize('PASS', 'green', color) if summary.passed else \
            serialize.colorize('FAIL', 'red', color)
        output = serialize.check_summary_text(summary) + verdict + "\n"
    if not summary.passed:
        first = summary.failures[0]
        return {
            'success': False,
            'output': output,
            'error': f"property {first.prop} failed on instance {first.instance}\n{first.reproducer}",
            'exit_code': 5,
        }
    return {'success': True, 'output': output}


@service
def cmd_gen(seed, max_vertices, mode=generator.TREE, reject_sample=False, fmt='text', color=False):
    g = generator.generate_instance(seed, max_vertices, mode, reject_sample)
    if fmt == 'json':
        output = serialize.dumps(dualgraph.graph_to_json(g))
    else:
        output = dualgraph.format_graph(g)
    return {'success': True, 'output': output}


# ============= Argument parsing =============

def build_parser():
    parser = argparse.ArgumentParser(
        prog='branchspace',
        description='Exact invariants of surface singularity resolution graphs and branch ultrametrics.',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    for name in ('validate', 'matrix', 'dual', 'detprod', 'ultrametric', 'tree', 'valorder', 'uo'):
        p = sub.add_parser(name)
        p.add_argument('path')
        p.add_argument('--format', default='text', choices=FORMATS[name])
        if name in ('ultrametric', 'tree', 'valorder'):
            p.add_argument('--base', default='L')
        if name in ('detprod', 'ultrametric', 'tree', 'valorder'):
            p.add_argument('--skip-crosscheck', action='store_true')

    for name in ('check', 'gen'):
        p = sub.add_parser(name)
        p.add_argument('--seed', type=int, default=DEFAULT_SEED)
        p.add_argument('--max-vertices', type=int, default=DEFAULT_MAX_VERTICES)
        p.add_argument('--mode', default=generator.TREE, choices=(generator.TREE, generator.GRAPH))
        p.add_argument('--reject-sample', action='store_true')
        p.add_argument('--format', default='text', choices=FORMATS[name])
        if name == 'check':
            p.add_argument('--count', type=int, default=DEFAULT_COUNT)
            p.add_argument('--inject-fault', action='store_true')
            p.add_argument('--skip-crosscheck', action='store_true')
    return parser


def dispatch(args, color=False):
    common = {'fmt': args.format, 'color': color}
    crosscheck = not getattr(args, 'skip_crosscheck', False)
    if args.command in ('check', 'gen') and not 0 <= args.seed < 2 ** 64:
        return {'success': False, 'error': f"seed must be an unsigned 64-bit integer, got {args.seed}",
                'exit_code': InputError.exit_code}
    if args.command in ('check', 'gen') and args.max_vertices < 1:
        return {'success': False, 'error': f"max-vertices must be at least 1, got {args.max_vertices}",
                'exit_code': InputError.exit_code}
    if args.command == 'check' and args.count < 0:
        return {'success': False, 'error': f"count must be nonnegative, got {args.count}",
                'exit_code': InputError.exit_code}

    if args.command == 'validate':
        return cmd_validate(args.path, **common)
    if args.command == 'matrix':
        return cmd_matrix(args.path, **common)
    if args.command == 'dual':
        return cmd_dual(args.path, **common)
    if args.command == 'detprod':
        return cmd_detprod(args.path, crosscheck=crosscheck, **common)
    if args.command == 'ultrametric':
        return cmd_ultrametric(args.path, args.base, crosscheck=crosscheck, **common)
    if args.command == 'tree':
        return cmd_tree(args.path, args.base, crosscheck=crosscheck, **common)
    if args.command == 'valorder':
        return cmd_valorder(args.path, args.base, crosscheck=crosscheck, **common)
    if args.command == 'uo':
        return cmd_uo(args.path, **common)
    if args.command == 'check':
        return cmd_check(args.seed, args.count, args.max_vertices, args.mode, args.reject_sample,
                         args.inject_fault, crosscheck=crosscheck, **common)
    return cmd_gen(args.seed, args.max_vertices, args.mode, args.reject_sample, **common)


def main(argv=None):
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.WARNING),
        stream=sys.stderr,
        format='%(levelname)s %(name)s: %(message)s',
    )
    args = build_parser().parse_args(argv)
    logger.debug("running %s (seed %s)", args.command, getattr(args, 'seed', '-'))

    color = COLOR and sys.stdout.isatty()
    result = dispatch(args, color)

    if result.get('output'):
        sys.stdout.write(result['output'])
    if result['success']:
        return 0
    sys.stderr.write(f"error: {result['error']}\n")
    return result['exit_code']


if __name__ == '__main__':
    sys.exit(main())
