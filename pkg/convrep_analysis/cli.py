"""
Command-line front end

Every subcommand reads JSON problem descriptions, writes CSV/JSON artifacts
plus a manifest.json to the output directory and returns an exit code:
0 on success, 1 on validation errors, 2 when a checked property fails.
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .core.conjugation import conjugate_bruteforce, conjugate_fast, j_transform_result
from .core.enlargements import (
    additivity_audit, eps_subdifferential, enlargement_from_h, t_eps, transport,
    weak_additivity_audit,
)
from .core.exceptions import ConvRepError, PropertyViolationError, SpecValidationError
from .core.fixedpoint import heuristic_fixed_point, residual
from .core.models.functions import AbsValue, ClosedFormConvexFunction, Quadratic
from .core.models.grid import Bifunction, Grid
from .core.models.operators import OperatorGraph
from .core.representations import fitzpatrick, membership_report, sigma
from .core.services.experiment_service import (
    ExperimentConfig, ExperimentService, ExperimentSpec, registry, require_passed,
)
from .core.services.samplers import sample_eps_subdifferential, sample_t_eps_identity, spawn_generators
from .core.utils.config import DEFAULT_EQ_TOL, DEFAULT_MAX_ITERS, DEFAULT_STOP_TOL
from .core.utils.io import load_json, save_function_csv, save_json, save_jsonl

logger = logging.getLogger(__name__)

SUBCOMMANDS = ['conjugate', 'jtransform', 'fitzpatrick', 'sigma', 'verify',
               'residual', 'enlarge', 'transport', 'audit', 'suite']


# ---------------------------------------------------------------------------
# input loading
# ---------------------------------------------------------------------------

def _load_grid(path: Optional[str], flag: str) -> Grid:
    if not path:
        raise SpecValidationError(flag, "required")
    return Grid.from_dict(load_json(path), flag.lstrip('-'))


def _load_function(path: Optional[str]) -> ClosedFormConvexFunction:
    if not path:
        raise SpecValidationError('--f', "required")
    return ClosedFormConvexFunction.from_dict(load_json(path), 'f')


def _load_graph(path: Optional[str]) -> OperatorGraph:
    if not path:
        raise SpecValidationError('--T', "required")
    return OperatorGraph.from_dict(load_json(path))


def _load_bifunction(path: Optional[str]) -> Bifunction:
    if not path:
        raise SpecValidationError('--h', "required")
    return Bifunction.from_dict(load_json(path), 'h')


def _parse_point(text: Optional[str], flag: str) -> List[float]:
    if text is None:
        raise SpecValidationError(flag, "required")
    try:
        return [float(v) for v in text.split(',')]
    except ValueError as e:
        raise SpecValidationError(flag, f"expected comma-separated numbers, got {text!r}") from e


def _parse_triple(text: Optional[str], flag: str):
    values = _parse_point(text, flag)
    if len(values) % 2 != 1:
        raise SpecValidationError(flag, "expected x..., x*..., eps")
    d = len(values) // 2
    return values[:d], values[d:2 * d], values[-1]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

class CommandContext:
    """Output directory and manifest bookkeeping for one invocation"""

    def __init__(self, args: argparse.Namespace, config: ExperimentConfig):
        self.args = args
        self.config = config
        self.out_dir = Path(args.out or config.output_dir)
        self.artifacts: List[str] = []
        self.started = datetime.now()

    def path(self, filename: str) -> Path:
        self.artifacts.append(filename)
        return self.out_dir / filename

    def manifest(self, result: Optional[Dict[str, Any]] = None) -> None:
        ExperimentService(self.config).write_manifest(
            self.out_dir, self.args.command, self.artifacts, started=self.started, result=result,
        )


def cmd_conjugate(ctx: CommandContext) -> int:
    f = _load_function(ctx.args.f)
    grid = _load_grid(ctx.args.grid, '--grid')
    sgrid = _load_grid(ctx.args.sgrid, '--sgrid') if ctx.args.sgrid else grid
    samples = f.sample(grid)
    result = conjugate_fast(samples, sgrid) if ctx.args.fast else conjugate_bruteforce(samples, sgrid)
    save_function_csv(result.function, ctx.path('conjugate.csv'))
    logger.info(f"Conjugate of {f.kind.value} on {grid.size} nodes written")
    ctx.manifest()
    return 0


def cmd_jtransform(ctx: CommandContext) -> int:
    h = _load_bifunction(ctx.args.h)
    result = j_transform_result(h)
    save_function_csv(result.function, ctx.path('jtransform.csv'))
    ctx.manifest({'has_sentinel': result.has_sentinel})
    return 0


def cmd_fitzpatrick(ctx: CommandContext) -> int:
    T = _load_graph(ctx.args.T)
    grid = _load_grid(ctx.args.grid, '--grid')
    sgrid = _load_grid(ctx.args.sgrid, '--sgrid') if ctx.args.sgrid else grid
    save_function_csv(fitzpatrick(T, grid, sgrid), ctx.path('fitzpatrick.csv'))
    ctx.manifest()
    return 0


def cmd_sigma(ctx: CommandContext) -> int:
    T = _load_graph(ctx.args.T)
    grid = _load_grid(ctx.args.grid, '--grid')
    sgrid = _load_grid(ctx.args.sgrid, '--sgrid') if ctx.args.sgrid else grid
    save_function_csv(sigma(T, grid, sgrid), ctx.path('sigma.csv'))
    ctx.manifest()
    return 0


def cmd_verify(ctx: CommandContext) -> int:
    h = _load_bifunction(ctx.args.h)
    T = _load_graph(ctx.args.T)
    report = membership_report(h, T, ctx.args.tol)
    save_json(report, ctx.path('membership.json'))
    ctx.manifest(report.to_dict())
    if not report.verdict:
        raise PropertyViolationError(f"h is not a member of H(T): failed {', '.join(report.failures())}")
    return 0


def cmd_residual(ctx: CommandContext) -> int:
    h = _load_bifunction(ctx.args.h)
    if ctx.args.iterate:
        T = _load_graph(ctx.args.T)
        final, trace = heuristic_fixed_point(h, T, ctx.args.max_iters, ctx.args.stop_tol,
                                             show_progress=ctx.config.show_progress)
        save_jsonl(trace, ctx.path('trace.jsonl'))
        save_function_csv(final, ctx.path('fixed_point.csv'))
        ctx.manifest(trace[-1].to_dict())
        return 0
    report = residual(h)
    save_json(report, ctx.path('residual.json'))
    ctx.manifest(report.to_dict())
    return 0


def cmd_enlarge(ctx: CommandContext) -> int:
    args = ctx.args
    x = _parse_point(args.x, '--x')
    if args.eps is None:
        raise SpecValidationError('--eps', "required")
    if args.h:
        result = enlargement_from_h(_load_bifunction(args.h), x, args.eps)
    elif args.f:
        result = eps_subdifferential(_load_function(args.f), x, args.eps, _load_grid(args.grid, '--grid'))
    elif args.T:
        result = t_eps(_load_graph(args.T), x, args.eps, _load_grid(args.grid, '--grid'))
    else:
        raise SpecValidationError('--h', "one of --h, --f or --T is required")
    save_json(result, ctx.path('enlargement.json'))
    ctx.manifest({'n_members': len(result.member_indices), 'interval': result.interval})
    return 0


def cmd_transport(ctx: CommandContext) -> int:
    args = ctx.args
    f = _load_function(args.f) if args.f else None
    result = transport(_parse_triple(args.p1, '--p1'), _parse_triple(args.p2, '--p2'), args.p, args.q, f=f)
    save_json(result, ctx.path('transport.json'))
    ctx.manifest(result.to_dict())
    return 0


def _eps_range(eps: Optional[float]) -> Tuple[float, float]:
    return (0.0, 1.0) if eps is None else (eps, eps)


AUDIT_SOURCES = {
    'quadratic': lambda n, rng, eps: sample_eps_subdifferential(Quadratic(), n, rng, eps_range=_eps_range(eps)),
    'abs': lambda n, rng, eps: sample_eps_subdifferential(AbsValue(), n, rng, eps_range=_eps_range(eps)),
    'identity': lambda n, rng, eps: sample_t_eps_identity(
        n, rng, OperatorGraph.identity(Grid.uniform(-4.0, 4.0, 801).points()), eps=eps),
}


def cmd_audit(ctx: CommandContext) -> int:
    args = ctx.args
    n = ctx.config.n_samples if args.n is None else args.n
    if n < 2:
        raise SpecValidationError('--n', f"an audit needs at least 2 samples, got {n}")
    if args.eps is not None and (not np.isfinite(args.eps) or args.eps < 0):
        raise SpecValidationError('--eps', f"must be a finite number >= 0, got {args.eps}")
    rng = spawn_generators(ctx.config.seed, 1)[0]
    samples = AUDIT_SOURCES[args.source](n, rng, args.eps)
    audit_fn = weak_additivity_audit if args.property == 'weak-additivity' else additivity_audit
    result = audit_fn(samples)
    save_json(result, ctx.path('audit.json'))
    ctx.manifest(result.to_dict())
    return 0


def cmd_suite(ctx: CommandContext) -> int:
    args = ctx.args
    if args.list or not args.name:
        for name, description in registry():
            print(f"{name:24s} {description}")
        return 0
    service = ExperimentService(ctx.config)
    spec = ExperimentSpec(args.name, seed=ctx.config.seed, eq_tol=args.tol, output_dir=str(ctx.out_dir))
    require_passed(service.run_suite(args.name, spec))
    return 0


COMMANDS: Dict[str, Callable[[CommandContext], int]] = {
    'conjugate': cmd_conjugate,
    'jtransform': cmd_jtransform,
    'fitzpatrick': cmd_fitzpatrick,
    'sigma': cmd_sigma,
    'verify': cmd_verify,
    'residual': cmd_residual,
    'enlarge': cmd_enlarge,
    'transport': cmd_transport,
    'audit': cmd_audit,
    'suite': cmd_suite,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='convrep',
        description='Convex representations of monotone operators on grids',
    )
    parser.add_argument('command', choices=SUBCOMMANDS, help='Action to perform')
    parser.add_argument('name', nargs='?', help='Suite name (suite command only)')
    parser.add_argument('--list', action='store_true', help='List registered suites')
    parser.add_argument('--grid', help='Grid JSON ({"axes": [{"lo", "hi", "n"}]})')
    parser.add_argument('--sgrid', help='Dual grid JSON, defaults to --grid')
    parser.add_argument('--f', help='Closed-form function JSON ({"kind": ...})')
    parser.add_argument('--T', help='Operator graph JSON ({"points": [[x..., x*...]]})')
    parser.add_argument('--h', help='Bifunction JSON ({"xgrid", "sgrid", "values"})')
    parser.add_argument('--x', help='Query point, comma separated')
    parser.add_argument('--eps', type=float, help='Enlargement parameter')
    parser.add_argument('--p1', help='First (x, x*, eps) triple, comma separated')
    parser.add_argument('--p2', help='Second (x, x*, eps) triple, comma separated')
    parser.add_argument('--p', type=float, default=0.5, help='Weight of p1')
    parser.add_argument('--q', type=float, default=0.5, help='Weight of p2')
    parser.add_argument('--fast', action='store_true', help='Linear-time conjugate (convex 1-D samples)')
    parser.add_argument('--iterate', action='store_true', help='Run the heuristic fixed-point search')
    parser.add_argument('--max-iters', type=int, default=DEFAULT_MAX_ITERS)
    parser.add_argument('--stop-tol', type=float, default=DEFAULT_STOP_TOL)
    parser.add_argument('--property', choices=['additivity', 'weak-additivity'], default='additivity')
    parser.add_argument('--source', choices=sorted(AUDIT_SOURCES), default='quadratic')
    parser.add_argument('--n', type=int, help='Number of audit samples')
    parser.add_argument('--tol', type=float, default=DEFAULT_EQ_TOL, help='Equality tolerance')
    parser.add_argument('--seed', type=int, help='Root seed of randomized audits')
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--no-progress', action='store_true', help='Disable progress bars')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch, and map errors to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1

    try:
        config = ExperimentConfig.from_env()
        logging.getLogger().setLevel(logging.DEBUG if args.verbose else config.log_level.upper())
        if args.seed is not None:
            config.seed = args.seed
        if args.no_progress:
            config.show_progress = False
        ctx = CommandContext(args, config)
        return COMMANDS[args.command](ctx)
    except PropertyViolationError as e:
        logger.error(f"{args.command}: property violation: {e}")
        return e.exit_code
    except ConvRepError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
