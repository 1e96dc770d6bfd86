"""
实验服务 - 配置、套件注册表与产物输出

每个套件在具体实例上执行一次端到端的性质检查，写出 CSV/JSON 产物
与 manifest，并返回 SuiteResult。
"""

import logging
import os
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from ..conjugation import clconv, conjugate_bruteforce, conjugate_fast, hull_mask, j_transform
from ..enlargements import (
    additivity_audit, inclusion_audit, is_eps_subgradient, transport, weak_additivity_audit,
)
from ..exceptions import PropertyViolationError, SpecValidationError
from ..fixedpoint import hat, heuristic_fixed_point, is_in_Ha, residual
from ..models.functions import AbsValue, ClosedFormConvexFunction, Quadratic
from ..models.grid import Grid
from ..models.operators import OperatorGraph
from ..numerics import subdifferential_graph
from ..representations import fenchel_young, fitzpatrick, membership_report, sigma
from ..utils.config import (
    DEFAULT_AUDIT_SAMPLES, DEFAULT_EQ_TOL, DEFAULT_OUTPUT_DIR, DEFAULT_SEED,
    HA_TOL, LOG_LEVEL_ENV, OUTPUT_DIR_ENV, SEED_ENV,
)
from ..utils.extreal import common_finite
from ..utils.io import save_function_csv, save_json
from .samplers import (
    random_bifunction, random_convex_samples, sample_eps_subdifferential,
    sample_h_enlargement, sample_t_eps_identity, spawn_generators,
)

logger = logging.getLogger(__name__)


class ExperimentConfig:
    """运行配置：输出目录、随机种子、日志级别、审计样本数"""

    def __init__(self,
                 output_dir: str = DEFAULT_OUTPUT_DIR,
                 seed: int = DEFAULT_SEED,
                 log_level: str = "INFO",
                 n_samples: int = DEFAULT_AUDIT_SAMPLES,
                 eq_tol: float = DEFAULT_EQ_TOL,
                 show_progress: bool = True):
        """
        初始化运行配置

        Args:
            output_dir: CSV/JSON 产物的输出目录
            seed: 所有随机审计的根种子
            log_level: 日志级别名称
            n_samples: 每个随机审计的样本数
            eq_tol: 成员报告的相等容差
            show_progress: 是否显示 tqdm 进度条
        """
        self.output_dir = output_dir
        self.seed = int(seed)
        self.log_level = log_level
        self.n_samples = int(n_samples)
        self.eq_tol = float(eq_tol)
        self.show_progress = show_progress

    @classmethod
    def from_env(cls) -> 'ExperimentConfig':
        """从环境变量 CONVREP_OUTPUT_DIR、CONVREP_SEED、CONVREP_LOG_LEVEL 读取配置"""
        seed = os.getenv(SEED_ENV, str(DEFAULT_SEED))
        try:
            seed = int(seed)
        except ValueError as e:
            raise SpecValidationError(SEED_ENV, f"not an integer: {seed!r}") from e
        log_level = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise SpecValidationError(LOG_LEVEL_ENV, f"unknown logging level: {log_level!r}")
        return cls(
            output_dir=os.getenv(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR),
            seed=seed,
            log_level=log_level,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'output_dir': self.output_dir,
            'seed': self.seed,
            'log_level': self.log_level,
            'n_samples': self.n_samples,
            'eq_tol': self.eq_tol,
        }


@dataclass
class ExperimentSpec:
    """一次具名套件运行及其输入与容差"""
    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    eq_tol: float = DEFAULT_EQ_TOL
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.name not in SUITES:
            raise SpecValidationError('name', unknown_suite_message(self.name))
        for key in ('grid', 'xgrid', 'sgrid'):
            if key in self.params and not isinstance(self.params[key], Grid):
                self.params[key] = Grid.from_dict(self.params[key], key)

    def to_dict(self) -> Dict[str, Any]:
        params = {k: (v.to_dict() if hasattr(v, 'to_dict') else v) for k, v in self.params.items()}
        return {
            'name': self.name, 'params': params, 'seed': self.seed,
            'eq_tol': self.eq_tol, 'output_dir': self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentSpec':
        if not isinstance(data, dict) or 'name' not in data:
            raise SpecValidationError('name', "missing")
        try:
            seed = int(data.get('seed', DEFAULT_SEED))
            eq_tol = float(data.get('eq_tol', DEFAULT_EQ_TOL))
        except (TypeError, ValueError) as e:
            raise SpecValidationError('seed', str(e)) from e
        return cls(data['name'], dict(data.get('params', {})), seed, eq_tol, data.get('output_dir'))


@dataclass
class SuiteResult:
    """单个套件的运行结果：判定、指标与已写出的产物"""
    name: str
    passed: bool
    metrics: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'passed': self.passed, 'metrics': self.metrics, 'artifacts': self.artifacts}


# ---------------------------------------------------------------------------
# standard instances
# ---------------------------------------------------------------------------

def identity_instance(lo: float = -4.0, hi: float = 4.0, n: int = 81) -> Tuple[OperatorGraph, Grid, Grid]:
    grid = Grid.uniform(lo, hi, n)
    return OperatorGraph.identity(grid.points()), grid, grid


def abs_instance() -> Tuple[OperatorGraph, Grid, Grid]:
    xgrid = Grid.uniform(-2.0, 2.0, 41)
    sgrid = Grid.uniform(-1.0, 1.0, 21)
    return subdifferential_graph(AbsValue(), xgrid, sgrid), xgrid, sgrid


class _Run:
    """单次套件运行的产物记录"""

    def __init__(self, name: str, out_dir: Path):
        self.name = name
        self.out_dir = out_dir
        self.artifacts: List[str] = []
        self.metrics: Dict[str, Any] = {}
        self.checks: Dict[str, bool] = {}

    def csv(self, function, filename: str) -> None:
        save_function_csv(function, self.out_dir / filename)
        self.artifacts.append(filename)

    def json(self, data, filename: str) -> None:
        save_json(data, self.out_dir / filename)
        self.artifacts.append(filename)

    def check(self, label: str, ok: bool) -> None:
        self.checks[label] = bool(ok)
        if not ok:
            logger.warning(f"[{self.name}] check failed: {label}")

    def result(self) -> SuiteResult:
        self.metrics['checks'] = self.checks
        return SuiteResult(self.name, all(self.checks.values()), self.metrics, self.artifacts)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def _suite_fy_fixed_point(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    grid = spec.params.get('grid') or Grid.uniform(-4.0, 4.0, 81)
    f = Quadratic()
    h = fenchel_young(f, grid)
    report = residual(h)
    T = subdifferential_graph(f, grid)
    _, trace = heuristic_fixed_point(h, T, max_iters=5)
    run.csv(h, 'h_fy.csv')
    run.json(report, 'residual.json')
    run.metrics.update(sup_abs_diff=report.sup_abs_diff, mismatch=report.finite_domain_mismatch)
    run.check('residual <= 1e-9', report.sup_abs_diff <= 1e-9)
    run.check('no finite-domain mismatch', report.finite_domain_mismatch == 0)
    run.check('heuristic stops at iteration 0', len(trace) == 1)


def _suite_fitzpatrick_identity(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    T, grid, _ = identity_instance()
    phi = fitzpatrick(T, grid)
    pts = phi.node_points()
    inner = np.all(np.abs(pts) <= 2.0 + 1e-12, axis=1)
    closed = (pts[:, 0] + pts[:, 1]) ** 2 / 4
    err = float(np.max(np.abs(phi.values.ravel()[inner] - closed[inner])))
    report = membership_report(phi, T, spec.eq_tol)
    run.csv(phi, 'phi.csv')
    run.json(report, 'membership.json')
    run.metrics['max_closed_form_error'] = err
    run.check('|phi - (x+s)^2/4| <= 3e-3 on [-2,2]^2', err <= 3e-3)
    run.check('phi in H(T)', report.verdict)


def _sandwich(run: _Run, label: str, T: OperatorGraph, f: ClosedFormConvexFunction,
              xgrid: Grid, sgrid: Grid, eq_tol: float) -> None:
    phi = fitzpatrick(T, xgrid, sgrid)
    h_fy = fenchel_young(f, xgrid, sgrid)
    sig = sigma(T, xgrid, sgrid)
    j_sig = j_transform(sig)

    lower = common_finite(phi.values, h_fy.values)
    upper = common_finite(h_fy.values, sig.values)
    gap_low = float(np.min((h_fy.values - phi.values)[lower]))
    gap_up = float(np.min((sig.values - h_fy.values)[upper])) if upper.any() else 0.0
    both = common_finite(sig.values, j_sig.values)
    gap_j = float(np.min((sig.values - j_sig.values)[both]))

    run.metrics[label] = {'phi_le_fy': gap_low, 'fy_le_sigma': gap_up, 'sigma_ge_jsigma': gap_j}
    run.check(f'{label}: phi <= h_fy', gap_low >= -1e-9)
    run.check(f'{label}: h_fy <= sigma', gap_up >= -1e-9)
    run.check(f'{label}: sigma >= J sigma', gap_j >= -1e-9)
    for name, h in (('phi', phi), ('sigma', sig), ('J_sigma', j_sig)):
        report = membership_report(h, T, eq_tol)
        run.json(report, f'membership_{label}_{name}.json')
        run.check(f'{label}: {name} in H(T)', report.verdict)
    run.csv(sig, f'sigma_{label}.csv')


def _suite_sigma_sandwich(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    T, grid, _ = identity_instance()
    _sandwich(run, 'identity', T, Quadratic(), grid, grid, spec.eq_tol)
    T, xgrid, sgrid = abs_instance()
    _sandwich(run, 'abs', T, AbsValue(), xgrid, sgrid, spec.eq_tol)


def _suite_biconjugate_law(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    n_instances = int(spec.params.get('instances', 100))
    grid = Grid.uniform(-2.0, 2.0, 21)
    worst_law, worst_hull = -np.inf, 0.0
    for rng in tqdm(spawn_generators(spec.seed, n_instances), desc="biconjugate law",
                    disable=not config.show_progress):
        h = random_bifunction(rng, grid, grid)
        jj = j_transform(j_transform(h)).values
        finite = np.isfinite(h.values)
        worst_law = max(worst_law, float(np.max(jj[finite] - h.values[finite])))
        inside = ~hull_mask(h)
        cl = clconv(h).values
        if inside.any():
            worst_hull = max(worst_hull, float(np.max(np.abs(cl[inside] - jj[inside]))))
    run.metrics.update(instances=n_instances, max_jj_minus_h=worst_law, max_clconv_jj_gap=worst_hull)
    run.check('J^2 h <= h + 1e-9', worst_law <= 1e-9)
    run.check('clconv = J^2 off the boundary mask', worst_hull <= 1e-9)


def _suite_enlargement_inclusion(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    sgrid = Grid.uniform(-4.0, 4.0, 801)
    step = float(sgrid.steps[0])
    audit = inclusion_audit(Quadratic(), 0.0, 0.5, sgrid)
    lo, hi = audit.eps_subdifferential.interval
    t_lo, t_hi = audit.t_eps.interval
    run.json(audit, 'inclusion_quadratic.json')
    run.metrics['quadratic'] = {'eps_subdifferential': [lo, hi], 't_eps': [t_lo, t_hi]}
    run.check('eps-subdifferential endpoints +-1', abs(lo + 1) <= step and abs(hi - 1) <= step)
    run.check('T^eps endpoints +-sqrt(2)', abs(t_lo + np.sqrt(2)) <= step and abs(t_hi - np.sqrt(2)) <= step)
    run.check('subset', audit.subset)
    run.check('strict', audit.strict)
    run.check('witness 1.2', any(abs(w[0] - 1.2) <= 1e-9 for w in audit.witnesses))

    exact = inclusion_audit(Quadratic(), 0.0, 0.0, sgrid)
    run.check('eps = 0: equal sets', exact.subset and not exact.strict)

    kink = inclusion_audit(AbsValue(), 1.0, 0.1, sgrid)
    run.json(kink, 'inclusion_abs.json')
    run.metrics['abs'] = {'strict': kink.strict, 'n_witnesses': len(kink.witnesses)}
    run.check('|x| subset', kink.subset)


def _suite_transport_closure(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    n = config.n_samples
    rngs = spawn_generators(spec.seed, 4)
    for k, f in enumerate((Quadratic(), AbsValue())):
        batch = sample_eps_subdifferential(f, 2 * n, rngs[2 * k])
        weights = rngs[2 * k + 1].uniform(0.0, 1.0, size=n)
        worst_eps, closure_failures = np.inf, 0
        for i in tqdm(range(n), desc=f"transport {f.kind.value}", disable=not config.show_progress):
            j = n + i
            p = float(weights[i])
            res = transport(
                (batch.x[i], batch.xstar[i], batch.eps[i]),
                (batch.x[j], batch.xstar[j], batch.eps[j]),
                p, 1.0 - p, f=f,
            )
            worst_eps = min(worst_eps, res.epsbar)
            if not is_eps_subgradient(f, res.xbar, res.xsbar, max(res.epsbar, 0.0)):
                closure_failures += 1
        run.metrics[f.kind.value] = {'trials': n, 'min_epsbar': worst_eps, 'closure_failures': closure_failures}
        run.check(f'{f.kind.value}: epsbar >= -1e-12', worst_eps >= -1e-12)
        run.check(f'{f.kind.value}: transported pair is a member', closure_failures == 0)


def _suite_additivity(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    n = config.n_samples
    rngs = spawn_generators(spec.seed, 3)
    graph = OperatorGraph.identity(Grid.uniform(-4.0, 4.0, 801).points())

    strong_fy = additivity_audit(sample_eps_subdifferential(Quadratic(), n, rngs[0]))
    weak_t = weak_additivity_audit(sample_t_eps_identity(n, rngs[1], graph))
    strong_t = additivity_audit(sample_t_eps_identity(n, rngs[2], graph, eps=1.0))
    rechecked = weak_additivity_audit([
        (w['x'], w['xstar'], w['eps']) for w in strong_t.witness_pair
    ])

    for label, audit in (('eps_subdifferential_additivity', strong_fy),
                         ('t_eps_weak_additivity', weak_t),
                         ('t_eps_additivity', strong_t),
                         ('witness_weak_recheck', rechecked)):
        run.json(audit, f'{label}.json')
        run.metrics[label] = audit.worst_margin
    run.check('eps-subdifferential is additive', strong_fy.worst_margin >= -1e-12)
    run.check('T^eps is weakly additive', weak_t.worst_margin >= -1e-12)
    run.check('T^eps additivity witness below -1e-6', strong_t.worst_margin < -1e-6)
    run.check('witness passes the weak bound', rechecked.worst_margin >= -1e-12)


def _suite_representation_additivity(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    T, grid, _ = identity_instance()
    n = int(spec.params.get('samples', config.n_samples))
    phi = fitzpatrick(T, grid)
    candidates = (
        ('hat_phi', hat(phi), True),
        ('h_fy', fenchel_young(Quadratic(), grid), True),
        ('sigma', sigma(T, grid), True),
        ('phi', phi, False),
    )
    rngs = spawn_generators(spec.seed, len(candidates))
    for (label, h, expected), rng in zip(candidates, rngs):
        in_ha = is_in_Ha(h, HA_TOL)
        audit = additivity_audit(sample_h_enlargement(h, n, rng), threshold=-HA_TOL)
        run.json(audit, f'sublevel_additivity_{label}.json')
        run.metrics[label] = {'in_Ha': in_ha, 'worst_margin': audit.worst_margin}
        run.check(f'{label}: h >= Jh is {expected}', in_ha == expected)
        run.check(f'{label}: sublevel additive is {expected}', audit.passed == expected)


def _suite_hat_construction(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    for label, f in (('identity', Quadratic()), ('abs', AbsValue())):
        T, xgrid, sgrid = identity_instance() if label == 'identity' else abs_instance()
        phi = fitzpatrick(T, xgrid, sgrid)
        for name, h in (('phi', phi), ('h_fy', fenchel_young(f, xgrid, sgrid))):
            h_hat = hat(h)
            report = membership_report(h_hat, T, spec.eq_tol)
            run.json(report, f'membership_hat_{label}_{name}.json')
            run.check(f'{label}: hat({name}) in H(T)', report.verdict)
            run.check(f'{label}: hat({name}) in H_a(T)', is_in_Ha(h_hat, 1e-9))
        if label == 'identity':
            h_hat = hat(phi)
            sig = sigma(T, xgrid, sgrid)
            diagonal = np.eye(xgrid.size, dtype=bool)
            diag_err = float(np.max(np.abs(h_hat.values[diagonal] - sig.values[diagonal])))
            pi = xgrid.points() @ sgrid.points().T
            off_gap = float(np.min((h_hat.values - pi)[~diagonal]))
            run.csv(h_hat, 'hat_phi_identity.csv')
            run.metrics['identity'] = {'diagonal_error': diag_err, 'min_off_diagonal_excess': off_gap}
            run.check('hat(phi) = sigma on the diagonal', diag_err <= 1e-6)
            run.check('hat(phi) > pi off the diagonal', off_gap > spec.eq_tol)


def _suite_fast_conjugate(run: _Run, spec: ExperimentSpec, config: ExperimentConfig) -> None:
    n_instances = int(spec.params.get('instances', 100))
    grid = Grid.uniform(-2.0, 2.0, 201)
    mismatches = 0
    for rng in spawn_generators(spec.seed, n_instances):
        f = random_convex_samples(rng, grid)
        fast = conjugate_fast(f)
        brute = conjugate_bruteforce(f)
        if not (np.array_equal(fast.function.values, brute.function.values)
                and np.array_equal(fast.argmax_index, brute.argmax_index)):
            mismatches += 1
    run.metrics.update(instances=n_instances, mismatches=mismatches)
    run.check('fast conjugate equals brute force', mismatches == 0)


SuiteFn = Callable[[_Run, ExperimentSpec, ExperimentConfig], None]

SUITES: Dict[str, Tuple[str, SuiteFn]] = {
    'additivity': ("additivity of eps-subdifferentials vs weak additivity of T^eps",
                   _suite_additivity),
    'biconjugate-law': ("J^2 h <= h on random bifunctions; clconv = J^2 off the boundary mask",
                        _suite_biconjugate_law),
    'enlargement-inclusion': ("eps-subdifferential inside T^eps, strict for x^2/2",
                              _suite_enlargement_inclusion),
    'fast-conjugate': ("linear-time conjugate equals brute force on convex samples",
                       _suite_fast_conjugate),
    'fitzpatrick-identity': ("Fitzpatrick function of the identity against (x+s)^2/4",
                             _suite_fitzpatrick_identity),
    'fy-fixed-point': ("Fenchel-Young function of x^2/2 is a fixed point of J",
                       _suite_fy_fixed_point),
    'hat-construction': ("max(h, Jh) lies in H_a(T) for phi_T and h_FY",
                         _suite_hat_construction),
    'representation-additivity': ("sublevel enlargements of h are additive when h >= Jh",
                                  _suite_representation_additivity),
    'sigma-sandwich': ("phi_T <= h_FY <= sigma_T and sigma_T >= J sigma_T",
                       _suite_sigma_sandwich),
    'transport-closure': ("transportation formula keeps eps-subgradients closed",
                          _suite_transport_closure),
}


def registry() -> List[Tuple[str, str]]:
    """按字母顺序排列的全部套件 (名称, 描述)"""
    return sorted((name, desc) for name, (desc, _) in SUITES.items())


def unknown_suite_message(name: str) -> str:
    return f"unknown suite {name!r} (valid: {', '.join(n for n, _ in registry())})"


class ExperimentService:
    """
    实验服务类 - 运行套件并写出产物与 manifest
    """

    def __init__(self, config: Optional[ExperimentConfig] = None):
        self.config = config or ExperimentConfig.from_env()

    def output_dir(self, name: str, spec: Optional[ExperimentSpec] = None) -> Path:
        base = Path(spec.output_dir) if spec and spec.output_dir else Path(self.config.output_dir)
        return base / name

    def run_suite(self, name: str, spec: Optional[ExperimentSpec] = None) -> SuiteResult:
        """
        运行一个已注册的套件

        Args:
            name: 已注册的套件名称
            spec: 输入与容差，默认使用配置中的种子

        Returns:
            SuiteResult；产物与 manifest.json 写入 <output_dir>/<name>
        """
        if name not in SUITES:
            raise SpecValidationError('suite', unknown_suite_message(name))
        spec = spec or ExperimentSpec(name, seed=self.config.seed, eq_tol=self.config.eq_tol)
        out_dir = self.output_dir(name, spec)
        out_dir.mkdir(parents=True, exist_ok=True)

        started = datetime.now()
        run = _Run(name, out_dir)
        _, suite = SUITES[name]
        logger.info(f"Running suite {name} (seed={spec.seed})")
        suite(run, spec, self.config)
        result = run.result()
        self.write_manifest(out_dir, name, result.artifacts, spec, started, result.to_dict())
        logger.info(f"Suite {name}: {'PASSED' if result.passed else 'FAILED'}")
        return result

    def write_manifest(self, out_dir: Path, command: str, artifacts: List[str],
                       spec: Optional[ExperimentSpec] = None, started: Optional[datetime] = None,
                       result: Optional[Dict[str, Any]] = None) -> Path:
        """
        写出 manifest.json

        Args:
            out_dir: 输出目录
            command: 命令或套件名称
            artifacts: 已写出的产物文件名
            spec: 本次运行的输入，缺省时记录配置中的种子
            started: 开始时间
            result: 套件结果字典
        """
        manifest = {
            'command': command,
            'seed': spec.seed if spec else self.config.seed,
            'config': self.config.to_dict(),
            'spec': spec.to_dict() if spec else None,
            'artifacts': artifacts,
            'started': (started or datetime.now()).isoformat(),
            'finished': datetime.now().isoformat(),
            'result': result,
        }
        return save_json(manifest, out_dir / 'manifest.json')


def require_passed(result: SuiteResult) -> SuiteResult:
    """套件未通过时抛出 PropertyViolationError，并列出失败的检查项"""
    if not result.passed:
        failed = [k for k, ok in result.metrics.get('checks', {}).items() if not ok]
        raise PropertyViolationError(f"suite {result.name} failed: {'; '.join(failed)}", report=result.to_dict())
    return result
