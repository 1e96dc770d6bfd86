import json

import numpy as np
import pytest

from convrep_analysis.core.exceptions import InvalidParameterError, PropertyViolationError, SpecValidationError
from convrep_analysis.core.models import AbsValue, Bifunction, Grid, GridFunction, IndicatorPoint, Quadratic
from convrep_analysis.core.services.experiment_service import (
    SUITES, ExperimentConfig, ExperimentService, ExperimentSpec, SuiteResult, registry, require_passed,
    unknown_suite_message,
)
from convrep_analysis.core.services.samplers import (
    random_bifunction, random_convex_samples, sample_eps_subdifferential, sample_h_enlargement,
    sample_t_eps_identity, spawn_generators, t_eps_grid_members,
)
from convrep_analysis.core.utils.io import (
    function_frame, load_function_values, load_json, load_jsonl, save_function_csv, save_json,
    save_jsonl, save_records_csv, to_jsonable,
)


class TestSamplers:
    def test_spawned_generators_are_reproducible(self):
        a = [g.uniform() for g in spawn_generators(9, 3)]
        b = [g.uniform() for g in spawn_generators(9, 3)]
        assert a == b
        assert len(set(a)) == 3

    def test_quadratic_members_are_exact(self):
        f = Quadratic(a=2.0, b=-1.0)
        batch = sample_eps_subdifferential(f, 200, np.random.default_rng(0))
        assert len(batch) == 200
        gap = f.evaluate(batch.x[:, 0]) + f.conjugate(batch.xstar[:, 0]) - batch.x[:, 0] * batch.xstar[:, 0]
        assert np.all(gap <= batch.eps)
        assert batch.source == "eps_subdifferential:quadratic"

    def test_abs_members_are_exact(self):
        batch = sample_eps_subdifferential(AbsValue(), 200, np.random.default_rng(1))
        x, s = batch.x[:, 0], batch.xstar[:, 0]
        assert np.all(np.abs(s) <= 1.0)
        assert np.all(np.abs(x) - x * s <= batch.eps)

    def test_unsupported_function(self):
        with pytest.raises(InvalidParameterError):
            sample_eps_subdifferential(IndicatorPoint(0.0), 10, np.random.default_rng(0))

    def test_identity_members_with_fixed_eps(self, identity_case):
        T, _, _ = identity_case
        batch = sample_t_eps_identity(100, np.random.default_rng(2), T, eps=0.25)
        assert np.all(batch.eps == 0.25)
        assert np.all(np.abs(batch.xstar - batch.x) <= 1.0 + 1e-12)

    def test_grid_members(self, identity_case):
        T, xgrid, sgrid = identity_case
        batch = t_eps_grid_members(T, 0.0, xgrid, sgrid)
        # eps = 0 leaves the diagonal and the adjacent band
        assert len(batch) == 81 + 2 * 80

    def test_h_enlargement_members_sit_on_the_sublevel(self, grid81):
        h = Bifunction(grid81, grid81, np.where(np.eye(81, dtype=bool), 1.0, np.inf))
        batch = sample_h_enlargement(h, 50, np.random.default_rng(3), extra_range=(0.0, 0.5))
        assert batch.source == "h_sublevel"
        np.testing.assert_array_equal(batch.x, batch.xstar)
        gap = 1.0 - batch.x[:, 0] * batch.xstar[:, 0]
        assert np.all(gap <= batch.eps)
        assert np.all(batch.eps >= 0.0)

    def test_h_enlargement_tightest_level(self, grid81):
        h = Bifunction(grid81, grid81, np.full((81, 81), 100.0))
        batch = sample_h_enlargement(h, 20, np.random.default_rng(0))
        np.testing.assert_allclose(batch.eps, 100.0 - batch.x[:, 0] * batch.xstar[:, 0])

    def test_random_bifunction_is_proper(self):
        grid = Grid.uniform(-1.0, 1.0, 3)
        h = random_bifunction(np.random.default_rng(0), grid, grid, inf_fraction=1.0)
        assert h.is_proper
        assert np.isfinite(h.values).sum() == 1

    def test_random_convex_samples_are_convex(self):
        grid = Grid.uniform(-2.0, 2.0, 51)
        v = random_convex_samples(np.random.default_rng(4), grid).values
        assert np.all(v[:-2] + v[2:] - 2 * v[1:-1] >= -1e-12)


class TestIO:
    def test_jsonable_infinities(self):
        data = to_jsonable({'a': np.array([1.0, np.inf]), 'b': np.float64(-np.inf), 'c': np.int64(3), 'd': np.bool_(True)})
        assert data == {'a': [1.0, 'inf'], 'b': '-inf', 'c': 3, 'd': True}

    def test_json_round_trip(self, tmp_path):
        path = save_json({'x': [np.inf]}, tmp_path / 'sub' / 'a.json')
        assert load_json(path) == {'x': ['inf']}

    def test_missing_json(self, tmp_path):
        with pytest.raises(SpecValidationError):
            load_json(tmp_path / 'missing.json')

    def test_malformed_json(self, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text('{"x": ', encoding='utf-8')
        with pytest.raises(SpecValidationError):
            load_json(path)

    def test_jsonl(self, tmp_path):
        path = save_jsonl([{'k': 1}, {'k': np.inf}], tmp_path / 'trace.jsonl')
        assert load_jsonl(path) == [{'k': 1}, {'k': 'inf'}]

    def test_bifunction_csv_keeps_full_precision(self, tmp_path):
        grid = Grid.uniform(-1.0, 1.0, 3)
        values = np.array([[0.1, np.inf, 1 / 3], [2.0, 3.0, 4.0], [5.0, 6.0, np.inf]])
        path = save_function_csv(Bifunction(grid, grid, values), tmp_path / 'h.csv')
        np.testing.assert_array_equal(load_function_values(path).reshape(3, 3), values)

    def test_frame_columns(self):
        grid = Grid.uniform(-1.0, 1.0, 3, dim=2)
        assert list(function_frame(GridFunction(grid, np.zeros(9))).columns) == ['x1', 'x2', 'value']
        h = Bifunction(grid, grid, np.zeros((9, 9)))
        assert list(function_frame(h).columns) == ['x1', 'x2', 'xstar1', 'xstar2', 'value']

    def test_records_csv(self, tmp_path):
        path = save_records_csv([{'iteration': 0, 'sup_abs_diff': np.inf}], tmp_path / 'r.csv')
        assert path.read_text(encoding='utf-8').splitlines() == ['iteration,sup_abs_diff', '0,inf']


class TestExperimentConfig:
    def test_from_env(self, monkeypatch):
        monkeypatch.setenv('CONVREP_OUTPUT_DIR', '/tmp/convrep')
        monkeypatch.setenv('CONVREP_SEED', '17')
        monkeypatch.setenv('CONVREP_LOG_LEVEL', 'DEBUG')
        config = ExperimentConfig.from_env()
        assert (config.output_dir, config.seed, config.log_level) == ('/tmp/convrep', 17, 'DEBUG')

    def test_bad_seed(self, monkeypatch):
        monkeypatch.setenv('CONVREP_SEED', 'abc')
        with pytest.raises(SpecValidationError) as exc:
            ExperimentConfig.from_env()
        assert exc.value.field == 'CONVREP_SEED'

    def test_bad_log_level(self, monkeypatch):
        monkeypatch.setenv('CONVREP_LOG_LEVEL', 'chatty')
        with pytest.raises(SpecValidationError) as exc:
            ExperimentConfig.from_env()
        assert exc.value.field == 'CONVREP_LOG_LEVEL'

    def test_log_level_is_normalized(self, monkeypatch):
        monkeypatch.setenv('CONVREP_LOG_LEVEL', 'warning')
        assert ExperimentConfig.from_env().log_level == 'WARNING'


class TestExperimentSpec:
    def test_unknown_name(self):
        with pytest.raises(SpecValidationError) as exc:
            ExperimentSpec('nope')
        assert 'fy-fixed-point' in str(exc.value)

    def test_grid_params_are_parsed(self):
        spec = ExperimentSpec.from_dict({
            'name': 'fy-fixed-point', 'seed': 3,
            'params': {'grid': {'axes': [{'lo': -1.0, 'hi': 1.0, 'n': 21}]}},
        })
        assert isinstance(spec.params['grid'], Grid)
        assert spec.to_dict()['params']['grid']['axes'][0]['n'] == 21

    def test_from_dict_requires_name(self):
        with pytest.raises(SpecValidationError):
            ExperimentSpec.from_dict({'seed': 1})


class TestRegistry:
    def test_sorted_and_complete(self):
        names = [n for n, _ in registry()]
        assert names == sorted(names)
        assert {'fy-fixed-point', 'fitzpatrick-identity', 'sigma-sandwich', 'enlargement-inclusion',
                'transport-closure', 'additivity'} <= set(names)
        assert set(names) == set(SUITES)

    def test_unknown_message_lists_names(self):
        message = unknown_suite_message('x')
        assert message.startswith("unknown suite 'x'")
        assert 'additivity' in message


class TestExperimentService:
    @pytest.mark.parametrize('name', ['fy-fixed-point', 'fitzpatrick-identity', 'enlargement-inclusion'])
    def test_deterministic_suites_pass(self, name, quiet_config, tmp_path):
        result = ExperimentService(quiet_config).run_suite(name)
        assert result.passed, result.metrics['checks']
        out = tmp_path / name
        manifest = json.loads((out / 'manifest.json').read_text(encoding='utf-8'))
        assert manifest['command'] == name
        assert manifest['seed'] == 0
        assert sorted(manifest['artifacts']) == sorted(result.artifacts)
        for artifact in result.artifacts:
            assert (out / artifact).exists()

    @pytest.mark.parametrize('name', ['transport-closure', 'additivity', 'representation-additivity'])
    def test_randomized_suites_pass(self, name, quiet_config):
        assert ExperimentService(quiet_config).run_suite(name).passed

    def test_small_fast_conjugate_run(self, quiet_config):
        spec = ExperimentSpec('fast-conjugate', params={'instances': 10})
        result = ExperimentService(quiet_config).run_suite('fast-conjugate', spec)
        assert result.passed
        assert result.metrics['instances'] == 10

    def test_seed_reproducibility(self, quiet_config):
        service = ExperimentService(quiet_config)
        first = service.run_suite('additivity').metrics
        second = service.run_suite('additivity').metrics
        assert first == second

    def test_representation_additivity_verdicts(self, quiet_config):
        metrics = ExperimentService(quiet_config).run_suite('representation-additivity').metrics
        for label in ('hat_phi', 'h_fy', 'sigma'):
            assert metrics[label]['in_Ha'] is True
            assert metrics[label]['worst_margin'] >= -1e-9
        assert metrics['phi']['in_Ha'] is False
        assert metrics['phi']['worst_margin'] < -1e-6

    def test_same_seed_writes_identical_csv(self, tmp_path):
        paths = []
        for run_dir in ('first', 'second'):
            config = ExperimentConfig(output_dir=str(tmp_path / run_dir), seed=5, show_progress=False)
            ExperimentService(config).run_suite('fy-fixed-point')
            paths.append(tmp_path / run_dir / 'fy-fixed-point' / 'h_fy.csv')
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_unknown_suite(self, quiet_config):
        with pytest.raises(SpecValidationError):
            ExperimentService(quiet_config).run_suite('nope')

    def test_require_passed(self):
        ok = SuiteResult('a', True)
        assert require_passed(ok) is ok
        with pytest.raises(PropertyViolationError) as exc:
            require_passed(SuiteResult('b', False, {'checks': {'first': True, 'second': False}}))
        assert 'second' in str(exc.value) and 'first' not in str(exc.value)
