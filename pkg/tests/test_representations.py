import numpy as np
import pytest

from convrep_analysis.core.conjugation import j_transform
from convrep_analysis.core.exceptions import GraphOffGridError, GridError, NonMonotoneError
from convrep_analysis.core.models import (
    AbsValue, Bifunction, Grid, GridFunction, GridSamples, OperatorGraph, Quadratic, SeparableSum,
)
from convrep_analysis.core.numerics import pi_bifunction
from convrep_analysis.core.representations import (
    conjugate_on, fenchel_young, fenchel_young_value, fitzpatrick, is_maximal_on_grid,
    membership_report, midpoint_convexity, monotone_closure, pointwise_max, sigma,
)

TOL = 1e-9


@pytest.fixture(scope="module")
def identity_reps(identity_case, quadratic):
    T, xgrid, sgrid = identity_case
    return {
        'phi': fitzpatrick(T, xgrid, sgrid),
        'fy': fenchel_young(quadratic, xgrid, sgrid),
        'sigma': sigma(T, xgrid, sgrid),
    }


class TestFenchelYoung:
    def test_half_square(self, grid81, quadratic):
        h = fenchel_young(quadratic, grid81)
        x = grid81.points()[:, 0]
        np.testing.assert_allclose(h.values, x[:, None] ** 2 / 2 + x[None, :] ** 2 / 2, atol=1e-12)

    def test_pointwise_value(self):
        assert fenchel_young_value(Quadratic(), [1.0], [2.0]) == pytest.approx(2.5)
        assert fenchel_young_value(AbsValue(), 1.0, 1.5) == np.inf

    def test_grid_samples_use_discrete_conjugate(self, grid81, quadratic):
        samples = GridSamples(quadratic.sample(grid81))
        np.testing.assert_allclose(
            conjugate_on(samples, grid81), conjugate_on(quadratic, grid81), atol=1e-12,
        )

    def test_member_for_identity(self, identity_case, identity_reps):
        T, _, _ = identity_case
        report = membership_report(identity_reps['fy'], T)
        assert report.verdict, report.failures()

    def test_member_for_abs(self, abs_case):
        T, xgrid, sgrid = abs_case
        h = fenchel_young(AbsValue(), xgrid, sgrid)
        x = xgrid.points()[:, 0]
        np.testing.assert_allclose(h.values, np.repeat(np.abs(x)[:, None], sgrid.size, axis=1))
        assert membership_report(h, T).verdict

    def test_two_dimensional_member(self):
        grid = Grid.uniform(-1.0, 1.0, 5, dim=2)
        f = SeparableSum((Quadratic(), Quadratic()))
        T = OperatorGraph.identity(grid.points())
        report = membership_report(fenchel_young(f, grid), T)
        assert report.verdict, report.failures()


class TestFitzpatrick:
    def test_identity_closed_form(self, identity_case, identity_reps):
        _, xgrid, _ = identity_case
        x = xgrid.points()[:, 0]
        phi = identity_reps['phi'].values
        i, j = np.meshgrid(np.arange(81), np.arange(81), indexing='ij')
        # the midpoint (x + s)/2 is a node when i + j is even
        even = (i + j) % 2 == 0
        expected = ((x[:, None] + x[None, :]) / 2) ** 2
        np.testing.assert_allclose(phi[even], expected[even], atol=1e-9)
        assert np.all(phi <= expected + 1e-9)

    def test_minorant_gap_is_a_quarter_square(self, identity_case, identity_reps):
        _, xgrid, _ = identity_case
        x = xgrid.points()[:, 0]
        gap = identity_reps['phi'].values - x[:, None] * x[None, :]
        assert np.all(gap >= -TOL)
        assert gap[40, 60] == pytest.approx((x[40] - x[60]) ** 2 / 4, abs=1e-9)

    def test_member_for_identity(self, identity_case, identity_reps):
        T, _, _ = identity_case
        report = membership_report(identity_reps['phi'], T)
        assert report.verdict, report.failures()

    def test_sandwich(self, identity_reps):
        phi, fy, sig = identity_reps['phi'], identity_reps['fy'], identity_reps['sigma']
        assert np.all(phi.values <= fy.values + TOL)
        assert np.all(fy.values <= sig.values + TOL)

    def test_non_monotone_graph(self, grid81):
        T = OperatorGraph.from_pairs([([0.0], [1.0]), ([1.0], [0.0])])
        with pytest.raises(NonMonotoneError) as exc:
            fitzpatrick(T, grid81)
        assert len(exc.value.violations) == 1
        # the check can be switched off
        assert fitzpatrick(T, grid81, check=False).shape == (81, 81)

    def test_dimension_mismatch(self, identity_case):
        T, _, _ = identity_case
        grid = Grid.uniform(-1.0, 1.0, 3, dim=2)
        with pytest.raises(GridError):
            fitzpatrick(T, grid)


class TestSigma:
    def test_identity_is_square_on_diagonal(self, identity_case, identity_reps):
        _, xgrid, _ = identity_case
        values = identity_reps['sigma'].values
        x = xgrid.points()[:, 0]
        np.testing.assert_allclose(np.diag(values), x ** 2, atol=1e-9)
        off = ~np.eye(81, dtype=bool)
        assert np.all(np.isposinf(values[off]))

    def test_member_for_identity(self, identity_case, identity_reps):
        T, _, _ = identity_case
        assert membership_report(identity_reps['sigma'], T).verdict

    def test_j_of_sigma_is_the_quarter_square_pattern(self, identity_case, identity_reps):
        _, xgrid, _ = identity_case
        x = xgrid.points()[:, 0]
        j_sigma = j_transform(identity_reps['sigma']).values
        even = (np.add.outer(np.arange(81), np.arange(81)) % 2) == 0
        expected = ((x[:, None] + x[None, :]) / 2) ** 2
        np.testing.assert_allclose(j_sigma[even], expected[even], atol=1e-9)
        np.testing.assert_allclose(j_sigma, identity_reps['phi'].values, atol=1e-9)

    def test_off_grid_graph_is_rejected(self, grid81):
        T = OperatorGraph.from_pairs([([0.0], [0.0]), ([0.05], [0.05])])
        with pytest.raises(GraphOffGridError) as exc:
            sigma(T, grid81)
        assert exc.value.off_grid == 1


class TestMonotoneClosure:
    def test_identity_closure_is_a_band(self, identity_case):
        T, xgrid, sgrid = identity_case
        closure = monotone_closure(T, xgrid, sgrid)
        assert np.all(np.diag(closure))
        assert closure[40, 41] and not closure[40, 42]
        assert is_maximal_on_grid(T, xgrid, sgrid)

    def test_abs_graph_is_its_own_closure(self, abs_case):
        T, xgrid, sgrid = abs_case
        assert is_maximal_on_grid(T, xgrid, sgrid)

    def test_single_point_is_not_maximal(self, grid81):
        T = OperatorGraph.from_pairs([([0.0], [0.0])])
        closure = monotone_closure(T, grid81)
        # every node of the first and third quadrant is related to (0, 0)
        assert closure[60, 60] and closure[20, 20] and not closure[60, 20]
        assert not is_maximal_on_grid(T, grid81)


class TestMembership:
    def test_duality_product_fails(self, identity_case):
        T, xgrid, sgrid = identity_case
        report = membership_report(pi_bifunction(xgrid, sgrid), T)
        assert not report.verdict
        assert 'is_convex_on_grid' in report.failures()
        assert 'equality_set_matches_T' in report.failures()
        assert report.minorizes_pi.passed and report.equals_pi_on_T.passed

    def test_shifted_function_misses_graph(self, identity_case, identity_reps):
        T, _, _ = identity_case
        phi = identity_reps['phi']
        report = membership_report(phi.with_values(phi.values + 1.0), T)
        assert not report.equals_pi_on_T.passed
        assert report.equals_pi_on_T.worst == pytest.approx(1.0)
        assert report.equals_pi_on_T.count == 81

    def test_minorant_violation_reports_node(self, identity_case, identity_reps):
        T, _, _ = identity_case
        values = identity_reps['fy'].values.copy()
        values[10, 70] = -100.0
        report = membership_report(identity_reps['fy'].with_values(values), T)
        assert not report.minorizes_pi.passed
        assert report.minorizes_pi.worst_node['x'] == pytest.approx([-3.0])
        assert report.minorizes_pi.worst_node['xstar'] == pytest.approx([3.0])

    def test_report_serializes_infinities(self, identity_case, identity_reps):
        T, _, _ = identity_case
        data = membership_report(identity_reps['sigma'], T).to_dict()
        assert data['verdict'] is True
        assert set(data) >= {'is_convex_on_grid', 'minorizes_pi', 'equals_pi_on_T', 'equality_set_matches_T'}


class TestMidpointConvexity:
    def test_concave_rows_fail(self):
        grid = Grid.uniform(-1.0, 1.0, 5)
        x = grid.points()[:, 0]
        h = Bifunction(grid, grid, -x[:, None] ** 2 + np.zeros((1, 5)))
        result = midpoint_convexity(h)
        assert not result.passed
        assert result.count > 0
        assert result.worst < 0

    def test_infinite_middle_needs_infinite_side(self):
        grid = Grid.uniform(-1.0, 1.0, 3)
        values = np.zeros((3, 3))
        values[1, 1] = np.inf
        assert not midpoint_convexity(Bifunction(grid, grid, values)).passed
        values[0, 1] = np.inf
        values[1, 0] = np.inf
        values[0, 0] = np.inf
        values[0, 2] = np.inf
        assert midpoint_convexity(Bifunction(grid, grid, values)).passed

    def test_affine_passes(self, grid81):
        x = grid81.points()[:, 0]
        h = Bifunction(grid81, grid81, 2 * x[:, None] - x[None, :] + 1)
        assert midpoint_convexity(h).passed


def test_pointwise_max_requires_same_grids(grid81):
    other = Grid.uniform(-1.0, 1.0, 3)
    h = Bifunction(grid81, grid81, np.zeros((81, 81)))
    g = Bifunction(other, other, np.zeros((3, 3)))
    with pytest.raises(GridError):
        pointwise_max(h, g)
    np.testing.assert_array_equal(pointwise_max(h, h.with_values(np.ones((81, 81)))).values, 1.0)


@pytest.mark.parametrize('pair', [('phi', 'fy'), ('phi', 'j_sigma'), ('fy', 'sigma')])
def test_max_of_members_is_a_member(pair, identity_case, identity_reps):
    T, _, _ = identity_case
    reps = dict(identity_reps, j_sigma=j_transform(identity_reps['sigma']))
    report = membership_report(pointwise_max(reps[pair[0]], reps[pair[1]]), T)
    assert report.verdict, report.failures()
