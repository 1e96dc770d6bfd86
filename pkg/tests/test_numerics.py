import math

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from convrep_analysis.core.exceptions import (
    ConvRepError, DimensionMismatchError, GraphOffGridError, GridError, SpecValidationError,
)
from convrep_analysis.core.models import AbsValue, Axis, Bifunction, Grid, GridFunction, OperatorGraph, Quadratic
from convrep_analysis.core.models.functions import ClosedFormConvexFunction, IndicatorPoint, SeparableSum
from convrep_analysis.core.numerics import (
    check_monotone, graph_margin, graph_mask, indicator_of_graph, pairing, pi_bifunction,
    sample_function, subdifferential_graph,
)
from convrep_analysis.core.utils.extreal import format_extreal, ge_with_inf, has_sentinel, is_proper, parse_extreal
from convrep_analysis.core.utils.hull import in_convex_hull

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@seed(1)
@given(
    x=arrays(np.float64, (2,), elements=finite),
    y=arrays(np.float64, (2,), elements=finite),
    s=arrays(np.float64, (2,), elements=finite),
    a=finite,
)
def test_pairing_is_bilinear(x, y, s, a):
    lhs = pairing(a * x + y, s)
    rhs = a * pairing(x, s) + pairing(y, s)
    assert math.isclose(lhs, rhs, rel_tol=1e-9, abs_tol=1e-6)
    assert pairing(x, s) == pytest.approx(pairing(s, x))


def test_pairing_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        pairing([1.0, 2.0], [1.0])


class TestGrid:
    def test_axis_rejects_bad_bounds(self):
        with pytest.raises(GridError):
            Axis(1.0, 1.0, 5)
        with pytest.raises(GridError):
            Axis(0.0, 1.0, 1)
        with pytest.raises(GridError):
            Axis(0.0, math.inf, 3)

    def test_points_hit_both_ends(self):
        pts = Grid.uniform(-4.0, 4.0, 81).points()[:, 0]
        assert pts[0] == -4.0 and pts[-1] == 4.0
        assert pts[40] == pytest.approx(0.0, abs=1e-12)

    def test_two_dimensional_points_are_row_major(self):
        grid = Grid.uniform(0.0, 1.0, 3, dim=2)
        pts = grid.points()
        assert pts.shape == (9, 2)
        np.testing.assert_allclose(pts[1], [0.0, 0.5])
        np.testing.assert_allclose(pts[3], [0.5, 0.0])

    def test_snap_and_require_node(self, grid81):
        assert grid81.snap([0.1]) == 41
        assert grid81.snap([0.05]) is None
        with pytest.raises(GridError):
            grid81.require_node([0.05])
        with pytest.raises(DimensionMismatchError):
            grid81.snap([0.0, 0.0])

    def test_refined_keeps_nodes(self, grid81):
        fine = grid81.refined(2)
        assert fine.size == 161
        assert fine.snap([0.1]) is not None

    def test_dimension_three_is_rejected(self):
        with pytest.raises(GridError):
            Grid.uniform(0.0, 1.0, 3, dim=3)

    def test_from_dict_names_field(self):
        with pytest.raises(SpecValidationError) as exc:
            Grid.from_dict({'axes': [{'lo': 0.0, 'hi': 1.0}]}, 'xgrid')
        assert exc.value.field == 'xgrid.axes[0].n'


class TestExtendedReals:
    def test_parse_literals(self):
        assert parse_extreal('inf') == math.inf
        assert parse_extreal('+Infinity') == math.inf
        assert parse_extreal('-inf') == -math.inf
        assert parse_extreal(' 2.5 ') == 2.5

    def test_parse_rejects_nan(self):
        with pytest.raises(ConvRepError):
            parse_extreal(float('nan'))

    def test_format_literals(self):
        assert format_extreal(math.inf) == 'inf'
        assert format_extreal(-math.inf) == '-inf'
        assert format_extreal(1.5) == 1.5

    def test_ge_with_inf(self):
        ok = ge_with_inf(np.array([np.inf, 1.0, 0.0]), np.array([np.inf, 1.0 + 1e-12, 1.0]), tol=1e-9)
        assert ok.tolist() == [True, True, False]

    def test_proper_and_sentinel(self):
        assert is_proper(np.array([np.inf, 0.0]))
        assert not is_proper(np.array([np.inf, np.inf]))
        assert not is_proper(np.array([-np.inf, 0.0]))
        assert has_sentinel(np.array([1.0, -np.inf]))
        assert not has_sentinel(np.array([1.0, np.inf]))

    def test_grid_function_rejects_nan(self, grid81):
        values = np.zeros(grid81.size)
        values[3] = np.nan
        with pytest.raises(ConvRepError):
            GridFunction(grid81, values)


class TestBifunction:
    def test_shape_and_value_at(self, grid81):
        pi = pi_bifunction(grid81, grid81)
        assert pi.shape == (81, 81)
        assert pi.value_at([2.0], [-1.5]) == pytest.approx(-3.0)

    def test_dict_round_trip_keeps_infinities(self):
        grid = Grid.uniform(-1.0, 1.0, 3)
        values = np.array([[0.0, np.inf, 1.0], [np.inf, 2.0, 3.0], [4.0, 5.0, np.inf]])
        h = Bifunction(grid, grid, values)
        data = h.to_dict()
        assert data['values'][0][1] == 'inf'
        back = Bifunction.from_dict(data)
        np.testing.assert_array_equal(back.values, values)
        assert back.same_grids(h)

    def test_wrong_sample_count(self, grid81):
        with pytest.raises(GridError):
            Bifunction(grid81, grid81, np.zeros(10))

    def test_mixed_dimensions(self, grid81):
        with pytest.raises(DimensionMismatchError):
            Bifunction(grid81, Grid.uniform(0.0, 1.0, 3, dim=2), np.zeros(81 * 9))


class TestOperatorGraph:
    def test_duplicates_rejected(self):
        with pytest.raises(SpecValidationError):
            OperatorGraph(np.array([[0.0], [0.0]]), np.array([[1.0], [1.0]]))

    def test_from_pairs_merges_duplicates(self):
        T = OperatorGraph.from_pairs([([0.0], [1.0]), ([0.0], [1.0]), ([1.0], [2.0])])
        assert len(T) == 2

    def test_from_dict_requires_even_columns(self):
        with pytest.raises(SpecValidationError):
            OperatorGraph.from_dict({'points': [[0.0, 1.0, 2.0]]})

    def test_identity_is_monotone(self, identity_case):
        T, _, _ = identity_case
        assert check_monotone(T) == []

    def test_decreasing_graph_violations(self):
        T = OperatorGraph.from_pairs([([0.0], [1.0]), ([1.0], [0.0]), ([2.0], [-1.0])])
        violations = check_monotone(T)
        assert len(violations) == 3
        worst = min(violations, key=lambda v: v.value)
        assert (worst.i, worst.j) == (0, 2)
        assert worst.value == pytest.approx(-4.0)


class TestGraphOnGrid:
    def test_indicator_of_identity(self, identity_case):
        T, xgrid, sgrid = identity_case
        delta = indicator_of_graph(T, xgrid, sgrid)
        assert np.isfinite(delta.values).sum() == 81
        assert np.all(np.diag(delta.values) == 0.0)

    def test_off_grid_graph(self, grid81):
        T = OperatorGraph.from_pairs([([0.05], [0.05])])
        with pytest.raises(GraphOffGridError) as exc:
            graph_mask(T, grid81, grid81)
        assert exc.value.off_grid == 1
        assert 'graph off grid' in str(exc.value)

    def test_strict_mask_rejects_partial_graph(self, grid81):
        T = OperatorGraph.from_pairs([([0.0], [0.0]), ([0.05], [0.05])])
        assert graph_mask(T, grid81, grid81).sum() == 1
        with pytest.raises(GraphOffGridError):
            graph_mask(T, grid81, grid81, strict=True)

    def test_abs_subdifferential_has_vertical_segment(self, abs_case):
        T, xgrid, sgrid = abs_case
        at_zero = T.xstar[np.abs(T.x[:, 0]) == 0.0][:, 0]
        assert len(at_zero) == 21
        assert at_zero.min() == -1.0 and at_zero.max() == 1.0
        # 40 nonzero x nodes plus the segment
        assert len(T) == 61
        assert check_monotone(T) == []

    def test_pi_plus_indicator_is_inf_exactly_off_graph(self, abs_case):
        T, xgrid, sgrid = abs_case
        mask = graph_mask(T, xgrid, sgrid)
        total = pi_bifunction(xgrid, sgrid).values + indicator_of_graph(T, xgrid, sgrid).values
        np.testing.assert_array_equal(np.isfinite(total), mask)
        np.testing.assert_array_equal(total[mask], pi_bifunction(xgrid, sgrid).values[mask])

    def test_graph_margin_of_identity(self, identity_case):
        T, _, _ = identity_case
        x = np.array([[0.0], [0.0], [1.0]])
        s = np.array([[0.0], [2.0], [0.0]])
        # min over y of (x - y)(s - y) = -(x - s)^2 / 4 at the midpoint
        np.testing.assert_allclose(graph_margin(T, x, s), [0.0, -1.0, -0.25], atol=1e-12)

    def test_graph_margin_shape_mismatch(self, identity_case):
        T, _, _ = identity_case
        with pytest.raises(DimensionMismatchError):
            graph_margin(T, np.zeros((2, 1)), np.zeros((3, 1)))


class TestClosedForms:
    def test_quadratic_conjugate(self):
        f = Quadratic(a=2.0, b=1.0, c=0.5)
        s = np.array([-1.0, 1.0, 3.0])
        np.testing.assert_allclose(f.conjugate(s), (s - 1.0) ** 2 / 4.0 - 0.5)

    def test_abs_conjugate_is_indicator(self):
        values = AbsValue().conjugate(np.array([-1.0, 0.3, 1.5]))
        assert values.tolist() == [0.0, 0.0, math.inf]

    def test_indicator_point_off_grid(self, grid81):
        with pytest.raises(GridError):
            IndicatorPoint(0.05).sample(grid81)

    def test_from_dict_unknown_kind(self):
        with pytest.raises(SpecValidationError) as exc:
            ClosedFormConvexFunction.from_dict({'kind': 'cosine'})
        assert 'quadratic' in str(exc.value)

    def test_negative_curvature_is_a_spec_error(self):
        with pytest.raises(SpecValidationError):
            ClosedFormConvexFunction.from_dict({'kind': 'quadratic', 'a': -1.0})

    def test_separable_sum(self):
        f = SeparableSum((Quadratic(), AbsValue()))
        grid = Grid.uniform(-1.0, 1.0, 3, dim=2)
        np.testing.assert_allclose(f.sample(grid).values, [1.5, 0.5, 1.5, 1.0, 0.0, 1.0, 1.5, 0.5, 1.5])
        assert subdifferential_graph(f, grid).dim == 2

    def test_sampled_examples(self):
        grid = Grid.uniform(-2.0, 2.0, 5)
        np.testing.assert_allclose(sample_function(Quadratic(), grid).values, [2.0, 0.5, 0.0, 0.5, 2.0])
        small = Grid.uniform(-1.0, 1.0, 3)
        assert sample_function(IndicatorPoint(0.0), small).values.tolist() == [math.inf, 0.0, math.inf]

    def test_sampled_quadratic_is_midpoint_convex(self, grid81):
        v = sample_function(Quadratic(a=3.0, b=-1.0, c=2.0), grid81).values
        assert np.all(v[:-2] + v[2:] - 2 * v[1:-1] >= -1e-12)


class TestConvexHull:
    def test_interval(self):
        mask = in_convex_hull(np.array([[0.0], [1.0]]), np.array([[0.5], [1.5], [-1e-12]]))
        assert mask.tolist() == [True, False, True]

    def test_collinear_points_in_plane(self):
        pts = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        mask = in_convex_hull(pts, np.array([[1.5, 1.5], [1.0, 0.0], [3.0, 3.0]]))
        assert mask.tolist() == [True, False, False]

    def test_triangle(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        mask = in_convex_hull(pts, np.array([[0.25, 0.25], [0.6, 0.6]]))
        assert mask.tolist() == [True, False]

    def test_single_point(self):
        mask = in_convex_hull(np.array([[1.0, 2.0]]), np.array([[1.0, 2.0], [1.0, 2.1]]))
        assert mask.tolist() == [True, False]
