import numpy as np
import pytest

from src.data.models import CurveAxis
from src.errors import SelectionError
from src.selection.curves import CvCurve, one_se_position, sparsest_argmin, summarize_losses


def test_summarize_ignores_non_finite_losses():
    curve = summarize_losses(np.array([[1.0, 2.0], [3.0, np.inf]]), CurveAxis.LAMBDA_INDEX)
    np.testing.assert_allclose(curve.mean_loss, [2.0, 2.0])
    np.testing.assert_allclose(curve.se_loss, [1.0, 0.0])
    np.testing.assert_array_equal(curve.n_valid_splits, [2, 1])


def test_summarize_marks_starved_positions_nan():
    curve = summarize_losses(np.array([[np.inf, 1.0]]), CurveAxis.ACTIVE_SET_INDEX)
    assert np.isnan(curve.mean_loss[0])
    assert curve.n_valid_splits[0] == 0
    assert sparsest_argmin(curve.mean_loss) == 1


def _curve(mean, se):
    m = len(mean)
    return CvCurve(CurveAxis.LAMBDA_INDEX, np.arange(m), np.asarray(mean, dtype=float),
                   np.asarray(se, dtype=float), np.ones(m, dtype=int))


def test_one_se_picks_the_largest_qualifying_lambda():
    curve = _curve([5.0, 3.0, 3.05, 4.0], [0.0, 0.1, 0.0, 0.0])
    assert sparsest_argmin(curve.mean_loss) == 1
    assert one_se_position(curve, 1) == 1
    wide = _curve([5.0, 3.2, 3.0, 4.0], [0.0, 0.0, 0.25, 0.0])
    assert one_se_position(wide, 2) == 1


def test_argmin_breaks_ties_toward_sparsity():
    values = np.array([2.0, 1.0, 1.0, 1.0])
    assert sparsest_argmin(values) == 1
    assert sparsest_argmin(values, sizes=np.array([0, 4, 2, 2])) == 2
    assert sparsest_argmin(values, eligible=np.array([True, False, False, True])) == 3


def test_argmin_without_finite_values():
    with pytest.raises(SelectionError):
        sparsest_argmin(np.array([np.inf, np.nan]))


def test_curve_frame_columns():
    curve = summarize_losses(np.ones((2, 3)), CurveAxis.LAMBDA_INDEX, lambdas=np.array([1.0, 0.5, 0.25]))
    assert list(curve.to_frame().columns) == ["position", "lambda", "mean_loss", "se_loss", "n_valid_splits"]
