"""
核心数据模型单元测试
"""

import numpy as np
import pytest

from conformal_drift.core import (
    DriftGroundTruth,
    LabeledDataset,
    LocalizationResult,
    Orientation,
    Sample,
    TimePrior,
    make_window_pair,
    time_label_prior,
)
from conformal_drift.errors import DataError


class TestMakeWindowPair:
    """测试两窗口数据集构造"""

    def test_minimal_pair(self):
        ds = make_window_pair([(0.0,)], [(1.0,)])
        assert ds.n_samples == 2
        assert ds.y.tolist() == [0, 1]
        assert ds.n_time_labels == 2

    def test_order_is_before_then_after(self):
        ds = make_window_pair([(1.0, 2.0), (3.0, 4.0)], [(5.0, 6.0)])
        np.testing.assert_array_equal(ds.X, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert ds.y.tolist() == [0, 0, 1]

    def test_sixty_per_window(self, rng):
        ds = make_window_pair(rng.normal(size=(60, 4)), rng.normal(size=(60, 4)))
        assert ds.n_samples == 120
        assert ds.label_counts().tolist() == [60, 60]

    def test_dimension_mismatch(self):
        with pytest.raises(DataError, match="维度不一致"):
            make_window_pair([(0.0, 1.0, 2.0)], [(0.0, 1.0)])

    def test_empty_window(self):
        with pytest.raises(DataError):
            make_window_pair([], [(1.0,)])
        with pytest.raises(DataError):
            make_window_pair([(1.0,)], [])


class TestTimeLabelPrior:
    """测试经验时间先验"""

    def test_balanced(self):
        prior = time_label_prior(make_window_pair([(0.0,)], [(1.0,)]))
        assert prior.probs.tolist() == [0.5, 0.5]

    def test_unbalanced(self):
        ds = LabeledDataset(X=np.zeros((4, 1)), y=np.array([0, 0, 0, 1]))
        prior = time_label_prior(ds)
        assert prior[0] == pytest.approx(0.75, abs=1e-15)
        assert prior[1] == pytest.approx(0.25, abs=1e-15)

    def test_missing_label_is_invalid_dataset(self):
        with pytest.raises(DataError, match="没有出现"):
            LabeledDataset(X=np.zeros((2, 1)), y=np.array([0, 0]), n_time_labels=2)

    def test_prior_sums_to_one(self, rng):
        for _ in range(20):
            n_labels = int(rng.integers(2, 6))
            y = np.concatenate([np.arange(n_labels), rng.integers(0, n_labels, size=37)])
            prior = time_label_prior(LabeledDataset(X=np.zeros((y.size, 1)), y=y, n_time_labels=n_labels))
            assert abs(prior.probs.sum() - 1.0) <= 1e-12
            assert np.all(prior.probs >= 0.0)


class TestDatasetInvariants:
    """测试数据集不变量"""

    def test_arrays_are_read_only(self, four_point_dataset):
        assert not four_point_dataset.X.flags.writeable
        assert not four_point_dataset.y.flags.writeable

    def test_non_finite_features(self):
        with pytest.raises(DataError, match="NaN"):
            LabeledDataset(X=np.array([[0.0], [np.nan]]), y=np.array([0, 1]))

    def test_label_out_of_range(self):
        with pytest.raises(DataError, match="超出范围"):
            LabeledDataset(X=np.zeros((3, 1)), y=np.array([0, 1, 2]), n_time_labels=2)

    def test_samples_round_trip_positions(self, four_point_dataset):
        samples = four_point_dataset.samples
        assert [s.time_label for s in samples] == [0, 0, 1, 1]
        rebuilt = LabeledDataset.from_samples(samples)
        np.testing.assert_array_equal(rebuilt.X, four_point_dataset.X)

    def test_sample_negative_label(self):
        with pytest.raises(DataError):
            Sample(features=np.zeros(2), time_label=-1)

    def test_from_samples_dimension_mismatch(self):
        with pytest.raises(DataError):
            LabeledDataset.from_samples([Sample(np.zeros(2), 0), Sample(np.zeros(3), 1)])


class TestTimePrior:
    """测试分布校验"""

    def test_sum_tolerance(self):
        with pytest.raises(DataError, match="之和"):
            TimePrior(np.array([0.5, 0.5 + 1e-9]))

    def test_negative_entry(self):
        with pytest.raises(DataError):
            TimePrior(np.array([1.5, -0.5]))


class TestGroundTruthAndResult:
    """测试真值与定位结果"""

    def test_ground_truth_from_ints(self):
        truth = DriftGroundTruth(np.array([0, 1, 1, 0]))
        assert truth.is_drifting.dtype == bool
        assert truth.n_drifting == 2

    def test_ground_truth_rejects_other_values(self):
        with pytest.raises(DataError):
            DriftGroundTruth(np.array([0, 2]))

    def test_result_defaults_to_all_assigned(self):
        result = LocalizationResult(values=[0.1, 0.2], orientation=Orientation.SCORE)
        assert result.n_assigned == 2

    def test_result_rejects_non_finite(self):
        with pytest.raises(DataError):
            LocalizationResult(values=[0.1, np.inf], orientation=Orientation.SCORE)

    def test_drift_scores_flip_p_values(self):
        result = LocalizationResult(values=[0.1, 0.9], orientation="p_value")
        assert result.orientation is Orientation.P_VALUE
        np.testing.assert_array_equal(result.drift_scores(), [-0.1, -0.9])
