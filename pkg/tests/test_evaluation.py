"""
评估模块测试：ROC-AUC、重复实验、YAML 配置、参数扫描与结果输出
"""

import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from conformal_drift.baselines import kdq_tree_localize
from conformal_drift.core import DriftGroundTruth, LocalizationResult, Orientation
from conformal_drift.data import ClassSwapSpec, NoDriftSpec, generate_stream, with_seed
from conformal_drift.errors import ConfigError, DataError, DegenerateTruthError
from conformal_drift.evaluation import (
    DataConfig,
    ExperimentConfig,
    ResultTable,
    bootstrap_sweep,
    emit_boxplot,
    emit_curve,
    emit_results,
    emit_summary,
    load_bench_config,
    parameter_sweep,
    parse_grid,
    repetition_seeds,
    result_auc,
    roc_auc,
    run_experiment,
    split_size_sweep,
    summarize_tables,
)
from conformal_drift.manifest import RunManifest


SMALL_STREAM = ClassSwapSpec(samples_per_window=20, n_drifting_per_window=3, dimension=4)


def brute_force_auc(scores, positive):
    pos = scores[positive]
    neg = scores[~positive]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (pos.size * neg.size)


class TestRocAuc:
    """测试 ROC-AUC"""

    def test_small_example(self):
        truth = DriftGroundTruth(np.array([True, True, False, False]))
        assert roc_auc([0.9, 0.4, 0.5, 0.1], truth) == 0.75

    def test_perfect_and_tied(self):
        truth = DriftGroundTruth(np.array([True, False, False]))
        assert roc_auc([3.0, 1.0, 2.0], truth) == 1.0
        assert roc_auc([1.0, 1.0, 1.0], truth) == 0.5

    def test_degenerate_truth(self):
        with pytest.raises(DegenerateTruthError):
            roc_auc([0.1, 0.2], DriftGroundTruth(np.array([True, True])))
        with pytest.raises(DegenerateTruthError):
            roc_auc([0.1, 0.2], DriftGroundTruth(np.array([False, False])))

    def test_p_value_orientation(self):
        truth = DriftGroundTruth(np.array([True, False, False]))
        assert roc_auc([0.01, 0.5, 0.9], truth, Orientation.P_VALUE) == 1.0

    def test_assigned_mask(self):
        truth = DriftGroundTruth(np.array([True, False, True, False]))
        assigned = np.array([True, True, False, True])
        # 被排除的样本分数再离谱也不影响结果
        assert roc_auc([0.9, 0.1, -100.0, 0.2], truth, assigned=assigned) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            roc_auc([0.1, 0.2, 0.3], DriftGroundTruth(np.array([True, False])))

    def test_matches_pairwise_count(self, rng):
        for _ in range(500):
            n = int(rng.integers(2, 30))
            positive = rng.random(n) < 0.3
            positive[0], positive[1] = True, False
            scores = rng.integers(0, 5, size=n).astype(np.float64)
            expected = brute_force_auc(scores, positive)
            assert roc_auc(scores, DriftGroundTruth(positive)) == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_monotone_transform_invariance(self, rng):
        positive = rng.random(60) < 0.4
        positive[:2] = [True, False]
        truth = DriftGroundTruth(positive)
        scores = rng.normal(size=60)
        assert roc_auc(scores, truth) == roc_auc(np.exp(3.0 * scores) + 7.0, truth)

    def test_complement(self, rng):
        positive = rng.random(50) < 0.5
        positive[:2] = [True, False]
        scores = rng.normal(size=50)
        a = roc_auc(scores, DriftGroundTruth(positive))
        b = roc_auc(scores, DriftGroundTruth(~positive))
        assert a + b == pytest.approx(1.0, abs=1e-12)
        p_oriented = roc_auc(scores, DriftGroundTruth(positive), Orientation.P_VALUE)
        assert a + p_oriented == pytest.approx(1.0, abs=1e-12)

    def test_result_auc_uses_assigned(self):
        result = LocalizationResult(
            values=[0.01, 0.9, 0.5, 0.02],
            orientation=Orientation.P_VALUE,
            assigned=np.array([True, True, True, False]),
        )
        truth = DriftGroundTruth(np.array([True, False, False, False]))
        assert result_auc(result, truth) == 1.0


class TestRunExperiment:
    """测试重复实验框架"""

    def test_single_repetition_matches_manual_run(self):
        config = ExperimentConfig(
            method="kdq", data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=1, seed=5
        )
        table = run_experiment(config)
        data_seed, _ = repetition_seeds(5, 0)
        ds, truth = generate_stream(with_seed(SMALL_STREAM, data_seed))
        assert table.auc[0] == result_auc(kdq_tree_localize(ds), truth)
        assert table.n_evaluated[0] == 40
        assert table.n_excluded[0] == 0

    def test_reproducible(self):
        config = ExperimentConfig(
            method="ldd", method_params={"n_resample": 5},
            data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=4, seed=2,
        )
        np.testing.assert_array_equal(run_experiment(config).auc, run_experiment(config).auc)

    def test_random_scores_average_one_half(self):
        config = ExperimentConfig(
            method="random", data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=200, seed=1
        )
        table = run_experiment(config)
        assert 0.45 <= table.summary()["mean"] <= 0.55

    def test_no_drift_gives_undefined_auc(self):
        config = ExperimentConfig(
            method="kdq", data=DataConfig(kind="no_drift", stream=NoDriftSpec(n=20, dimension=2)), n_repetitions=3
        )
        table = run_experiment(config)
        assert np.all(np.isnan(table.auc))
        assert table.n_undefined == 3
        assert np.isnan(table.summary()["mean"])

    def test_method_params_are_resolved(self):
        config = ExperimentConfig(method="kdq", method_params={"max_depth": 3})
        assert config.method_params == {"min_leaf_size": 10, "max_depth": 3}


class TestExperimentConfig:
    """测试实验配置校验"""

    def test_unknown_data_kind(self):
        with pytest.raises(ConfigError) as exc_info:
            DataConfig(kind="images")
        assert exc_info.value.field == "data.kind"

    def test_csv_requires_path(self):
        with pytest.raises(ConfigError):
            DataConfig(kind="csv")

    def test_stream_field_type(self):
        with pytest.raises(ConfigError) as exc_info:
            DataConfig.from_mapping({"kind": "class_swap", "dimension": "eight"})
        assert exc_info.value.field == "data.dimension"

    def test_repetitions_must_be_positive(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(method="kdq", n_repetitions=0)

    def test_unknown_method(self):
        with pytest.raises(ConfigError, match="kdq"):
            ExperimentConfig(method="isolation-forest")

    def test_unknown_method_param(self):
        with pytest.raises(ConfigError) as exc_info:
            ExperimentConfig(method="kdq", method_params={"depth": 3})
        assert exc_info.value.field == "methods.kdq.depth"


class TestLoadBenchConfig:
    """测试 YAML 配置读取"""

    def test_reads_file(self, bench_yaml):
        config, seed = load_bench_config(bench_yaml)
        assert seed is None
        assert config.n_repetitions == 3
        assert set(config.methods) == {"kdq", "ldd"}
        assert config.data.stream.samples_per_window == 20

    def test_unknown_key_reports_line(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text(
            "n_repetitions: 2\n"
            "data:\n"
            "  kind: class_swap\n"
            "methods:\n"
            "  kdq:\n"
            "    min_leaf_sizee: 3\n",
            encoding="utf-8",
        )
        with pytest.raises(ConfigError) as exc_info:
            load_bench_config(path)
        assert exc_info.value.line == 6
        assert exc_info.value.field == "methods.kdq.min_leaf_sizee"
        assert "line 6" in str(exc_info.value)

    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("n_repetitions: 2\nrepetitions: 3\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            load_bench_config(path, default_methods={"kdq": {}})
        assert exc_info.value.line == 2

    def test_syntax_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("methods:\n  kdq: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="YAML"):
            load_bench_config(path)

    def test_default_methods_and_repetitions(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("data:\n  kind: no_drift\n", encoding="utf-8")
        config, _ = load_bench_config(path, default_methods={"split-cp": {}}, default_repetitions=7)
        assert config.n_repetitions == 7
        assert list(config.methods) == ["split-cp"]

    def test_manifest_as_config(self, tmp_path, bench_yaml):
        config, _ = load_bench_config(bench_yaml)
        manifest = RunManifest(command="bench", config=config.to_mapping(), seed=7, version="0.1.0")
        path = manifest.write(tmp_path / "manifest.yaml")
        reloaded, seed = load_bench_config(path)
        assert seed == 7
        assert reloaded.to_mapping() == config.to_mapping()


class TestParseGrid:
    """测试扫描网格解析"""

    def test_list(self):
        assert parse_grid("10,25,50,100") == [10, 25, 50, 100]

    def test_float_range(self):
        assert parse_grid("0.2..0.9 step 0.1") == [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]

    def test_int_range(self):
        assert parse_grid("1..10 step 3") == [1, 4, 7, 10]

    def test_invalid_token(self):
        with pytest.raises(ConfigError, match="abc"):
            parse_grid("10,abc")

    def test_empty(self):
        with pytest.raises(ConfigError):
            parse_grid("")
        with pytest.raises(ConfigError):
            parse_grid("1,,2")

    def test_bad_range(self):
        with pytest.raises(ConfigError):
            parse_grid("0.9..0.2 step 0.1")


class TestSweeps:
    """测试参数扫描"""

    def test_single_point_matches_experiment(self):
        config = ExperimentConfig(
            method="kdq", data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=3, seed=4
        )
        curve = parameter_sweep(config, "max_depth", [20])
        np.testing.assert_array_equal(curve.tables[0].auc, run_experiment(config).auc)
        assert curve.grid_values == (20,)

    def test_bootstrap_sweep(self):
        config = ExperimentConfig(
            method="cp-dt", method_params={"n_boot": 2},
            data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=2,
        )
        curve = bootstrap_sweep(config, [2, 3])
        assert len(curve) == 2
        assert curve.parameter == "n_boot"
        assert curve.median.shape == (2,)

    def test_invalid_grid_values(self):
        config = ExperimentConfig(method="split-cp", n_repetitions=1)
        with pytest.raises(ConfigError):
            split_size_sweep(config, [0.5, 1.0])
        with pytest.raises(ConfigError):
            bootstrap_sweep(ExperimentConfig(method="cp-dt", n_repetitions=1), [0, 5])

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            parameter_sweep(ExperimentConfig(method="kdq", n_repetitions=1), "n_boot", [5])


def make_table(method="kdq", auc=(0.5, 0.75, 1.0)):
    auc = np.asarray(auc, dtype=np.float64)
    return ResultTable(
        method=method,
        auc=auc,
        n_evaluated=np.full(auc.size, 40),
        n_excluded=np.zeros(auc.size, dtype=np.int64),
    )


class TestReport:
    """测试结果输出"""

    def test_results_csv(self, tmp_path):
        table = make_table(auc=(0.1, 0.30000000000000004, 2 / 3))
        path = emit_results(table, tmp_path / "results.csv")
        frame = pd.read_csv(path, float_precision="round_trip")
        assert len(frame) == 3 + 4
        assert frame["rep"].tolist()[3:] == ["mean", "median", "q25", "q75"]
        assert frame["auc"].tolist()[:3] == [0.1, 0.30000000000000004, 2 / 3]
        assert b"\r" not in path.read_bytes()

    def test_results_csv_is_byte_stable(self, tmp_path):
        table = make_table()
        a = emit_results(table, tmp_path / "a.csv").read_bytes()
        b = emit_results(table, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_boxplot_is_svg(self, tmp_path):
        path = emit_boxplot([make_table("kdq"), make_table("ldd", (0.2, np.nan, 0.4))], tmp_path / "box.svg")
        assert ET.parse(path).getroot().tag.endswith("svg")

    def test_results_svg(self, tmp_path):
        path = emit_results(make_table(), tmp_path / "results.svg", format="svg")
        assert ET.parse(path).getroot().tag.endswith("svg")

    def test_empty_table(self, tmp_path):
        with pytest.raises(DataError):
            emit_results(make_table(auc=()), tmp_path / "results.csv")
        with pytest.raises(DataError):
            emit_boxplot([], tmp_path / "box.svg")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigError):
            emit_results(make_table(), tmp_path / "results.png", format="png")

    def test_summary(self, tmp_path):
        tables = [make_table("kdq"), make_table("ldd", (np.nan, 0.5))]
        frame = summarize_tables(tables)
        assert frame["method"].tolist() == ["kdq", "ldd"]
        assert frame["mean"].tolist() == [0.75, 0.5]
        assert frame["n_undefined"].tolist() == [0, 1]
        path = emit_summary(tables, tmp_path / "summary.csv")
        assert pd.read_csv(path)["n_repetitions"].tolist() == [3, 2]

    def test_curve_outputs(self, tmp_path):
        config = ExperimentConfig(
            method="kdq", data=DataConfig(kind="class_swap", stream=SMALL_STREAM), n_repetitions=2
        )
        curve = parameter_sweep(config, "min_leaf_size", [5, 10])
        frame = pd.read_csv(emit_curve(curve, tmp_path / "curve.csv"))
        assert frame.columns.tolist() == ["grid_value", "median_auc", "q25", "q75"]
        assert frame["grid_value"].tolist() == [5, 10]
        svg = emit_curve(curve, tmp_path / "curve.svg", format="svg")
        assert ET.parse(svg).getroot().tag.endswith("svg")
