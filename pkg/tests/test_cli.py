"""
CLI 模块单元测试

端到端运行 localize / bench / sweep 子命令，检查输出文件、清单与退出码。
"""

import pandas as pd
import pytest
import yaml

from conformal_drift.cli import build_parser, main, method_defaults_epilog
from conformal_drift.data import save_embedding_csv
from conformal_drift.methods import PUBLIC_METHODS, get_method


def parse_epilog(epilog: str) -> dict[str, dict[str, str]]:
    """把 "  name: k=v, k=v" 行解析为 {name: {k: v}}"""
    parsed = {}
    for line in epilog.splitlines()[1:]:
        name, _, rendered = line.strip().partition(": ")
        parsed[name] = dict(item.split("=", 1) for item in rendered.split(", "))
    return parsed


@pytest.fixture
def stream_csv(tmp_path, separable_stream):
    ds, truth = separable_stream
    return save_embedding_csv(ds, tmp_path / "stream.csv", truth)


@pytest.fixture
def sweep_yaml(tmp_path):
    """没有 methods 段，由 sweep 类型决定默认方法"""
    path = tmp_path / "sweep.yaml"
    path.write_text(
        "n_repetitions: 2\n"
        "data:\n"
        "  kind: class_swap\n"
        "  samples_per_window: 20\n"
        "  n_drifting_per_window: 3\n"
        "  dimension: 4\n",
        encoding="utf-8",
    )
    return path


class TestLocalize:
    """测试 localize 子命令"""

    def test_kdq(self, tmp_path, stream_csv):
        out = tmp_path / "out" / "scores.csv"
        code = main(["localize", "--input", str(stream_csv), "--method", "kdq", "--out", str(out), "--jobs", "1"])
        assert code == 0
        frame = pd.read_csv(out)
        assert frame.columns.tolist() == ["index", "p_or_score", "assigned"]
        assert len(frame) == 120
        assert frame["index"].tolist() == list(range(120))
        assert set(frame["assigned"]) == {1}

        manifest = yaml.safe_load((tmp_path / "out" / "scores.manifest.yaml").read_text(encoding="utf-8"))
        assert manifest["command"] == "localize"
        assert manifest["seed"] == 0
        assert manifest["config"]["method"] == "kdq"
        assert manifest["config"]["params"] == get_method("kdq").defaults()

    def test_cp_dt_with_param(self, tmp_path, stream_csv):
        out = tmp_path / "pvalues.csv"
        code = main([
            "localize", "--input", str(stream_csv), "--method", "cp-dt",
            "--param", "n_boot=5", "--seed", "3", "--out", str(out), "--jobs", "1",
        ])
        assert code == 0
        frame = pd.read_csv(out)
        assert len(frame) == 120
        assigned = frame["assigned"] == 1
        assert frame.loc[assigned, "p_or_score"].between(0.0, 1.0).all()
        manifest = yaml.safe_load((tmp_path / "pvalues.manifest.yaml").read_text(encoding="utf-8"))
        assert manifest["config"]["params"]["n_boot"] == 5
        assert manifest["seed"] == 3

    def test_same_seed_same_output(self, tmp_path, stream_csv):
        outputs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            main(["localize", "--input", str(stream_csv), "--method", "ldd", "--out", str(out), "--jobs", "1"])
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_unknown_method(self, tmp_path, stream_csv):
        with pytest.raises(SystemExit) as exc_info:
            main(["localize", "--input", str(stream_csv), "--method", "magic", "--out", str(tmp_path / "x.csv")])
        assert exc_info.value.code == 2

    def test_bad_param(self, tmp_path, stream_csv):
        out = str(tmp_path / "x.csv")
        assert main(["localize", "--input", str(stream_csv), "--method", "kdq", "--param", "depth=3", "--out", out]) == 2
        assert main(["localize", "--input", str(stream_csv), "--method", "kdq", "--param", "depth", "--out", out]) == 2

    def test_missing_input(self, tmp_path):
        code = main(["localize", "--input", str(tmp_path / "nope.csv"), "--method", "kdq", "--out", str(tmp_path / "x.csv")])
        assert code == 3

    def test_negative_seed_and_jobs(self, tmp_path, stream_csv):
        base = ["localize", "--input", str(stream_csv), "--method", "kdq", "--out", str(tmp_path / "x.csv")]
        assert main(base + ["--seed", "-1"]) == 2
        assert main(base + ["--jobs", "0"]) == 2

    def test_help_lists_method_defaults(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args(["localize", "--help"])
        assert exc_info.value.code == 0
        help_text = capsys.readouterr().out
        epilog = parse_epilog(method_defaults_epilog())
        assert list(epilog) == list(PUBLIC_METHODS)
        for name, defaults in epilog.items():
            assert f"  {name}: " in help_text
            assert defaults == {k: str(v) for k, v in get_method(name).defaults().items()}

    @pytest.mark.slow
    def test_help_defaults_match_manifest(self, tmp_path):
        """--help 中的默认值与 bench manifest 展开的默认值一致"""
        path = tmp_path / "defaults.yaml"
        sections = "".join(f"  {name}: {{}}\n" for name in PUBLIC_METHODS)
        path.write_text(
            "n_repetitions: 1\n"
            "data:\n"
            "  kind: class_swap\n"
            "  samples_per_window: 20\n"
            "  n_drifting_per_window: 3\n"
            "  dimension: 4\n"
            "methods:\n" + sections,
            encoding="utf-8",
        )
        out = tmp_path / "bench"
        code = main(["bench", "--config", str(path), "--seed", "1", "--out", str(out), "--jobs", "1", "--no-svg"])
        assert code == 0
        manifest = yaml.safe_load((out / "manifest.yaml").read_text(encoding="utf-8"))
        epilog = parse_epilog(method_defaults_epilog())
        assert list(manifest["config"]["methods"]) == list(PUBLIC_METHODS)
        for name, params in manifest["config"]["methods"].items():
            assert epilog[name] == {k: str(v) for k, v in params.items()}

    def test_epilog_covers_public_methods(self):
        epilog = method_defaults_epilog()
        for name in ("cp-dt", "cp-mlp", "split-cp", "mbdl", "rf-heur", "ldd", "kdq"):
            assert f"  {name}: " in epilog
        assert "  random:" not in epilog


class TestBench:
    """测试 bench 子命令"""

    def test_writes_outputs(self, tmp_path, bench_yaml):
        out = tmp_path / "bench"
        assert main(["bench", "--config", str(bench_yaml), "--seed", "7", "--out", str(out), "--jobs", "1"]) == 0
        for name in ("results_kdq.csv", "results_ldd.csv", "summary.csv", "boxplot.svg", "manifest.yaml"):
            assert (out / name).exists()
        summary = pd.read_csv(out / "summary.csv")
        assert summary["method"].tolist() == ["kdq", "ldd"]
        assert summary["n_repetitions"].tolist() == [3, 3]
        manifest = yaml.safe_load((out / "manifest.yaml").read_text(encoding="utf-8"))
        assert manifest["seed"] == 7
        assert manifest["config"]["methods"]["ldd"]["n_resample"] == 5

    def test_no_svg(self, tmp_path, bench_yaml):
        out = tmp_path / "bench"
        main(["bench", "--config", str(bench_yaml), "--seed", "7", "--out", str(out), "--jobs", "1", "--no-svg"])
        assert not (out / "boxplot.svg").exists()

    def test_byte_identical_across_runs_and_jobs(self, tmp_path, bench_yaml):
        config = tmp_path / "parallel.yaml"
        config.write_text(
            bench_yaml.read_text(encoding="utf-8") + "  cp-dt:\n    n_boot: 5\n",
            encoding="utf-8",
        )
        dirs = []
        for name, jobs in (("a", "1"), ("b", "1"), ("c", "4")):
            out = tmp_path / name
            assert main(["bench", "--config", str(config), "--seed", "11", "--out", str(out), "--jobs", jobs]) == 0
            dirs.append(out)
        for filename in ("results_kdq.csv", "results_ldd.csv", "results_cp-dt.csv", "summary.csv", "manifest.yaml"):
            contents = {(d / filename).read_bytes() for d in dirs}
            assert len(contents) == 1, filename

    def test_seed_required(self, tmp_path, bench_yaml):
        assert main(["bench", "--config", str(bench_yaml), "--out", str(tmp_path / "bench")]) == 2

    def test_manifest_reruns(self, tmp_path, bench_yaml):
        first = tmp_path / "first"
        second = tmp_path / "second"
        main(["bench", "--config", str(bench_yaml), "--seed", "5", "--out", str(first), "--jobs", "1", "--no-svg"])
        code = main(["bench", "--config", str(first / "manifest.yaml"), "--out", str(second), "--jobs", "1", "--no-svg"])
        assert code == 0
        for filename in ("results_kdq.csv", "results_ldd.csv", "manifest.yaml"):
            assert (first / filename).read_bytes() == (second / filename).read_bytes()

    def test_yaml_syntax_error(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("methods:\n  kdq: {min_leaf_size: 3\n", encoding="utf-8")
        assert main(["bench", "--config", str(path), "--seed", "1", "--out", str(tmp_path / "bench")]) == 2

    def test_unknown_method_in_config(self, tmp_path):
        path = tmp_path / "bench.yaml"
        path.write_text("n_repetitions: 1\nmethods:\n  magic: {}\n", encoding="utf-8")
        assert main(["bench", "--config", str(path), "--seed", "1", "--out", str(tmp_path / "bench")]) == 2


class TestSweep:
    """测试 sweep 子命令"""

    def test_bootstraps(self, tmp_path, sweep_yaml):
        out = tmp_path / "sweep"
        code = main([
            "sweep", "bootstraps", "--config", str(sweep_yaml), "--grid", "2,3",
            "--seed", "1", "--out", str(out), "--jobs", "1",
        ])
        assert code == 0
        curve = pd.read_csv(out / "curve_cp-dt.csv")
        assert curve["grid_value"].tolist() == [2, 3]
        assert (out / "curve_cp-dt.svg").exists()
        manifest = yaml.safe_load((out / "manifest.yaml").read_text(encoding="utf-8"))
        assert manifest["arguments"] == {"kind": "bootstraps", "grid": "2,3"}

    def test_splitsize_defaults_to_split_cp(self, tmp_path, sweep_yaml):
        out = tmp_path / "sweep"
        code = main([
            "sweep", "splitsize", "--config", str(sweep_yaml), "--grid", "0.5",
            "--seed", "1", "--out", str(out), "--jobs", "1", "--no-svg",
        ])
        assert code == 0
        assert len(pd.read_csv(out / "curve_split-cp.csv")) == 1

    def test_manifest_supplies_grid(self, tmp_path, sweep_yaml):
        first = tmp_path / "first"
        main([
            "sweep", "splitsize", "--config", str(sweep_yaml), "--grid", "0.4,0.6",
            "--seed", "2", "--out", str(first), "--jobs", "1", "--no-svg",
        ])
        second = tmp_path / "second"
        code = main(["sweep", "splitsize", "--config", str(first / "manifest.yaml"), "--out", str(second), "--jobs", "1", "--no-svg"])
        assert code == 0
        assert (first / "curve_split-cp.csv").read_bytes() == (second / "curve_split-cp.csv").read_bytes()

    def test_invalid_grid(self, tmp_path, sweep_yaml):
        code = main([
            "sweep", "bootstraps", "--config", str(sweep_yaml), "--grid", "2,x",
            "--seed", "1", "--out", str(tmp_path / "sweep"),
        ])
        assert code == 2

    def test_missing_grid(self, tmp_path, sweep_yaml):
        code = main(["sweep", "bootstraps", "--config", str(sweep_yaml), "--seed", "1", "--out", str(tmp_path / "s")])
        assert code == 2

    def test_method_without_parameter(self, tmp_path, bench_yaml):
        code = main([
            "sweep", "bootstraps", "--config", str(bench_yaml), "--grid", "2",
            "--seed", "1", "--out", str(tmp_path / "sweep"),
        ])
        assert code == 2
