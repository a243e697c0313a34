"""
實驗執行器與命令列入口的整合測試
"""

import numpy as np
import pandas as pd
import pytest

from main import main
from src.core import ConfigManager
from src.core.exceptions import ConfigError
from src.experiments import run_experiment
from src.experiments.harness import RESULT_COLUMNS, trace_path
from src.experiments.oracles import ORACLE_COLUMNS
from src.experiments.timing import OVERHEAD_LIMIT, TIMING_COLUMNS, overhead_within_limit, scaling_slope


def run_kind(config, kind, output):
    config.experiment.kind = kind
    return run_experiment(config, str(output))


class TestResultTables:
    """各實驗類型的輸出表"""

    def test_se_cdf(self, tiny_config, temp_dir):
        """測試 SE CDF 為每個 K 輸出 101 個百分位數"""
        output = temp_dir / "se_cdf.csv"
        table = run_kind(tiny_config, "se-cdf", output)
        written = pd.read_csv(output)

        assert list(written.columns) == RESULT_COLUMNS["se-cdf"]
        assert len(written) == 101 * len(tiny_config.experiment.k_values)
        for _, group in table.groupby("K"):
            assert group["se"].is_monotonic_increasing
            assert (group["se"] >= 0).all()

    @pytest.mark.parametrize("kind, axis_values", [
        ("se-vs-m", [2, 3]),
        ("se-vs-u", [2, 3]),
        ("se-vs-j", [1, 2]),
    ])
    def test_se_sweeps(self, tiny_config, temp_dir, kind, axis_values):
        """測試 SE 掃描含無 RIS 基準列"""
        output = temp_dir / f"{kind}.csv"
        run_kind(tiny_config, kind, output)
        written = pd.read_csv(output)

        assert list(written.columns) == RESULT_COLUMNS["se-vs"]
        assert sorted(written["x"].unique()) == axis_values
        baseline = written[~written["ris"]]
        assert len(baseline) == len(axis_values)
        assert (baseline["K"] == 0).all()
        assert (written["average_se"] > 0).all()

    @pytest.mark.parametrize("kind", ["ee-vs-m", "ee-vs-u", "ee-vs-rho"])
    def test_ee_sweeps(self, tiny_config, temp_dir, kind):
        """測試 EE 掃描輸出"""
        output = temp_dir / f"{kind}.csv"
        run_kind(tiny_config, kind, output)
        written = pd.read_csv(output)

        assert list(written.columns) == RESULT_COLUMNS["ee-vs"]
        assert len(written) == 2 * len(tiny_config.experiment.k_values)
        assert (written["ee"] > 0).all()
        assert (written["p_tot"] > 0).all()

    def test_ee_decreases_with_element_power(self, tiny_config, temp_dir):
        """測試每元件功耗提高時 EE 下降"""
        table = run_kind(tiny_config, "ee-vs-rho", temp_dir / "rho.csv")
        for _, group in table.groupby("K"):
            ordered = group.sort_values("x")
            assert ordered["ee"].iloc[0] > ordered["ee"].iloc[-1]

    def test_optimize_writes_trace(self, tiny_config, temp_dir):
        """測試最佳化輸出結果與軌跡檔"""
        output = temp_dir / "optimize.csv"
        run_kind(tiny_config, "optimize", output)
        written = pd.read_csv(output)
        trace = pd.read_csv(trace_path(str(output)))

        assert trace_path(str(output)).name == "optimize_trace.csv"
        assert list(written.columns) == RESULT_COLUMNS["optimize"]
        assert list(trace.columns) == RESULT_COLUMNS["trace"]
        assert set(written["algorithm"]) == {"csa-pso", "pso", "random"}
        assert len(written) == 3 * len(tiny_config.experiment.k_values)
        assert (written["best_EE"] > 0).all()
        assert set(written.loc[written["K"] == 1, "rpm_bit_rate"]) == {3 * 20e6 / 200}

    def test_timing(self, tiny_config, temp_dir):
        """測試耗時量測表"""
        output = temp_dir / "timing.csv"
        table = run_kind(tiny_config, "timing", output)

        assert list(pd.read_csv(output).columns) == TIMING_COLUMNS
        assert set(table["algorithm"]) == {"pso", "csa-pso"}
        assert (table["iterations"] == tiny_config.optimizer.t_max).all()
        assert (table["mean_iteration_s"] > 0).all()
        assert np.isfinite(scaling_slope(table))
        assert (table["passed"] == (table["overhead_ratio"] < OVERHEAD_LIMIT)).all()
        for _, group in table.groupby("K"):
            assert group["passed"].nunique() == 1

    @pytest.mark.parametrize("ratio, expected", [
        (1.05, True),
        (OVERHEAD_LIMIT, False),
        (2.3, False),
        (float("nan"), False),
    ])
    def test_overhead_limit(self, ratio, expected):
        """測試 CSA-PSO 耗時比上限判定"""
        assert overhead_within_limit(ratio) is expected

    @pytest.mark.slow
    def test_oracle_suite(self, tiny_config, temp_dir):
        """測試閉式統計量與蒙地卡羅一致"""
        tiny_config.experiment.oracle_samples = 20_000
        tiny_config.experiment.chunk_size = 1000
        output = temp_dir / "oracle.csv"
        table = run_kind(tiny_config, "oracle-suite", output)

        assert list(pd.read_csv(output).columns) == ORACLE_COLUMNS
        agreement = table[table["term"] == "compact_vs_case_table"]
        assert agreement["passed"].all()

        z_tests = table[table["z_score"].notna()]
        assert {"desired_signal", "interference_mean", "self_second_moment",
                "aggregated_covariance"} <= set(z_tests["term"])
        assert z_tests["passed"].all(), z_tests[~z_tests["passed"]].to_string()
        assert table["term"].str.startswith("printed_sinr_ue").sum() == tiny_config.system.U


class TestReproducibility:
    """可重現性測試"""

    def test_same_csv_for_any_worker_count(self, tiny_config, temp_dir):
        """測試不同執行緒數得到逐位元相同的 CSV"""
        tiny_config.experiment.kind = "se-cdf"
        tiny_config.experiment.workers = 1
        run_experiment(tiny_config, str(temp_dir / "serial.csv"))
        tiny_config.experiment.workers = 3
        run_experiment(tiny_config, str(temp_dir / "threaded.csv"))

        assert (temp_dir / "serial.csv").read_bytes() == (temp_dir / "threaded.csv").read_bytes()

    def test_optimize_independent_of_k_order(self, tiny_config, temp_dir):
        """測試最佳化結果不依 k_values 的排列順序"""
        tiny_config.experiment.kind = "optimize"
        tiny_config.experiment.k_values = [1, 2]
        forward = run_experiment(tiny_config, str(temp_dir / "forward.csv"))
        tiny_config.experiment.k_values = [2, 1]
        backward = run_experiment(tiny_config, str(temp_dir / "backward.csv"))

        key = ["run", "algorithm", "K"]
        forward = forward.sort_values(key).reset_index(drop=True)
        backward = backward.sort_values(key).reset_index(drop=True)
        pd.testing.assert_frame_equal(forward, backward)

    def test_invalid_config_rejected(self, tiny_config, temp_dir):
        """測試不一致的配置在執行前被拒絕"""
        tiny_config.experiment.k_values = [3]
        tiny_config.experiment.kind = "se-cdf"

        with pytest.raises(ConfigError):
            run_experiment(tiny_config, str(temp_dir / "never.csv"))
        assert not (temp_dir / "never.csv").exists()


class TestCommandLine:
    """命令列入口測試"""

    @pytest.fixture
    def config_file(self, tiny_config, temp_dir, monkeypatch):
        for name in ("RPMRIS_PROFILE", "RPMRIS_SEED", "RPMRIS_TRIALS", "RPMRIS_WORKERS", "RPMRIS_OUTPUT"):
            monkeypatch.delenv(name, raising=False)
        ConfigManager(str(temp_dir)).save_config(tiny_config, "tiny.yml")
        return temp_dir / "tiny.yml"

    def test_success(self, config_file, temp_dir):
        """測試成功執行回傳 0 並寫出 CSV"""
        output = temp_dir / "cli.csv"
        code = main(["--config", str(config_file), "--experiment", "se-cdf", "--k", "1",
                     "--seed", "5", "--output", str(output)])

        assert code == 0
        written = pd.read_csv(output)
        assert set(written["K"]) == {1}
        assert set(written["seed"]) == {5}

    def test_combiner_and_fading_overrides(self, config_file, temp_dir):
        """測試合併器與衰落模式覆寫"""
        output = temp_dir / "lmmse.csv"
        code = main(["--config", str(config_file), "--experiment", "se-cdf", "--combiner", "lmmse",
                     "--fading", "rayleigh", "--trials", "100", "--output", str(output)])

        assert code == 0
        written = pd.read_csv(output)
        assert set(written["combiner"]) == {"lmmse"}
        assert set(written["fading"]) == {"rayleigh"}

    def test_config_error_exit_code(self, temp_dir):
        """測試配置錯誤回傳 2"""
        bad = temp_dir / "bad.yml"
        bad.write_text("system:\n  antennas: 8\n", encoding="utf-8")

        assert main(["--config", str(bad)]) == 2

    def test_inconsistent_override_exit_code(self, config_file):
        """測試命令列覆寫造成的不一致回傳 2"""
        assert main(["--config", str(config_file), "--k", "5"]) == 2

    def test_unknown_experiment(self, config_file):
        """測試未知的實驗類型由 argparse 拒絕"""
        with pytest.raises(SystemExit):
            main(["--config", str(config_file), "--experiment", "ber"])
