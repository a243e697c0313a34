"""
桌面規模下的統計一致性與趨勢測試
閉式 SE 對蒙地卡羅、合併器排序、RP 區塊數差距、能量效率排序與最佳化器相對隨機相位的增益
"""

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.cellfree.closed_form import closed_form_statistics
from src.cellfree.combining import lsfd_statistics, spectral_efficiency
from src.cellfree.rpm_channel import PhaseShiftConfig
from src.cellfree.system import build_system
from src.core import ConfigManager
from src.core.config_manager import CombinerKind
from src.experiments.harness import ee_sweep, setup_se, setup_streams
from src.optimizer.swarm import SwarmConfig, random_phase_baseline, run_csa_pso, run_pso

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


@pytest.fixture
def desk_config():
    """M=10, J=2, U=4, L=16, G=4, K=2 的桌面配置"""
    config = ConfigManager(str(CONFIG_DIR)).load_config("desk.yml")
    config.logging.console_output = False
    config.experiment.workers = 1
    return config


def closed_form_average_se(config, geometry_seq, **overrides) -> float:
    """隨機相移下 MR + 最佳 LSFD 閉式 SE 的 UE 平均"""
    rng = np.random.default_rng(geometry_seq)
    system = build_system(config, rng, **overrides)
    phases = PhaseShiftConfig.random(system.M, system.L_A, rng)
    stats = closed_form_statistics(system.statistics(phases), system.pilots)
    return float(spectral_efficiency(stats, system.data_powers, system.tau_u, system.tau_c).se.mean())


class TestClosedFormAgreement:
    """閉式 SE 與級聯通道蒙地卡羅的一致性"""

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [101, 202, 303])
    def test_mr_se_matches_monte_carlo(self, desk_config, seed):
        """測試每個 UE 的閉式 SE 與 4·10⁴ 次試驗的蒙地卡羅 SE 相對誤差 < 3%"""
        rng = np.random.default_rng(seed)
        system = build_system(desk_config, rng)
        phases = PhaseShiftConfig.random(system.M, system.L_A, rng)

        exact = spectral_efficiency(
            closed_form_statistics(system.statistics(phases), system.pilots),
            system.data_powers, system.tau_u, system.tau_c,
        )
        simulated = spectral_efficiency(
            lsfd_statistics(system, phases, CombinerKind.MR, n_trials=40_000, seed=seed, chunk_size=4000),
            system.data_powers, system.tau_u, system.tau_c,
        )

        assert np.all(exact.se > 0)
        np.testing.assert_allclose(simulated.se, exact.se, rtol=0.03)


class TestSpectralEfficiencyTrends:
    """SE 趨勢"""

    @pytest.mark.slow
    def test_lmmse_not_below_mr(self, desk_config):
        """測試 20 個佈建上 L-MMSE 的平均 SE 不低於 MR (共用通道取樣)"""
        desk_config.experiment.trials = 4000
        desk_config.experiment.chunk_size = 1000
        streams = setup_streams(7, 20)

        mr = np.array([setup_se(desk_config, s, CombinerKind.MR).mean() for s in streams])
        lmmse = np.array([setup_se(desk_config, s, CombinerKind.LMMSE).mean() for s in streams])

        assert lmmse.mean() >= mr.mean()
        assert np.all(lmmse >= 0.98 * mr), np.flatnonzero(lmmse < 0.98 * mr)

    @pytest.mark.slow
    def test_active_block_gap_is_small(self, desk_config):
        """測試 K=1/2/4 的平均 SE 差距 < 10%，且較大 K 不低於較小 K (容許 0.1%)"""
        streams = setup_streams(11, 10)
        average = {
            K: np.mean([closed_form_average_se(desk_config, geometry_seq, K=K) for geometry_seq, _ in streams])
            for K in (1, 2, 4)
        }

        spread = (max(average.values()) - min(average.values())) / min(average.values())
        assert spread < 0.10
        assert average[4] >= average[2] * (1 - 1e-3)
        assert average[2] >= average[1] * (1 - 1e-3)


class TestEnergyEfficiencyTrends:
    """EE 趨勢 (隨機相移、P(b) = 25 dBm)"""

    @pytest.mark.slow
    def test_ee_ordering_in_k_and_m(self, desk_config):
        """測試每個 M 下 EE(K=1) > EE(K=2) > EE(K=4)，且每個 K 的 EE 隨 M 遞減"""
        desk_config.power.p_ris_element_dbm = 25.0
        desk_config.optimizer.capacity_draws = 32
        desk_config.experiment.k_values = [1, 2, 4]
        desk_config.experiment.m_values = [5, 10, 15]
        desk_config.experiment.setups = 5

        table = ee_sweep(desk_config, "m")
        ee = table.pivot(index="x", columns="K", values="ee")

        for M, row in ee.iterrows():
            assert row[1] > row[2] > row[4], (M, row.to_dict())
        for K in (1, 2, 4):
            assert ee[K].is_monotonic_decreasing, ee[K].to_dict()


def alignment_gain(a: np.ndarray):
    """|Σ a_l e^{jθ_l}|² / (Σ|a_l|)²：相位對齊時為 1"""
    norm = float(np.sum(np.abs(a))) ** 2

    def objective(theta):
        return float(np.abs(np.sum(a * np.exp(1j * np.asarray(theta)))) ** 2 / norm)

    return objective


class TestOptimizerDominance:
    """最佳化器相對隨機相位的增益"""

    @pytest.mark.slow
    def test_swarms_beat_random_phases(self):
        """測試 10 個種子的中位數：CSA-PSO 與 PSO 皆比隨機相位高出 10% 以上，且軌跡單調"""
        rng = np.random.default_rng(17)
        objective = alignment_gain(rng.normal(size=16) + 1j * rng.normal(size=16))
        config = SwarmConfig(particles=20, t_max=100, patience=100)

        best = {"csa-pso": [], "pso": [], "random": []}
        for seed in range(10):
            for result in (
                run_csa_pso(objective, 16, config, seed),
                run_pso(objective, 16, config, seed),
                random_phase_baseline(objective, 16, seed),
            ):
                best[result.algorithm].append(result.best_fitness)
                assert result.trace["gbest_EE"].is_monotonic_increasing

        median = pd.Series({name: float(np.median(values)) for name, values in best.items()})
        assert median["csa-pso"] > 1.1 * median["random"]
        assert median["pso"] > 1.1 * median["random"]
