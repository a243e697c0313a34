"""
RPM-RIS Cell-Free - 能量效率目標函數
以閉式 SE (MR + 最佳 LSFD，RP 平均) 與功耗模型評估一組 RIS 相移
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..cellfree.closed_form import closed_form_statistics
from ..cellfree.combining import spectral_efficiency
from ..cellfree.energy import PowerModel, energy_efficiency, network_capacity, total_power
from ..cellfree.linalg import complex_normal, matrix_sqrt
from ..cellfree.rpm_channel import PhaseShiftConfig
from ..cellfree.system import CellFreeSystem
from ..core.config_manager import OptimizerConfig
from .swarm import wrap_phase

logger = logging.getLogger(__name__)

PENALTY_CALIBRATION_DRAWS = 10


@dataclass
class EnergyEvaluation:
    """一組相移的完整評估結果"""
    ee: float
    fitness: float
    se: np.ndarray
    sinr: np.ndarray
    capacities: np.ndarray
    p_tot: float

    @property
    def sum_se(self) -> float:
        return float(np.sum(self.se))


class EnergyEfficiencyObjective:
    """
    相移 → 總能量效率 (bit/Joule)

    容量項使用固定的高斯等效通道取樣 h ~ CN(h̄, R^h) (每個取樣的 RP 亦固定)，
    因此同一組相移總是得到相同的數值。QoS 約束 SE_u ≥ η_min 以靜態懲罰處理。
    """

    def __init__(
        self,
        system: CellFreeSystem,
        power_model: PowerModel,
        settings: OptimizerConfig,
        ue_powers_w: np.ndarray,
        seed=0,
    ):
        self.system = system
        self.power_model = power_model
        self.qos_min_se = settings.qos_min_se
        self.penalty_factor = settings.penalty_factor
        self.ue_powers_w = np.broadcast_to(np.asarray(ue_powers_w, dtype=float), (system.U,)).copy()
        self.penalty = 0.0

        rng = np.random.default_rng(seed)
        n = settings.capacity_draws
        self._patterns = system.draw_patterns(n, rng)
        self._noise = complex_normal(rng, (n, system.M, system.U, system.J))

    @property
    def dim(self) -> int:
        return self.system.M * self.system.L_A

    @property
    def active_elements(self) -> int:
        return self.system.L_A if self.system.ris_enabled else 0

    def phases(self, theta: np.ndarray) -> PhaseShiftConfig:
        theta = wrap_phase(np.asarray(theta, dtype=float))
        return PhaseShiftConfig(theta.reshape(self.system.M, self.system.L_A))

    def _capacities(self, patterns) -> np.ndarray:
        s = self.system
        h_bar = np.stack([p.moments.h_bar for p in patterns])
        roots = np.stack([
            np.array([[matrix_sqrt(R) for R in per_ap] for per_ap in p.moments.R_h]) for p in patterns
        ])
        ap = np.arange(s.M)[None, :]
        h = h_bar[self._patterns, ap] + np.einsum(
            "nmuij,nmuj->nmui", roots[self._patterns, ap], self._noise
        )
        return network_capacity(h, s.data_powers, 1.0)

    def evaluate(self, theta: np.ndarray) -> EnergyEvaluation:
        s = self.system
        patterns = s.statistics(self.phases(theta))
        stats = closed_form_statistics(patterns, s.pilots)
        result = spectral_efficiency(stats, s.data_powers, s.tau_u, s.tau_c)
        capacities = self._capacities(patterns)

        p_tot = total_power(
            self.power_model, self.ue_powers_w, capacities, self.active_elements, s.M, s.J, s.tau_u, s.tau_c
        )
        ee = energy_efficiency(result.sum_se, p_tot, self.power_model.bandwidth)
        shortfall = float(np.sum(np.maximum(0.0, self.qos_min_se - result.se)))
        return EnergyEvaluation(
            ee=ee,
            fitness=ee - self.penalty * shortfall,
            se=result.se,
            sinr=result.sinr,
            capacities=capacities,
            p_tot=p_tot,
        )

    def __call__(self, theta: np.ndarray) -> float:
        return self.evaluate(theta).fitness

    def calibrate_penalty(self, seed=0, draws: int = PENALTY_CALIBRATION_DRAWS) -> float:
        """Penalty = penalty_factor × 隨機相移下的平均 EE"""
        if self.qos_min_se <= 0:
            self.penalty = 0.0
            return self.penalty
        rng = np.random.default_rng(seed)
        scale = np.mean([
            self.evaluate(rng.uniform(-np.pi, np.pi, size=self.dim)).ee for _ in range(draws)
        ])
        self.penalty = self.penalty_factor * float(scale)
        logger.debug(f"QoS 懲罰係數: {self.penalty:.4g} (EE 尺度 {scale:.4g})")
        return self.penalty


def build_objective(
    system: CellFreeSystem,
    power_model: PowerModel,
    settings: OptimizerConfig,
    ue_power_mw: float,
    seed=0,
    calibration_seed: Optional[int] = None,
) -> EnergyEfficiencyObjective:
    """建立目標函數並校準懲罰係數"""
    objective = EnergyEfficiencyObjective(system, power_model, settings, ue_power_mw * 1e-3, seed)
    objective.calibrate_penalty(seed if calibration_seed is None else calibration_seed)
    return objective
