"""
RPM-RIS Cell-Free - 最佳化器耗時量測
比較 PSO 與 CSA-PSO 在不同啟用區塊數 K 下的每次迭代耗時與記憶體
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, List

import numpy as np
import pandas as pd
import psutil

from ..cellfree.energy import PowerModel
from ..cellfree.system import build_system
from ..core.config_manager import ExperimentConfig
from ..optimizer.objective import build_objective
from ..optimizer.swarm import SwarmConfig, run_csa_pso, run_pso

logger = logging.getLogger(__name__)

MB = 1024 * 1024
OVERHEAD_LIMIT = 1.5
TIMING_COLUMNS = [
    "algorithm", "K", "L_A", "dim", "particles", "iterations",
    "mean_iteration_s", "work", "rss_start_mb", "rss_end_mb", "overhead_ratio", "passed",
]


@dataclass
class TimingSample:
    """單次量測結果"""
    elapsed_s: float = 0.0
    rss_start: int = 0
    rss_end: int = 0


@contextmanager
def measure(process: psutil.Process = None) -> Iterator[TimingSample]:
    """量測區塊的牆鐘時間與常駐記憶體 (RSS)"""
    process = process or psutil.Process()
    sample = TimingSample(rss_start=process.memory_info().rss)
    start = time.perf_counter()
    try:
        yield sample
    finally:
        sample.elapsed_s = time.perf_counter() - start
        sample.rss_end = process.memory_info().rss


def scaling_slope(table: pd.DataFrame, algorithm: str = "csa-pso") -> float:
    """log(每次迭代耗時) 對 log(M·L_A·I) 的最小平方斜率"""
    rows = table[table["algorithm"] == algorithm]
    if len(rows) < 2 or rows["work"].nunique() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(rows["work"]), np.log(rows["mean_iteration_s"]), 1)
    return float(slope)


def overhead_within_limit(ratio: float, limit: float = OVERHEAD_LIMIT) -> bool:
    """CSA-PSO / PSO 每次迭代耗時比是否低於上限；NaN 視為不通過"""
    return bool(np.isfinite(ratio) and ratio < limit)


def timing_suite(config: ExperimentConfig) -> pd.DataFrame:
    """
    對每個 K 以相同的目標函數執行 PSO 與 CSA-PSO

    停止條件關閉 (patience = t_max)，兩者都跑滿 t_max 次迭代；
    每次迭代耗時 = 總耗時 / (迭代數 + 1)，含初始評估。
    passed 欄記錄該 K 的耗時比是否低於 OVERHEAD_LIMIT。
    """
    settings = config.experiment
    swarm = SwarmConfig.from_config(config.optimizer, settings.workers)
    swarm.patience = swarm.t_max + 1
    power_model = PowerModel.from_config(config.power)
    process = psutil.Process()

    rows: List[dict] = []
    for K in settings.k_values:
        geometry_seq, objective_seq, swarm_seq = np.random.SeedSequence([settings.seed, K]).spawn(3)
        system = build_system(config, np.random.default_rng(geometry_seq), K=K)
        objective = build_objective(system, power_model, config.optimizer, config.power.ue_power_mw, objective_seq)
        dim = objective.dim

        per_k = {}
        for name, runner in (("pso", run_pso), ("csa-pso", run_csa_pso)):
            with measure(process) as sample:
                result = runner(objective, dim, swarm, swarm_seq)
            per_iteration = sample.elapsed_s / (result.iterations + 1)
            per_k[name] = per_iteration
            rows.append({
                "algorithm": name,
                "K": K,
                "L_A": system.L_A,
                "dim": dim,
                "particles": swarm.particles,
                "iterations": result.iterations,
                "mean_iteration_s": per_iteration,
                "work": system.M * system.L_A * swarm.particles,
                "rss_start_mb": sample.rss_start / MB,
                "rss_end_mb": sample.rss_end / MB,
            })
            logger.info(f"K={K} {name}: 每次迭代 {per_iteration * 1e3:.2f} ms")

        ratio = per_k["csa-pso"] / per_k["pso"] if per_k["pso"] > 0 else float("nan")
        passed = overhead_within_limit(ratio)
        for row in rows[-2:]:
            row["overhead_ratio"] = ratio
            row["passed"] = passed
        if not passed:
            logger.warning(f"K={K}: CSA-PSO 每次迭代耗時為 PSO 的 {ratio:.2f} 倍 (上限 {OVERHEAD_LIMIT})")

    table = pd.DataFrame(rows, columns=TIMING_COLUMNS)
    logger.info(f"CSA-PSO 耗時對 M·L_A·I 的 log-log 斜率: {scaling_slope(table):.3f}")
    return table
