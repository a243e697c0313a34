"""
RPM-RIS Cell-Free - 實驗執行器
依實驗類型安排佈建抽樣與蒙地卡羅試驗，並輸出 CSV 結果表
"""

import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..cellfree.combining import lsfd_statistics, spectral_efficiency
from ..cellfree.energy import PowerModel
from ..cellfree.rpm_channel import PhaseShiftConfig, rpm_bit_rate
from ..cellfree.system import CellFreeSystem, build_system
from ..core.config_manager import CombinerKind, ExperimentConfig, validate_config
from ..core.logging_system import log_errors
from ..optimizer.objective import EnergyEfficiencyObjective, build_objective
from ..optimizer.swarm import SwarmConfig, random_phase_baseline, run_csa_pso, run_pso
from .oracles import run_oracle_suite
from .timing import timing_suite

logger = logging.getLogger(__name__)

PERCENTILES = np.arange(0, 101)

RESULT_COLUMNS: Dict[str, List[str]] = {
    "se-cdf": ["percentile", "se", "combiner", "K", "fading", "seed"],
    "se-vs": ["x", "average_se", "sum_se", "combiner", "K", "ris", "seed"],
    "ee-vs": ["x", "ee", "sum_se", "p_tot", "K", "seed"],
    "optimize": ["seed", "run", "algorithm", "K", "best_EE", "iterations", "rpm_bit_rate"],
    "trace": ["seed", "run", "algorithm", "K", "iteration", "gbest_EE", "mean_EE", "omega"],
}

SWEEP_PARAMETER = {"m": "M", "u": "U", "j": "J"}

SetupStreams = List[Tuple[np.random.SeedSequence, np.random.SeedSequence]]


def setup_streams(seed: int, setups: int) -> SetupStreams:
    """每個佈建一組 (幾何/相移, 蒙地卡羅) 獨立種子"""
    return [tuple(child.spawn(2)) for child in np.random.SeedSequence(seed).spawn(setups)]


def _random_setup(
    config: ExperimentConfig, geometry_seq: np.random.SeedSequence, **overrides
) -> Tuple[CellFreeSystem, PhaseShiftConfig]:
    rng = np.random.default_rng(geometry_seq)
    system = build_system(config, rng, **overrides)
    return system, PhaseShiftConfig.random(system.M, system.L_A, rng)


def setup_se(
    config: ExperimentConfig,
    streams: Tuple[np.random.SeedSequence, np.random.SeedSequence],
    combiner: CombinerKind,
    **overrides,
) -> np.ndarray:
    """單一佈建、隨機相移下每個 UE 的蒙地卡羅 SE (最佳 LSFD)"""
    settings = config.experiment
    geometry_seq, mc_seq = streams
    system, phases = _random_setup(config, geometry_seq, **overrides)
    stats = lsfd_statistics(
        system, phases, combiner, settings.trials, mc_seq, settings.workers, settings.chunk_size
    )
    return spectral_efficiency(stats, system.data_powers, system.tau_u, system.tau_c).se


def se_cdf(config: ExperimentConfig) -> pd.DataFrame:
    """每個 K 的 UE SE 經驗 CDF (佈建 × UE 的百分位數)"""
    settings = config.experiment
    combiner = CombinerKind(settings.combiner)
    streams = setup_streams(settings.seed, settings.setups)
    frames = []
    for K in settings.k_values:
        samples = np.concatenate([setup_se(config, s, combiner, K=K) for s in streams])
        logger.info(f"se-cdf K={K}: {samples.size} 個樣本, 平均 SE {samples.mean():.4f}")
        frames.append(pd.DataFrame({
            "percentile": PERCENTILES,
            "se": np.percentile(samples, PERCENTILES),
            "combiner": combiner.value,
            "K": K,
            "fading": config.channel.fading,
            "seed": settings.seed,
        }))
    return pd.concat(frames, ignore_index=True)[RESULT_COLUMNS["se-cdf"]]


def _sweep_values(config: ExperimentConfig, axis: str) -> List:
    settings = config.experiment
    return {"m": settings.m_values, "u": settings.u_values, "j": settings.j_values}[axis]


def se_sweep(config: ExperimentConfig, axis: str) -> pd.DataFrame:
    """平均 SE 對 M / U / J 的掃描，每個 x 另附無 RIS 的 cell-free 基準 (K=0)"""
    settings = config.experiment
    combiner = CombinerKind(settings.combiner)
    streams = setup_streams(settings.seed, settings.setups)
    parameter = SWEEP_PARAMETER[axis]
    rows = []
    for x in _sweep_values(config, axis):
        cases = [(K, True) for K in settings.k_values] + [(min(settings.k_values), False)]
        for K, ris in cases:
            per_setup = [setup_se(config, s, combiner, K=K, ris_enabled=ris, **{parameter: x}) for s in streams]
            rows.append({
                "x": x,
                "average_se": float(np.mean([se.mean() for se in per_setup])),
                "sum_se": float(np.mean([se.sum() for se in per_setup])),
                "combiner": combiner.value,
                "K": K if ris else 0,
                "ris": ris,
                "seed": settings.seed,
            })
        logger.info(f"se-vs-{axis} {parameter}={x} 完成")
    return pd.DataFrame(rows, columns=RESULT_COLUMNS["se-vs"])


def _ee_point(
    config: ExperimentConfig, streams: SetupStreams, K: int, power_model: PowerModel, **overrides
) -> Tuple[float, float, float]:
    ee, sum_se, p_tot = [], [], []
    for geometry_seq, mc_seq in streams:
        system, phases = _random_setup(config, geometry_seq, K=K, **overrides)
        objective = EnergyEfficiencyObjective(
            system, power_model, config.optimizer, config.power.ue_power_mw * 1e-3, mc_seq
        )
        evaluation = objective.evaluate(phases.theta.ravel())
        ee.append(evaluation.ee)
        sum_se.append(evaluation.sum_se)
        p_tot.append(evaluation.p_tot)
    return float(np.mean(ee)), float(np.mean(sum_se)), float(np.mean(p_tot))


def ee_sweep(config: ExperimentConfig, axis: str) -> pd.DataFrame:
    """隨機相移下的平均 EE 對 M / U / P(b) 的掃描"""
    settings = config.experiment
    streams = setup_streams(settings.seed, settings.setups)
    rows = []
    if axis == "rho":
        points = [(x, PowerModel.from_config(config.power, x), {}) for x in settings.rho_dbm_values]
    else:
        model = PowerModel.from_config(config.power)
        points = [(x, model, {SWEEP_PARAMETER[axis]: x}) for x in _sweep_values(config, axis)]

    for x, model, overrides in points:
        for K in settings.k_values:
            ee, sum_se, p_tot = _ee_point(config, streams, K, model, **overrides)
            rows.append({"x": x, "ee": ee, "sum_se": sum_se, "p_tot": p_tot, "K": K, "seed": settings.seed})
        logger.info(f"ee-vs-{axis} x={x} 完成")
    return pd.DataFrame(rows, columns=RESULT_COLUMNS["ee-vs"])


def optimize(config: ExperimentConfig) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """每個種子、每個 K 執行 CSA-PSO、PSO 與隨機相位基準；回傳 (結果, 軌跡)"""
    settings = config.experiment
    power_model = PowerModel.from_config(config.power)
    swarm = SwarmConfig.from_config(config.optimizer, settings.workers)
    rows, traces = [], []
    for run, child in enumerate(np.random.SeedSequence(settings.seed).spawn(settings.optimizer_seeds)):
        # 同一 run 的所有 K 共用部署與亂數流
        geometry_seq, objective_seq, swarm_seq = child.spawn(3)
        for K in settings.k_values:
            system = build_system(config, np.random.default_rng(geometry_seq), K=K)
            objective = build_objective(
                system, power_model, config.optimizer, config.power.ue_power_mw, objective_seq
            )
            bit_rate = rpm_bit_rate(system.codebook, system.M, system.tau_c, power_model.bandwidth)
            results = [
                run_csa_pso(objective, objective.dim, swarm, swarm_seq),
                run_pso(objective, objective.dim, swarm, swarm_seq),
                random_phase_baseline(objective, objective.dim, swarm_seq),
            ]
            for result in results:
                rows.append({
                    "seed": settings.seed,
                    "run": run,
                    "algorithm": result.algorithm,
                    "K": K,
                    "best_EE": objective.evaluate(result.best_position).ee,
                    "iterations": result.iterations,
                    "rpm_bit_rate": bit_rate,
                })
                trace = result.trace.copy()
                trace.insert(0, "K", K)
                trace.insert(0, "algorithm", result.algorithm)
                trace.insert(0, "run", run)
                trace.insert(0, "seed", settings.seed)
                traces.append(trace)
        logger.info(f"optimize 第 {run + 1}/{settings.optimizer_seeds} 個種子完成")
    return (
        pd.DataFrame(rows, columns=RESULT_COLUMNS["optimize"]),
        pd.concat(traces, ignore_index=True)[RESULT_COLUMNS["trace"]],
    )


def trace_path(output: str) -> Path:
    """results.csv → results_trace.csv"""
    path = Path(output)
    return path.with_name(f"{path.stem}_trace{path.suffix or '.csv'}")


def write_table(table: pd.DataFrame, output: str) -> Path:
    path = Path(output)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, encoding="utf-8")
    return path


EXPERIMENTS: Dict[str, Callable[[ExperimentConfig], pd.DataFrame]] = {
    "se-cdf": se_cdf,
    "se-vs-m": lambda c: se_sweep(c, "m"),
    "se-vs-u": lambda c: se_sweep(c, "u"),
    "se-vs-j": lambda c: se_sweep(c, "j"),
    "ee-vs-m": lambda c: ee_sweep(c, "m"),
    "ee-vs-u": lambda c: ee_sweep(c, "u"),
    "ee-vs-rho": lambda c: ee_sweep(c, "rho"),
    "oracle-suite": run_oracle_suite,
    "timing": timing_suite,
}


@log_errors("Harness")
def run_experiment(config: ExperimentConfig, output: Optional[str] = None) -> pd.DataFrame:
    """
    執行 config.experiment.kind 指定的實驗並寫出 CSV

    Args:
        config: 已載入的實驗配置 (會先經過 validate_config)
        output: 覆寫 config.experiment.output

    Returns:
        寫入 CSV 的結果表
    """
    validate_config(config)
    kind = config.experiment.kind
    output = output or config.experiment.output
    logger.info(f"開始實驗 {kind} (seed={config.experiment.seed}, trials={config.experiment.trials})")

    if kind == "optimize":
        table, trace = optimize(config)
        write_table(trace, str(trace_path(output)))
    else:
        table = EXPERIMENTS[kind](config)

    path = write_table(table, output)
    logger.info(f"實驗 {kind} 完成，結果已寫入 {path} ({len(table)} 列)")
    return table
