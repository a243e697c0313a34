"""
RPM-RIS Cell-Free - 粒子群最佳化
CSA-PSO (混沌初始化 + 自適應慣性權重 + 變異 + 停滯重置) 與傳統 PSO、隨機相位基準
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import pandas as pd

from ..core.config_manager import OptimizerConfig
from ..core.exceptions import InvalidArgumentError, NumericFailureError, ObjectiveEvaluationError

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]

FORBIDDEN_SEEDS = (0.0, 0.25, 0.5, 0.75, 1.0)
SEED_TOLERANCE = 1e-9
MAX_SEED_REJECTIONS = 100
STALL_TOLERANCE = 1e-12
TRACE_COLUMNS = ["iteration", "gbest_EE", "mean_EE", "omega"]


@dataclass
class SwarmConfig:
    """粒子群參數"""
    particles: int = 20
    t_max: int = 100
    t_check: int = 2
    c1: float = 1.496
    c2: float = 1.496
    omega_min: float = 0.4
    omega_max: float = 0.9
    omega_fixed: float = 0.7298
    v_max: float = 4.0
    patience: int = 10
    epsilon_rel: float = 1e-4
    mu_tilde: float = 4.0
    workers: int = 1

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max < 1:
            raise InvalidArgumentError(
                f"需滿足 0 < omega_min < omega_max < 1 ({self.omega_min}, {self.omega_max})"
            )
        if self.v_max <= 0:
            raise InvalidArgumentError(f"v_max 必須為正: {self.v_max}")
        if self.t_check < 1:
            raise InvalidArgumentError(f"t_check 必須 ≥ 1: {self.t_check}")
        if self.particles < 1 or self.t_max < 1:
            raise InvalidArgumentError("粒子數與迭代次數必須 ≥ 1")

    @classmethod
    def from_config(cls, optimizer: OptimizerConfig, workers: int = 1) -> "SwarmConfig":
        return cls(
            particles=optimizer.particles,
            t_max=optimizer.t_max,
            t_check=optimizer.t_check,
            c1=optimizer.c1,
            c2=optimizer.c2,
            omega_min=optimizer.omega_min,
            omega_max=optimizer.omega_max,
            omega_fixed=optimizer.omega_fixed,
            v_max=optimizer.v_max,
            patience=optimizer.patience,
            epsilon_rel=optimizer.epsilon_rel,
            mu_tilde=optimizer.mu_tilde,
            workers=workers,
        )


@dataclass
class SwarmState:
    """粒子群狀態；位置與速度形狀 (I, D)"""
    positions: np.ndarray
    velocities: np.ndarray
    fitness: np.ndarray
    pbest: np.ndarray
    pbest_fitness: np.ndarray
    gbest: np.ndarray
    gbest_fitness: float
    stall: np.ndarray
    convergence: int = 0

    @property
    def I(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @classmethod
    def initial(cls, positions: np.ndarray, velocities: np.ndarray, fitness: np.ndarray) -> "SwarmState":
        best = int(np.argmax(fitness))
        return cls(
            positions=positions,
            velocities=velocities,
            fitness=fitness,
            pbest=positions.copy(),
            pbest_fitness=fitness.copy(),
            gbest=positions[best].copy(),
            gbest_fitness=float(fitness[best]),
            stall=np.zeros(positions.shape[0], dtype=int),
        )

    def update_bests(self) -> None:
        """個體最佳與全域最佳只在嚴格改善時更新"""
        improved = self.fitness > self.pbest_fitness
        self.pbest[improved] = self.positions[improved]
        self.pbest_fitness[improved] = self.fitness[improved]
        best = int(np.argmax(self.pbest_fitness))
        if self.pbest_fitness[best] > self.gbest_fitness:
            self.gbest = self.pbest[best].copy()
            self.gbest_fitness = float(self.pbest_fitness[best])


@dataclass
class OptimizationResult:
    """最佳化結果與逐迭代軌跡"""
    algorithm: str
    best_position: np.ndarray
    best_fitness: float
    trace: pd.DataFrame = field(repr=False)
    iterations: int = 0


def wrap_phase(theta: np.ndarray) -> np.ndarray:
    """以 2π 週期折回 [−π, π)"""
    return np.mod(np.asarray(theta) + np.pi, 2.0 * np.pi) - np.pi


def logistic_sequence(seed: float, length: int, mu: float = 4.0) -> np.ndarray:
    """κ(d+1) = μ·κ(d)·(1 − κ(d))，κ(1) = seed"""
    sequence = np.empty(length)
    kappa = float(seed)
    for d in range(length):
        sequence[d] = kappa
        kappa = mu * kappa * (1.0 - kappa)
    return sequence


def _is_forbidden(kappa: float) -> bool:
    return any(abs(kappa - bad) < SEED_TOLERANCE for bad in FORBIDDEN_SEEDS)


def chaotic_init(I: int, dim: int, rng: np.random.Generator, mu_tilde: float = 4.0) -> np.ndarray:
    """
    Logistic 混沌序列初始化：θ_i(d) = −π + 2π·κ_i(d)

    每個粒子的起始值 κ_i(1) 在 (0, 1) 均勻抽取，落在固定點或週期點 {0, .25, .5, .75, 1}
    時重抽，超過 MAX_SEED_REJECTIONS 次視為失敗。
    """
    positions = np.empty((I, dim))
    for i in range(I):
        for _ in range(MAX_SEED_REJECTIONS):
            seed = rng.uniform(0.0, 1.0)
            if not _is_forbidden(seed):
                break
        else:
            raise NumericFailureError(f"粒子 {i} 的混沌序列起始值連續 {MAX_SEED_REJECTIONS} 次落在禁用點")
        positions[i] = -np.pi + 2.0 * np.pi * logistic_sequence(seed, dim, mu_tilde)
    return positions


def adaptive_inertia(t: int, t_max: int, omega_min: float, omega_max: float) -> float:
    """ω = ω_min + (ω_max − ω_min)·(2/(1 + e^(−5ζ)) − 1)，ζ = (T_max − t)/T_max"""
    if not 0 <= t <= t_max:
        raise InvalidArgumentError(f"迭代索引超出 [0, {t_max}]: {t}")
    zeta = (t_max - t) / t_max
    return float(omega_min + (omega_max - omega_min) * (2.0 / (1.0 + np.exp(-5.0 * zeta)) - 1.0))


def velocity_update(
    state: SwarmState, omega: float, c1: float, c2: float, v_max: float, rng: np.random.Generator
) -> np.ndarray:
    """v ← ω·v + c1·r1·(pbest − θ) + c2·r2·(gbest − θ)，再逐元素截在 [−v_max, v_max]"""
    r1 = rng.uniform(0.0, 1.0, size=(state.I, 1))
    r2 = rng.uniform(0.0, 1.0, size=(state.I, 1))
    velocities = (
        omega * state.velocities
        + c1 * r1 * (state.pbest - state.positions)
        + c2 * r2 * (state.gbest[None, :] - state.positions)
    )
    return np.clip(velocities, -v_max, v_max)


def position_update(positions: np.ndarray, velocities: np.ndarray) -> np.ndarray:
    """θ ← wrap(θ + v)"""
    return wrap_phase(positions + velocities)


def mutate_worst(state: SwarmState, t: int, t_max: int, rng: np.random.Generator) -> Optional[int]:
    """
    將當前適應度最差的粒子變異為 gbest + N(0, σ_t²)，σ_t = 2π(1 − t/T_max)

    Returns:
        被變異的粒子索引；最差者即最佳者時不變異並回傳 None
    """
    worst = int(np.argmin(state.fitness))
    if worst == int(np.argmax(state.fitness)):
        return None
    sigma = 2.0 * np.pi * (1.0 - t / t_max)
    state.positions[worst] = wrap_phase(state.gbest + rng.normal(0.0, sigma, size=state.dim))
    return worst


def reset_stalled(state: SwarmState, t_check: int, rng: np.random.Generator) -> List[int]:
    """
    停滯超過 t_check 次的粒子逐座標重抽：N((gbest − pbest)/2, |gbest − pbest|)

    Returns:
        被重置的粒子索引
    """
    stalled = np.flatnonzero(state.stall > t_check)
    for i in stalled:
        gap = state.gbest - state.pbest[i]
        state.positions[i] = wrap_phase(rng.normal(gap / 2.0, np.abs(gap)))
        state.stall[i] = 0
    return [int(i) for i in stalled]


def evaluate_swarm(
    objective: Objective, positions: np.ndarray, iteration: int, workers: int = 1
) -> np.ndarray:
    """平行評估所有粒子；結果順序與粒子順序一致"""

    def evaluate(index: int) -> float:
        try:
            return float(objective(positions[index]))
        except Exception as e:
            raise ObjectiveEvaluationError(iteration, index, e) from e

    indices = range(positions.shape[0])
    if workers <= 1:
        return np.array([evaluate(i) for i in indices])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(evaluate, indices)))


def _update_stall(state: SwarmState, previous: np.ndarray) -> None:
    unchanged = np.abs(state.fitness - previous) < STALL_TOLERANCE * np.maximum(1.0, np.abs(previous))
    state.stall = np.where(unchanged, state.stall + 1, 0)


def _run_swarm(
    objective: Objective,
    dim: int,
    config: SwarmConfig,
    seed,
    chaotic: bool,
) -> OptimizationResult:
    algorithm = "csa-pso" if chaotic else "pso"
    rng = np.random.default_rng(seed)

    if chaotic:
        positions = chaotic_init(config.particles, dim, rng, config.mu_tilde)
        logger.debug(
            f"ω(t=0) = {adaptive_inertia(0, config.t_max, config.omega_min, config.omega_max):.4f}，"
            f"依 sigmoid 公式計算 (並非 omega_min={config.omega_min})"
        )
    else:
        positions = rng.uniform(-np.pi, np.pi, size=(config.particles, dim))
    velocities = rng.uniform(-config.v_max, config.v_max, size=(config.particles, dim))

    state = SwarmState.initial(positions, velocities, evaluate_swarm(objective, positions, 0, config.workers))
    epsilon = config.epsilon_rel * abs(state.gbest_fitness)
    first_omega = adaptive_inertia(0, config.t_max, config.omega_min, config.omega_max) if chaotic else config.omega_fixed
    rows = [(0, state.gbest_fitness, float(np.mean(state.fitness)), first_omega)]

    iterations = 0
    for t in range(config.t_max):
        omega = (
            adaptive_inertia(t, config.t_max, config.omega_min, config.omega_max)
            if chaotic else config.omega_fixed
        )
        state.velocities = velocity_update(state, omega, config.c1, config.c2, config.v_max, rng)
        state.positions = position_update(state.positions, state.velocities)

        previous = state.fitness
        previous_best = state.gbest_fitness
        state.fitness = evaluate_swarm(objective, state.positions, t + 1, config.workers)
        _update_stall(state, previous)
        state.update_bests()

        if chaotic:
            mutate_worst(state, t, config.t_max, rng)
            reset_stalled(state, config.t_check, rng)

        iterations = t + 1
        rows.append((iterations, state.gbest_fitness, float(np.mean(state.fitness)), omega))

        if abs(state.gbest_fitness - previous_best) < epsilon:
            state.convergence += 1
        else:
            state.convergence = 0
        if state.convergence >= config.patience:
            logger.debug(f"{algorithm} 於第 {iterations} 次迭代收斂")
            break

    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    logger.info(f"{algorithm} 完成: {iterations} 次迭代, 最佳適應度 {state.gbest_fitness:.6g}")
    return OptimizationResult(
        algorithm=algorithm,
        best_position=state.gbest.copy(),
        best_fitness=state.gbest_fitness,
        trace=trace,
        iterations=iterations,
    )


def run_csa_pso(objective: Objective, dim: int, config: SwarmConfig, seed=0) -> OptimizationResult:
    """CSA-PSO：混沌初始化、自適應 ω、最差粒子變異與停滯重置"""
    return _run_swarm(objective, dim, config, seed, chaotic=True)


def run_pso(objective: Objective, dim: int, config: SwarmConfig, seed=0) -> OptimizationResult:
    """傳統 PSO：均勻初始化、固定 ω，無變異與重置"""
    return _run_swarm(objective, dim, config, seed, chaotic=False)


def random_phase_baseline(objective: Objective, dim: int, seed=0) -> OptimizationResult:
    """單次均勻隨機相位"""
    rng = np.random.default_rng(seed)
    position = rng.uniform(-np.pi, np.pi, size=dim)
    fitness = evaluate_swarm(objective, position[None, :], 0)[0]
    trace = pd.DataFrame([(0, fitness, fitness, np.nan)], columns=TRACE_COLUMNS)
    return OptimizationResult(
        algorithm="random", best_position=position, best_fitness=float(fitness), trace=trace
    )
