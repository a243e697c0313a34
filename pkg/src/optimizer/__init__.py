"""
RPM-RIS Cell-Free - Optimizer Module
RIS 相移的 CSA-PSO / PSO 能量效率最佳化
"""

from .swarm import (
    SwarmConfig,
    SwarmState,
    OptimizationResult,
    chaotic_init,
    adaptive_inertia,
    velocity_update,
    position_update,
    mutate_worst,
    reset_stalled,
    run_csa_pso,
    run_pso,
    random_phase_baseline
)

from .objective import (
    EnergyEfficiencyObjective,
    EnergyEvaluation,
    build_objective
)

__all__ = [
    'SwarmConfig',
    'SwarmState',
    'OptimizationResult',
    'chaotic_init',
    'adaptive_inertia',
    'velocity_update',
    'position_update',
    'mutate_worst',
    'reset_stalled',
    'run_csa_pso',
    'run_pso',
    'random_phase_baseline',
    'EnergyEfficiencyObjective',
    'EnergyEvaluation',
    'build_objective'
]
