"""
RPM-RIS Cell-Free - Channel & Performance Module
通道模型、通道估計、合併與閉式 SE、能耗模型
"""

from .topology import (
    NetworkGeometry,
    LargeScaleParams,
    LinkAngles,
    generate_geometry,
    large_scale_params,
    link_angles,
    path_loss_nlos,
    rician_factor,
    correlated_shadow_fading
)

from .spatial import (
    ula_steering,
    uspa_steering,
    ap_correlation,
    ris_correlation,
    local_scattering_correlation,
    full_ris_ap_correlation
)

from .rpm_channel import (
    ReflectionPatternCodebook,
    PhaseShiftConfig,
    AggregatedChannelStats,
    build_rp_codebook,
    map_bits_to_rp,
    rpm_bit_rate,
    aggregated_stats,
    sample_channel
)

from .estimation import (
    PilotBook,
    EstimationResult,
    assign_pilots,
    pilot_projection,
    estimation_statistics,
    lmmse_estimate
)

from .system import (
    CellFreeSystem,
    PatternStatistics,
    build_system,
    run_chunks
)

from .combining import (
    CombinerSet,
    LsfdStatistics,
    SpectralEfficiency,
    mr_combiner,
    lmmse_combiner,
    lsfd_statistics,
    optimal_lsfd_weights,
    lsfd_sinr,
    se_from_sinr,
    spectral_efficiency
)

from .closed_form import (
    SinrBreakdown,
    breakdown,
    closed_form_sinr,
    closed_form_statistics,
    reference_statistics
)

from .energy import (
    PowerModel,
    dbm_to_watt,
    capacity_per_ap,
    total_power,
    energy_efficiency
)

__all__ = [
    # 拓撲與空間相關
    'NetworkGeometry',
    'LargeScaleParams',
    'LinkAngles',
    'generate_geometry',
    'large_scale_params',
    'link_angles',
    'path_loss_nlos',
    'rician_factor',
    'correlated_shadow_fading',
    'ula_steering',
    'uspa_steering',
    'ap_correlation',
    'ris_correlation',
    'local_scattering_correlation',
    'full_ris_ap_correlation',

    # RPM 通道
    'ReflectionPatternCodebook',
    'PhaseShiftConfig',
    'AggregatedChannelStats',
    'build_rp_codebook',
    'map_bits_to_rp',
    'rpm_bit_rate',
    'aggregated_stats',
    'sample_channel',

    # 通道估計與系統
    'PilotBook',
    'EstimationResult',
    'assign_pilots',
    'pilot_projection',
    'estimation_statistics',
    'lmmse_estimate',
    'CellFreeSystem',
    'PatternStatistics',
    'build_system',
    'run_chunks',

    # 合併與 SE
    'CombinerSet',
    'LsfdStatistics',
    'SpectralEfficiency',
    'mr_combiner',
    'lmmse_combiner',
    'lsfd_statistics',
    'optimal_lsfd_weights',
    'lsfd_sinr',
    'se_from_sinr',
    'spectral_efficiency',
    'SinrBreakdown',
    'breakdown',
    'closed_form_sinr',
    'closed_form_statistics',
    'reference_statistics',

    # 能耗
    'PowerModel',
    'dbm_to_watt',
    'capacity_per_ap',
    'total_power',
    'energy_efficiency'
]
