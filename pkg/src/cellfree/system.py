"""
RPM-RIS Cell-Free - 系統組裝與平行蒙地卡羅
由配置建立完整的 AP-RIS-UE 系統 (幾何、大尺度參數、相關矩陣、RP 碼本、導頻)，
並提供分塊平行、結果可重現的蒙地卡羅執行器
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from ..core.config_manager import ExperimentConfig, FadingMode
from ..core.exceptions import InvalidArgumentError
from .energy import dbm_to_watt
from .estimation import EstimationResult, PilotBook, assign_pilots, estimation_statistics
from .rpm_channel import (
    AggregatedChannelStats,
    CorrelationSet,
    LinkGains,
    LosSteering,
    PhaseShiftConfig,
    ReflectionPatternCodebook,
    aggregated_stats,
    build_rp_codebook,
    sample_channel,
)
from .spatial import (
    ap_correlation,
    element_grid,
    full_ris_ap_correlation,
    local_scattering_correlation,
    ris_correlation,
    ula_steering,
    uspa_steering,
)
from .topology import (
    LargeScaleParams,
    LinkAngles,
    NetworkGeometry,
    generate_geometry,
    large_scale_params,
    link_angles,
    wrap_distance,
)

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0

T = TypeVar("T")


@dataclass
class ChannelMoments:
    """某一 RP 下所有 (m, u) 的 LoS 分量 (M, U, J) 與 NLoS 協方差 (M, U, J, J)"""
    h_bar: np.ndarray
    R_h: np.ndarray


@dataclass
class PatternStatistics:
    """某一 RP 下的通道統計量與對應的 LMMSE 估計矩陣"""
    moments: ChannelMoments
    estimation: EstimationResult


@dataclass
class CellFreeSystem:
    """
    一次佈建 (setup) 的完整系統描述

    correlations[m][c] 與 steering[m][c] 為 AP m 在 RP c 下 (限制於啟用元件) 的相關矩陣與導向向量。
    功率皆以雜訊功率正規化 (σ² = 1)。
    """
    geometry: NetworkGeometry
    params: LargeScaleParams
    angles: LinkAngles
    codebook: ReflectionPatternCodebook
    pilots: PilotBook
    correlations: List[List[CorrelationSet]]
    steering: List[List[LosSteering]]
    data_powers: np.ndarray
    tau_c: int
    fading: FadingMode
    ris_enabled: bool

    @property
    def M(self) -> int:
        return self.geometry.M

    @property
    def U(self) -> int:
        return self.geometry.U

    @property
    def J(self) -> int:
        return self.correlations[0][0].J

    @property
    def L_A(self) -> int:
        return self.codebook.L_A

    @property
    def tau_p(self) -> int:
        return self.pilots.tau_p

    @property
    def tau_u(self) -> int:
        return self.tau_c - self.tau_p

    @property
    def n_patterns(self) -> int:
        return self.codebook.C

    def gains(self, m: int) -> LinkGains:
        return LinkGains(
            beta=self.params.beta[m], xi=self.params.xi[m], alpha=float(self.params.alpha[m]),
            iota=self.params.iota[m], kappa=float(self.params.kappa[m]),
        )

    def link_stats(self, phases: PhaseShiftConfig, m: int, u: int, rp: int) -> AggregatedChannelStats:
        return aggregated_stats(
            self.gains(m), self.correlations[m][rp], phases.theta[m], self.steering[m][rp], u,
            self.fading, self.ris_enabled,
        )

    def moments(self, phases: PhaseShiftConfig, rp: int) -> ChannelMoments:
        """所有 AP 同時使用 RP rp 時的通道統計量"""
        h_bar = np.zeros((self.M, self.U, self.J), dtype=complex)
        R_h = np.zeros((self.M, self.U, self.J, self.J), dtype=complex)
        for m in range(self.M):
            for u in range(self.U):
                stats = self.link_stats(phases, m, u, rp)
                h_bar[m, u], R_h[m, u] = stats.h_bar, stats.R_h
        return ChannelMoments(h_bar=h_bar, R_h=R_h)

    def statistics(self, phases: PhaseShiftConfig) -> List[PatternStatistics]:
        """逐 RP 計算通道統計量與估計矩陣"""
        result = []
        for c in range(self.n_patterns):
            moments = self.moments(phases, c)
            result.append(PatternStatistics(
                moments=moments, estimation=estimation_statistics(moments.R_h, self.pilots)
            ))
        return result

    def draw_patterns(self, n: int, rng: np.random.Generator, rp: Optional[int] = None) -> np.ndarray:
        """(n, M) RP 索引：rp 給定時固定，否則每個試驗每個 RIS 均勻抽取"""
        if rp is not None:
            if not 0 <= rp < self.n_patterns:
                raise InvalidArgumentError(f"RP 索引超出範圍 [0, {self.n_patterns}): {rp}")
            return np.full((n, self.M), rp, dtype=int)
        return rng.integers(0, self.n_patterns, size=(n, self.M))

    def sample(
        self, phases: PhaseShiftConfig, rp: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """
        依各試驗、各 RIS 的 RP 取樣聚合通道

        Args:
            rp: (n, M) 每個試驗每個 RIS 的 RP 索引

        Returns:
            h (n, M, U, J)
        """
        n = rp.shape[0]
        h = np.zeros((n, self.M, self.U, self.J), dtype=complex)
        for m in range(self.M):
            gains = self.gains(m)
            for c in range(self.n_patterns):
                trials = np.flatnonzero(rp[:, m] == c)
                if trials.size == 0:
                    continue
                realization = sample_channel(
                    gains, self.correlations[m][c], phases.theta[m], self.steering[m][c], rng,
                    n_samples=trials.size, fading=self.fading, ris_enabled=self.ris_enabled,
                )
                h[trials, m] = realization.h
        return h


def build_system(
    config: ExperimentConfig,
    rng: np.random.Generator,
    M: Optional[int] = None,
    U: Optional[int] = None,
    J: Optional[int] = None,
    K: Optional[int] = None,
    ris_enabled: Optional[bool] = None,
    fading: Optional[str] = None,
) -> CellFreeSystem:
    """
    依配置建立系統；關鍵字參數可覆寫配置中的同名值 (用於掃描實驗)
    """
    s, ch, pw = config.system, config.channel, config.power
    M = s.M if M is None else M
    U = s.U if U is None else U
    J = s.J if J is None else J
    K = s.K if K is None else K
    ris_enabled = s.ris_enabled if ris_enabled is None else ris_enabled
    fading = FadingMode(ch.fading if fading is None else fading)

    geometry = generate_geometry(
        M, U, s.area_side, rng, s.ap_height, s.ris_height, s.ue_height, s.ap_ris_distance
    )
    params = large_scale_params(geometry, rng, ch.delta_f, ch.delta_sf, ch.d_dc)
    angles = link_angles(geometry)
    codebook = build_rp_codebook(s.G, K, s.L // s.G)

    wavelength = SPEED_OF_LIGHT / ch.carrier_frequency_hz
    element_size = ch.element_size_wl * wavelength
    positions = element_grid(s.L) * ch.ris_spacing_wl * wavelength
    asd = np.deg2rad(ch.asd_deg)
    P = max(1, int(round(ch.ap_paths_ratio * J)))
    d_ris_ap = wrap_distance(geometry.ris_positions, geometry.ap_positions, geometry.area_side)

    correlations: List[List[CorrelationSet]] = []
    steering: List[List[LosSteering]] = []
    for m in range(M):
        R_mu = np.stack([
            local_scattering_correlation(J, angles.ap_to_ue_az[m, u], asd, params.beta[m, u], ch.ap_spacing_wl)
            for u in range(U)
        ])
        R_AP = ap_correlation(J, P, d=float(d_ris_ap[m]), PL=float(params.alpha[m]), spacing=ch.ap_spacing_wl)
        a_ap = ula_steering(J, angles.ap_to_ris_az[m], ch.ap_spacing_wl)

        per_rp_corr, per_rp_los = [], []
        for active in codebook.element_sets:
            R_RIS = ris_correlation(positions[active], element_size, element_size, wavelength)
            per_rp_corr.append(CorrelationSet(
                R_mu=R_mu,
                R_tilde_mu=R_RIS,
                R_AP_m=R_AP,
                R_tilde_m=full_ris_ap_correlation(R_AP, R_RIS, J, len(active)),
            ))
            a_ris = uspa_steering(s.L, active, angles.ris_to_ap_az[m], angles.ris_to_ap_el[m], ch.ris_spacing_wl)
            z_bar = np.stack([
                uspa_steering(s.L, active, angles.ris_to_ue_az[m, u], angles.ris_to_ue_el[m, u], ch.ris_spacing_wl)
                for u in range(U)
            ])
            per_rp_los.append(LosSteering(a_ap=a_ap, a_ris=a_ris, z_bar=z_bar))
        correlations.append(per_rp_corr)
        steering.append(per_rp_los)

    noise_w = dbm_to_watt(pw.noise_dbm)
    snr = float(pw.ue_power_mw * 1e-3 / noise_w)
    system = CellFreeSystem(
        geometry=geometry,
        params=params,
        angles=angles,
        codebook=codebook,
        pilots=assign_pilots(U, s.tau_p, snr),
        correlations=correlations,
        steering=steering,
        data_powers=np.full(U, snr),
        tau_c=s.tau_c,
        fading=fading,
        ris_enabled=ris_enabled,
    )
    logger.debug(
        f"系統建立完成: M={M}, U={U}, J={J}, K={K}, L_A={codebook.L_A}, "
        f"RP 數={codebook.C}, 衰落={fading.value}, RIS={'啟用' if ris_enabled else '停用'}"
    )
    return system


def chunk_seeds(seed_seq: np.random.SeedSequence, n: int) -> List[np.random.SeedSequence]:
    """與全新 SeedSequence 的 spawn(n) 相同，但不改變 seed_seq 的內部計數"""
    return [
        np.random.SeedSequence(seed_seq.entropy, spawn_key=seed_seq.spawn_key + (i,), pool_size=seed_seq.pool_size)
        for i in range(n)
    ]


def run_chunks(
    task: Callable[[int, np.random.Generator], T],
    n_trials: int,
    seed,
    workers: int = 1,
    chunk_size: int = 1000,
) -> List[T]:
    """
    以固定大小分塊平行執行蒙地卡羅試驗

    第 i 塊使用 SeedSequence(seed).spawn(n_chunks)[i]；結果依塊順序回傳，
    因此與執行緒數無關、可逐位元重現。同一個 SeedSequence 重複傳入得到相同的亂數流。

    Args:
        task: task(n, rng) 執行 n 次試驗並回傳部分結果
    """
    if n_trials < 1:
        return []
    sizes = [chunk_size] * (n_trials // chunk_size)
    if n_trials % chunk_size:
        sizes.append(n_trials % chunk_size)
    seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = [np.random.default_rng(child) for child in chunk_seeds(seed_seq, len(sizes))]

    if workers <= 1 or len(sizes) == 1:
        return [task(n, rng) for n, rng in zip(sizes, streams)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, sizes, streams))


def ordered_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """依固定順序兩兩歸約，避免浮點加總順序依賴執行緒排程"""
    parts = list(parts)
    while len(parts) > 1:
        merged = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]
