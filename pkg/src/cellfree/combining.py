"""
RPM-RIS Cell-Free - 本地合併與 LSFD
MR / L-MMSE 本地合併器、LSFD 統計量的蒙地卡羅估計、最佳 LSFD 權重與頻譜效率
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.config_manager import CombinerKind
from ..core.exceptions import InvalidArgumentError, NumericFailureError
from .estimation import project_pilots
from .linalg import hermitian, solve_hpd
from .rpm_channel import PhaseShiftConfig
from .system import CellFreeSystem, PatternStatistics, ordered_sum, run_chunks

logger = logging.getLogger(__name__)


@dataclass
class CombinerSet:
    """本地合併向量 v_mu，形狀 (..., U, J)"""
    v: np.ndarray
    kind: CombinerKind


def mr_combiner(h_hat: np.ndarray) -> CombinerSet:
    """MR：v = ĥ"""
    return CombinerSet(v=np.asarray(h_hat), kind=CombinerKind.MR)


def lmmse_combiner(
    h_hat: np.ndarray, Lambda: np.ndarray, powers: np.ndarray, sigma2: float = 1.0
) -> CombinerSet:
    """
    L-MMSE：v_u = p̄_u·[Σ_k p̄_k(ĥ_k ĥ_k^H + Λ_k) + σ²·I_J]^{-1}·ĥ_u

    Args:
        h_hat: (..., U, J) 同一 AP 上所有 UE 的估計通道
        Lambda: (..., U, J, J) 估計誤差協方差 (可廣播)
        powers: (U,) 資料功率 p̄
    """
    h_hat = np.asarray(h_hat)
    J = h_hat.shape[-1]
    powers = np.asarray(powers, dtype=float)
    outer = np.einsum("...ui,...uj->...uij", h_hat, h_hat.conj())
    Q = np.einsum("u,...uij->...ij", powers, outer + Lambda) + sigma2 * np.eye(J)
    try:
        solved = np.linalg.solve(Q, np.swapaxes(h_hat, -1, -2))
    except np.linalg.LinAlgError as e:
        raise NumericFailureError(f"L-MMSE 合併矩陣奇異: {e}") from e
    return CombinerSet(v=powers[:, None] * np.swapaxes(solved, -1, -2), kind=CombinerKind.LMMSE)


def conditional_mse(
    v: np.ndarray, h_hat: np.ndarray, Lambda: np.ndarray, powers: np.ndarray, u: int, sigma2: float = 1.0
) -> float:
    """
    以最佳純量縮放後的條件 MSE：1 − p̄_u·|v^H ĥ_u|² / (v^H Q v)

    Args:
        v: UE u 在單一 AP 的合併向量 (J,)
        h_hat: (U, J)；Lambda: (U, J, J)
    """
    powers = np.asarray(powers, dtype=float)
    outer = np.einsum("ui,uj->uij", h_hat, h_hat.conj())
    Q = np.einsum("u,uij->ij", powers, outer + Lambda) + sigma2 * np.eye(h_hat.shape[-1])
    energy = np.real(np.vdot(v, Q @ v))
    if energy <= 0:
        raise NumericFailureError("合併向量能量為零")
    return float(1.0 - powers[u] * np.abs(np.vdot(v, h_hat[u])) ** 2 / energy)


def combine(
    kind: CombinerKind, h_hat: np.ndarray, Lambda: np.ndarray, powers: np.ndarray, sigma2: float = 1.0
) -> CombinerSet:
    kind = CombinerKind(kind)
    if kind == CombinerKind.MR:
        return mr_combiner(h_hat)
    return lmmse_combiner(h_hat, Lambda, powers, sigma2)


@dataclass
class TrialBatch:
    """一批蒙地卡羅試驗：真實通道、估計通道與估計誤差協方差，皆為 (n, M, U, ...)"""
    h: np.ndarray
    h_hat: np.ndarray
    Lambda: np.ndarray
    patterns: np.ndarray


def draw_trials(
    system: CellFreeSystem,
    phases: PhaseShiftConfig,
    statistics: List[PatternStatistics],
    n: int,
    rng: np.random.Generator,
    rp: Optional[int] = None,
) -> TrialBatch:
    """取樣 RP、通道與導頻訊號，並以對應 RP 的統計量做 LMMSE 估計"""
    patterns = system.draw_patterns(n, rng, rp)
    h = system.sample(phases, patterns, rng)
    y_p = project_pilots(h, system.pilots, rng)

    ap = np.arange(system.M)[None, :]
    h_bar = np.stack([s.moments.h_bar for s in statistics])[patterns, ap]
    gain = np.stack([s.estimation.gain for s in statistics])[patterns, ap]
    Lambda = np.stack([s.estimation.Lambda for s in statistics])[patterns, ap]

    y_bar = project_pilots(h_bar, system.pilots)
    h_hat = h_bar + np.einsum("nmuij,nmuj->nmui", gain, y_p - y_bar)
    return TrialBatch(h=h, h_hat=h_hat, Lambda=Lambda, patterns=patterns)


@dataclass
class LsfdStatistics:
    """
    LSFD 所需的二階統計量

    g_mean: E{g_uk} (U, U, M)，g_uk,m = v_mu^H h_mk
    Omega: E{g_uk g_uk^H} (U, U, M, M)
    V: E{||v_mu||²} (U, M)，即 V_u 的對角
    """
    g_mean: np.ndarray
    Omega: np.ndarray
    V: np.ndarray
    n_trials: int

    @property
    def U(self) -> int:
        return self.g_mean.shape[0]

    @property
    def M(self) -> int:
        return self.g_mean.shape[-1]

    def desired(self, u: int) -> np.ndarray:
        """E{g_uu}"""
        return self.g_mean[u, u]

    def denominator(self, u: int, powers: np.ndarray, sigma2: float = 1.0) -> np.ndarray:
        """Σ_k p̄_k Ω_uk − p̄_u E{g_uu}E{g_uu}^H + σ² V_u"""
        powers = np.asarray(powers, dtype=float)
        g = self.desired(u)
        D = np.einsum("k,kml->ml", powers, self.Omega[u]) - powers[u] * np.outer(g, g.conj())
        return hermitian(D + sigma2 * np.diag(self.V[u]))


def accumulate_lsfd(v: np.ndarray, h: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    一批試驗的部分和

    Args:
        v, h: (n, M, U, J)

    Returns:
        (Σg (U,U,M), Σgg^H (U,U,M,M), Σ||v||² (U,M))
    """
    g = np.einsum("nmuj,nmkj->nmuk", v.conj(), h)
    g_sum = g.sum(axis=0).transpose(1, 2, 0)
    omega_sum = np.einsum("nmuk,nluk->ukml", g, g.conj())
    v_sum = (np.abs(v) ** 2).sum(axis=(0, 3)).T
    return g_sum, omega_sum, v_sum


def statistics_from_sums(parts, n_trials: int) -> LsfdStatistics:
    """依塊順序歸約部分和並正規化"""
    g_sum, omega_sum, v_sum = (ordered_sum([p[i] for p in parts]) for i in range(3))
    return LsfdStatistics(
        g_mean=g_sum / n_trials,
        Omega=hermitian(omega_sum / n_trials),
        V=v_sum / n_trials,
        n_trials=n_trials,
    )


def lsfd_statistics(
    system: CellFreeSystem,
    phases: PhaseShiftConfig,
    kind: CombinerKind = CombinerKind.MR,
    n_trials: int = 1000,
    seed=0,
    workers: int = 1,
    chunk_size: int = 1000,
    rp: Optional[int] = None,
    sigma2: float = 1.0,
) -> LsfdStatistics:
    """
    蒙地卡羅估計 LSFD 統計量

    rp 為 None 時 RP 對每個試驗、每個 RIS 均勻抽取 (對 RP 碼本平均)；否則固定為 rp。
    結果只依賴 (seed, n_trials, chunk_size)，與 workers 無關。
    """
    if n_trials < 1:
        raise InvalidArgumentError(f"n_trials 必須 ≥ 1: {n_trials}")
    kind = CombinerKind(kind)
    statistics = system.statistics(phases)

    def task(n: int, rng: np.random.Generator):
        batch = draw_trials(system, phases, statistics, n, rng, rp)
        combiner = combine(kind, batch.h_hat, batch.Lambda, system.data_powers, sigma2)
        return accumulate_lsfd(combiner.v, batch.h)

    parts = run_chunks(task, n_trials, seed, workers, chunk_size)
    logger.debug(f"LSFD 統計量完成: {kind.value}, {n_trials} 次試驗, {len(parts)} 塊")
    return statistics_from_sums(parts, n_trials)


def optimal_lsfd_weights(
    stats: LsfdStatistics, u: int, powers: np.ndarray, sigma2: float = 1.0
) -> np.ndarray:
    """c_opt = D_u^{-1} E{g_uu}"""
    D = stats.denominator(u, powers, sigma2)
    return solve_hpd(D, stats.desired(u))


def lsfd_sinr(
    stats: LsfdStatistics, u: int, c: np.ndarray, powers: np.ndarray, sigma2: float = 1.0
) -> float:
    """δ_u(c) = p̄_u|c^H E{g_uu}|² / (c^H D_u c)"""
    c = np.asarray(c, dtype=complex)
    D = stats.denominator(u, powers, sigma2)
    denominator = float(np.real(np.vdot(c, D @ c)))
    if denominator <= 0:
        raise NumericFailureError(f"LSFD SINR 分母非正 (UE {u}): {denominator:.3e}")
    return float(np.asarray(powers, dtype=float)[u] * np.abs(np.vdot(c, stats.desired(u))) ** 2 / denominator)


def se_from_sinr(delta, tau_u: int, tau_c: int):
    """(τ_u/τ_c)·log2(1 + δ)"""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise InvalidArgumentError("SINR 必須非負")
    se = (tau_u / tau_c) * np.log2(1.0 + delta)
    return float(se) if se.ndim == 0 else se


@dataclass
class SpectralEfficiency:
    """每個 UE 的 SINR、SE 與使用的 LSFD 權重"""
    sinr: np.ndarray
    se: np.ndarray
    weights: np.ndarray

    @property
    def sum_se(self) -> float:
        return float(np.sum(self.se))


def spectral_efficiency(
    stats: LsfdStatistics, powers: np.ndarray, tau_u: int, tau_c: int, sigma2: float = 1.0
) -> SpectralEfficiency:
    """以最佳 LSFD 權重計算所有 UE 的 SE；最佳點的 SINR 為 p̄_u E{g_uu}^H c_opt"""
    powers = np.asarray(powers, dtype=float)
    sinr = np.zeros(stats.U)
    weights = np.zeros((stats.U, stats.M), dtype=complex)
    for u in range(stats.U):
        weights[u] = optimal_lsfd_weights(stats, u, powers, sigma2)
        sinr[u] = max(0.0, powers[u] * float(np.real(np.vdot(stats.desired(u), weights[u]))))
    return SpectralEfficiency(sinr=sinr, se=se_from_sinr(sinr, tau_u, tau_c), weights=weights)
