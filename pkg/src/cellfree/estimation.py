"""
RPM-RIS Cell-Free - 通道估計
導頻分配、導頻投影訊號與聚合通道的 LMMSE 估計
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..core.exceptions import InvalidArgumentError
from .linalg import complex_normal, hermitian, solve_hpd

logger = logging.getLogger(__name__)


@dataclass
class PilotBook:
    """
    導頻分配

    Args:
        tau_p: 導頻長度
        assignment: 每個 UE 使用的導頻索引 t_u
        pilot_powers: 每個 UE 的導頻功率 p_u (以雜訊正規化)
    """
    tau_p: int
    assignment: np.ndarray
    pilot_powers: np.ndarray

    @property
    def U(self) -> int:
        return len(self.assignment)

    def cohort(self, u: int) -> np.ndarray:
        """與 UE u 共用導頻的 UE 集合 P_u (含 u 本身)"""
        return np.flatnonzero(self.assignment == self.assignment[u])

    @property
    def cohorts(self) -> List[np.ndarray]:
        return [self.cohort(u) for u in range(self.U)]

    def copilot_mask(self) -> np.ndarray:
        """(U, U) 布林矩陣，[u, k] 為 True 表示 k ∈ P_u"""
        return self.assignment[:, None] == self.assignment[None, :]


def assign_pilots(U: int, tau_p: int, pilot_powers=None) -> PilotBook:
    """輪詢分配 t_u = u mod τ_p"""
    if tau_p < 1:
        raise InvalidArgumentError(f"tau_p 必須 ≥ 1: {tau_p}")
    powers = np.ones(U) if pilot_powers is None else np.broadcast_to(
        np.asarray(pilot_powers, dtype=float), (U,)
    ).copy()
    return PilotBook(tau_p=tau_p, assignment=np.arange(U) % tau_p, pilot_powers=powers)


def project_pilots(
    h: np.ndarray, book: PilotBook, rng: Optional[np.random.Generator] = None, noise: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    所有 UE 的導頻投影訊號 y^p (形狀同 h：(..., U, J))

    y^p_mu = Σ_{k∈P_u} √p_k·τ_p·h_mk + n_mu，n ~ CN(0, τ_p·I)；共用導頻的 UE 得到完全相同的 y^p。

    Args:
        h: 通道 (..., U, J)
        noise: 每個導頻的雜訊 (..., τ_p, J)；None 時由 rng 取樣，rng 也為 None 則不加雜訊
    """
    tau_p = book.tau_p
    weighted = np.sqrt(book.pilot_powers)[:, None] * tau_p * h
    per_pilot = np.zeros(h.shape[:-2] + (tau_p, h.shape[-1]), dtype=complex)
    for t in range(tau_p):
        members = np.flatnonzero(book.assignment == t)
        if members.size:
            per_pilot[..., t, :] = weighted[..., members, :].sum(axis=-2)

    if noise is None and rng is not None:
        noise = np.sqrt(tau_p) * complex_normal(rng, per_pilot.shape)
    if noise is not None:
        per_pilot = per_pilot + noise
    return per_pilot[..., book.assignment, :]


def pilot_projection(
    h: np.ndarray, book: PilotBook, u: int, rng: Optional[np.random.Generator] = None,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """UE u 的導頻投影訊號 (..., J)"""
    if not 0 <= u < book.U:
        raise InvalidArgumentError(f"UE 索引超出範圍: {u}")
    return project_pilots(h, book, rng, noise)[..., u, :]


@dataclass
class EstimationMatrices:
    """單一 (m, u) 的估計矩陣 Ψ, Γ, Λ, C̄"""
    Psi: np.ndarray
    Gamma: np.ndarray
    Lambda: np.ndarray
    C_bar: np.ndarray


@dataclass
class EstimationResult:
    """
    LMMSE 估計結果

    h_hat: (..., M, U, J)；Psi/Gamma/Lambda/C_bar: (M, U, J, J)；
    gain: √p_u·R^h·Ψ^{-1}，(M, U, J, J)
    """
    h_hat: Optional[np.ndarray]
    Psi: np.ndarray
    Gamma: np.ndarray
    Lambda: np.ndarray
    C_bar: np.ndarray
    gain: np.ndarray


def estimation_matrices(R_h: np.ndarray, book: PilotBook, u: int) -> EstimationMatrices:
    """
    單一 AP 上 UE u 的估計矩陣

    Args:
        R_h: 該 AP 所有 UE 的 NLoS 協方差 (U, J, J)
    """
    cohort = book.cohort(u)
    J = R_h.shape[-1]
    tau_p = book.tau_p
    p = book.pilot_powers

    Psi = hermitian(np.einsum("k,kij->ij", p[cohort] * tau_p, R_h[cohort]) + np.eye(J))
    Gamma = hermitian(R_h[u] @ solve_hpd(Psi, R_h[u]))
    C_bar = p[u] * tau_p * Gamma
    Lambda = hermitian(R_h[u] - C_bar)
    return EstimationMatrices(Psi=Psi, Gamma=Gamma, Lambda=Lambda, C_bar=C_bar)


def estimation_statistics(R_h: np.ndarray, book: PilotBook) -> EstimationResult:
    """所有 (m, u) 的估計矩陣；R_h 形狀 (M, U, J, J)"""
    M, U, J, _ = R_h.shape
    shape = (M, U, J, J)
    Psi, Gamma, Lambda, C_bar, gain = (np.zeros(shape, dtype=complex) for _ in range(5))
    for m in range(M):
        for u in range(U):
            mats = estimation_matrices(R_h[m], book, u)
            Psi[m, u], Gamma[m, u], Lambda[m, u], C_bar[m, u] = (
                mats.Psi, mats.Gamma, mats.Lambda, mats.C_bar
            )
            # √p_u R^h Ψ^{-1} = (Ψ^{-1} R^h)^H √p_u
            gain[m, u] = np.sqrt(book.pilot_powers[u]) * solve_hpd(mats.Psi, R_h[m, u]).conj().T
    return EstimationResult(h_hat=None, Psi=Psi, Gamma=Gamma, Lambda=Lambda, C_bar=C_bar, gain=gain)


def lmmse_estimate(
    y_p: np.ndarray, h_bar: np.ndarray, R_h_u: np.ndarray, Psi: np.ndarray, book: PilotBook, u: int
) -> np.ndarray:
    """
    ĥ = h̄_u + √p_u·R^h·Ψ^{-1}·(y^p − ȳ^p)，ȳ^p = Σ_{k∈P_u} √p_k·τ_p·h̄_k

    Args:
        y_p: 導頻投影訊號 (..., J)
        h_bar: 該 AP 所有 UE 的 LoS 分量 (U, J)
    """
    cohort = book.cohort(u)
    y_bar = np.einsum("k,kj->j", np.sqrt(book.pilot_powers[cohort]) * book.tau_p, h_bar[cohort])
    innovation = np.asarray(y_p) - y_bar
    correction = solve_hpd(Psi, np.moveaxis(innovation, -1, 0).reshape(len(y_bar), -1))
    correction = (R_h_u @ correction).T.reshape(innovation.shape)
    return h_bar[u] + np.sqrt(book.pilot_powers[u]) * correction


def estimate_channels(
    y_p: np.ndarray, h_bar: np.ndarray, result: EstimationResult, book: PilotBook
) -> np.ndarray:
    """
    批次 LMMSE 估計

    Args:
        y_p: (n, M, U, J) 導頻投影訊號
        h_bar: (M, U, J) LoS 分量
        result: estimation_statistics 的輸出 (提供 gain)

    Returns:
        ĥ (n, M, U, J)
    """
    y_bar = project_pilots(h_bar, book)
    return h_bar[None] + np.einsum("muij,nmuj->nmui", result.gain, y_p - y_bar[None])
