"""
RPM-RIS Cell-Free - 空間相關模型
ULA/USPA 導向向量、AP 端相關矩陣、RIS sinc 相關、局部散射模型與 Kronecker 全相關矩陣
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_hermite

from ..core.exceptions import InvalidArgumentError, NumericFailureError
from .linalg import hermitian

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 30
QUADRATURE_TOLERANCE = 1e-8
MAX_DOUBLINGS = 4


def ula_steering(J: int, angle: float, spacing: float, P: Optional[int] = None) -> np.ndarray:
    """
    J 維 ULA 導向向量

    entry j = exp(−i·2π·spacing·j·sin(angle))；給定 P 時乘上 1/√P (用於 A 矩陣)，
    否則回傳未正規化版本 (用於 LoS G̅_m)。
    """
    if J < 1:
        raise InvalidArgumentError(f"J 必須 ≥ 1: {J}")
    vector = np.exp(-1j * 2.0 * np.pi * spacing * np.arange(J) * np.sin(angle))
    if P is not None:
        vector = vector / np.sqrt(P)
    return vector


def element_grid(L: int) -> np.ndarray:
    """√L×√L 平面上每個元件的 (h, v) 網格索引，h = l mod √L, v = ⌊l/√L⌋"""
    side = int(round(np.sqrt(L)))
    if side * side != L:
        raise InvalidArgumentError(f"L 必須是完全平方數: {L}")
    index = np.arange(L)
    return np.column_stack([index % side, index // side])


def uspa_steering(
    L: int, active_elements: Sequence[int], az: float, el: float, spacing: float
) -> np.ndarray:
    """
    USPA 導向向量，只包含啟用元件並保留其實體位置

    entry = exp(i·2π·spacing·(h·sin(az)cos(el) + v·sin(el)))
    """
    active = np.asarray(active_elements, dtype=int)
    if len(np.unique(active)) != len(active):
        raise InvalidArgumentError("啟用元件索引重複")
    if active.size and (active.min() < 0 or active.max() >= L):
        raise InvalidArgumentError(f"啟用元件索引超出 [0, {L - 1}]")
    grid = element_grid(L)[active]
    phase = grid[:, 0] * np.sin(az) * np.cos(el) + grid[:, 1] * np.sin(el)
    return np.exp(1j * 2.0 * np.pi * spacing * phase)


def ap_correlation(J: int, P: int, d: float = 1.0, PL: float = 0.0, spacing: float = 0.5) -> np.ndarray:
    """
    AP 端相關矩陣 R = R̃R̃^H，R̃ = d^(PL/2)·[A 0]

    A 的第 p 欄為 a_{φp}/√P，φ_p = −π/2 + (p−1)π/P。
    """
    if not 1 <= P <= J:
        raise InvalidArgumentError(f"需滿足 1 ≤ P ≤ J (P={P}, J={J})")
    angles = -np.pi / 2.0 + np.arange(P) * np.pi / P
    A = np.column_stack([ula_steering(J, phi, spacing, P=P) for phi in angles])
    R_tilde = d ** (PL / 2.0) * np.hstack([A, np.zeros((J, J - P), dtype=complex)])
    return hermitian(R_tilde @ R_tilde.conj().T)


def ris_correlation(
    active_positions: np.ndarray, d_H: float, d_V: float, wavelength: float
) -> np.ndarray:
    """
    RIS 空間相關 R_RIS = d_H·d_V·R_m，R_m(l,l′) = sinc(2·||u_l − u_l′||/λ)

    Args:
        active_positions: 啟用元件的實體座標 (L_A, 2)，單位公尺
    """
    positions = np.asarray(active_positions, dtype=float)
    distance = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)
    # np.sinc 即 sin(πx)/(πx)
    R_m = np.sinc(2.0 * distance / wavelength)
    return (d_H * d_V * R_m).astype(complex)


def _local_scattering_entries(
    J: int, nominal_angle: float, asd: float, spacing: float, nodes: int
) -> np.ndarray:
    x, w = roots_hermite(nodes)
    # χ = √2·σ·x 將高斯權重轉為 Hermite 權重
    chi = np.sqrt(2.0) * asd * x
    lags = np.arange(J)
    phases = np.exp(1j * 2.0 * np.pi * spacing * lags[:, None] * np.sin(nominal_angle + chi)[None, :])
    return phases @ w / np.sqrt(np.pi)


def local_scattering_correlation(
    J: int, nominal_angle: float, asd: float, beta: float, spacing: float = 0.5,
    nodes: int = QUADRATURE_NODES,
) -> np.ndarray:
    """
    高斯局部散射模型的 UE-AP 相關矩陣

    R(p,q) = β·E_χ{exp(i·2π·spacing·(p−q)·sin(θ+χ))}，χ ~ N(0, σ²)，以 Gauss–Hermite 求積計算。
    從 nodes 個節點開始逐次加倍，直到相鄰兩次的變化 ≤ 1e-8；
    加倍 MAX_DOUBLINGS 次仍未收斂則視為失敗。
    """
    if asd <= 0:
        raise InvalidArgumentError(f"ASD 必須為正: {asd}")

    first_column = _local_scattering_entries(J, nominal_angle, asd, spacing, nodes)
    for _ in range(MAX_DOUBLINGS):
        nodes *= 2
        refined = _local_scattering_entries(J, nominal_angle, asd, spacing, nodes)
        change = np.max(np.abs(refined - first_column))
        first_column = refined
        if change <= QUADRATURE_TOLERANCE:
            break
    else:
        raise NumericFailureError(f"局部散射積分不收斂 (變化量 {change:.2e}, 節點數 {nodes})")

    # Toeplitz：R(p,q) 只依賴 p − q
    lag = np.arange(J)[:, None] - np.arange(J)[None, :]
    R = np.where(lag >= 0, first_column[np.abs(lag)], np.conj(first_column[np.abs(lag)]))
    return hermitian(beta * R)


def full_ris_ap_correlation(R_AP: np.ndarray, R_RIS: np.ndarray, J: int, L_A: int) -> np.ndarray:
    """RIS-AP 全相關矩陣 R̃_m = (R_AP^T ⊗ R_RIS)/(J·L_A)"""
    if R_AP.shape != (J, J) or R_RIS.shape != (L_A, L_A):
        raise InvalidArgumentError(
            f"維度不符: R_AP {R_AP.shape} 應為 {(J, J)}, R_RIS {R_RIS.shape} 應為 {(L_A, L_A)}"
        )
    return hermitian(np.kron(R_AP.T, R_RIS) / (J * L_A))


def is_hermitian_psd(R: np.ndarray, tol: float = 1e-10) -> bool:
    """檢查 Hermitian 且最小特徵值 > −tol·tr(R)/dim"""
    if np.max(np.abs(R - R.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(R))):
        return False
    dim = R.shape[0]
    floor = -tol * max(float(np.real(np.trace(R))) / dim, np.finfo(float).tiny)
    return bool(np.linalg.eigvalsh(hermitian(R)).min() >= floor)
