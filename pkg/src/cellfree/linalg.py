"""
RPM-RIS Cell-Free - 共用線性代數工具
Hermitian 矩陣平方根、正定求解與複高斯取樣
"""

import numpy as np
import scipy.linalg

from ..core.exceptions import NumericFailureError

# 相對於 trace/dim 的負特徵值容忍度
PSD_TOLERANCE = 1e-10


def hermitian(matrix: np.ndarray) -> np.ndarray:
    """回傳 (A + A^H)/2，消除捨入造成的非對稱"""
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2).conj())


def matrix_sqrt(cov: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """
    PSD 矩陣的 Hermitian 平方根 S (S S^H = cov)

    Args:
        cov: Hermitian 半正定矩陣
        jitter: 非零時，若出現明顯負特徵值則加入 jitter·I 後重試一次

    Returns:
        Hermitian 平方根；微小負特徵值截為 0
    """
    cov = hermitian(np.asarray(cov))
    dim = cov.shape[-1]
    scale = max(float(np.real(np.trace(cov))) / dim, np.finfo(float).tiny)

    try:
        eigvals, eigvecs = scipy.linalg.eigh(cov)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericFailureError(f"特徵分解失敗: {e}") from e

    if eigvals.min() < -PSD_TOLERANCE * scale:
        if jitter <= 0.0:
            raise NumericFailureError(f"共變異數矩陣非半正定 (min eig = {eigvals.min():.3e})")
        eigvals, eigvecs = scipy.linalg.eigh(cov + jitter * scale * np.eye(dim))
        if eigvals.min() < -PSD_TOLERANCE * scale:
            raise NumericFailureError(f"加入 jitter 後仍非半正定 (min eig = {eigvals.min():.3e})")

    root = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * root) @ eigvecs.conj().T


def solve_hpd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """以 Cholesky 分解求解 Hermitian 正定系統 matrix·x = rhs"""
    try:
        factor = scipy.linalg.cho_factor(hermitian(matrix), lower=True)
    except np.linalg.LinAlgError as e:
        raise NumericFailureError(f"矩陣非正定，無法求解: {e}") from e
    return scipy.linalg.cho_solve(factor, rhs)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """標準循環對稱複高斯 CN(0, 1) 樣本"""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
