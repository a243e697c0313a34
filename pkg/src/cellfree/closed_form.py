"""
RPM-RIS Cell-Free - MR + LSFD 閉式 SINR
逐項計算期望訊號、非相干/相干干擾，並提供兩條互相驗證的統計量路徑：
精簡矩陣形式 (正式路徑) 與逐元素分情況展開 (參考路徑)。
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..core.exceptions import InvalidArgumentError, NumericFailureError
from .combining import LsfdStatistics
from .estimation import PilotBook
from .linalg import complex_normal, hermitian, matrix_sqrt, solve_hpd
from .system import PatternStatistics

logger = logging.getLogger(__name__)

LEMMA_CHUNK = 10_000


@dataclass
class SinrBreakdown:
    """
    UE u 的閉式 SINR 分項 (每個欄位為 M 維，對 AP 索引)

    xi_bar: 期望訊號 ξ̄_mu；mu: (U, M) 非相干干擾 μ_uk,m；
    w: (U, M) 相干干擾權重 w_uk,m (非共用導頻者為 0)；Delta: ||h̄_mu||²
    """
    u: int
    xi_bar: np.ndarray
    mu: np.ndarray
    w: np.ndarray
    Delta: np.ndarray
    copilots: np.ndarray
    sinr: Optional[float] = None


def desired_signal_vector(h_bar: np.ndarray, Gamma: np.ndarray, book: PilotBook, u: int) -> np.ndarray:
    """ξ̄_mu = h̄^H h̄ + p_u τ_p tr(Γ_mu)，h_bar (M,U,J)、Gamma (M,U,J,J)"""
    los = np.sum(np.abs(h_bar[:, u]) ** 2, axis=-1)
    estimated = book.pilot_powers[u] * book.tau_p * np.real(np.trace(Gamma[:, u], axis1=-2, axis2=-1))
    return los + estimated


def noncoherent_interference(
    h_bar: np.ndarray, R_h: np.ndarray, Gamma: np.ndarray, book: PilotBook, u: int, k: int
) -> np.ndarray:
    """
    μ_uk,m = p_u τ_p tr(Γ_mu R^h_mk) + h̄_mu^H R^h_mk h̄_mu + p_u τ_p h̄_mk^H Γ_mu h̄_mk + |h̄_mu^H h̄_mk|²

    估計通道 ĥ_mu 的 NLoS 協方差為 p_u τ_p Γ_mu，因此前後兩個 Γ 項皆乘 p_u。
    """
    scale = book.pilot_powers[u] * book.tau_p
    Gu, Rk = Gamma[:, u], R_h[:, k]
    hu, hk = h_bar[:, u], h_bar[:, k]
    trace_term = np.real(np.einsum("mij,mji->m", Gu, Rk))
    direct = np.real(np.einsum("mi,mij,mj->m", hu.conj(), Rk, hu))
    leakage = np.real(np.einsum("mi,mij,mj->m", hk.conj(), Gu, hk))
    los = np.abs(np.einsum("mi,mi->m", hu.conj(), hk)) ** 2
    return scale * trace_term + direct + scale * leakage + los


def coherent_weights(R_h: np.ndarray, Psi: np.ndarray, u: int, k: int) -> np.ndarray:
    """w_uk,m = tr(R^h_mk Ψ_mu^{-1} R^h_mu)"""
    M = R_h.shape[0]
    return np.array([
        np.trace(R_h[m, k] @ solve_hpd(Psi[m, u], R_h[m, u])) for m in range(M)
    ], dtype=complex)


def coherent_interference(
    breakdown: SinrBreakdown, c: np.ndarray, book: PilotBook, k: int
) -> float:
    """L_uk = p_u p_k τ_p² |tr(C_u W_uk)|²，只對 k ∈ P_u∖{u} 定義"""
    u = breakdown.u
    if k == u or not breakdown.copilots[k]:
        raise InvalidArgumentError(f"UE {k} 與 UE {u} 未共用導頻，無相干干擾")
    p = book.pilot_powers
    return float(p[u] * p[k] * book.tau_p ** 2 * np.abs(np.sum(np.asarray(c) * breakdown.w[k])) ** 2)


def breakdown(pattern: PatternStatistics, book: PilotBook, u: int) -> SinrBreakdown:
    """在單一 RP 下計算 UE u 的所有分項"""
    h_bar, R_h = pattern.moments.h_bar, pattern.moments.R_h
    est = pattern.estimation
    U = h_bar.shape[1]
    copilots = book.copilot_mask()[u]

    mu = np.stack([noncoherent_interference(h_bar, R_h, est.Gamma, book, u, k) for k in range(U)])
    w = np.zeros_like(mu, dtype=complex)
    for k in np.flatnonzero(copilots):
        if k != u:
            w[k] = coherent_weights(R_h, est.Psi, u, k)

    return SinrBreakdown(
        u=u,
        xi_bar=desired_signal_vector(h_bar, est.Gamma, book, u),
        mu=mu,
        w=w,
        Delta=np.sum(np.abs(h_bar[:, u]) ** 2, axis=-1),
        copilots=copilots,
    )


def averaged_breakdown(patterns: List[PatternStatistics], book: PilotBook, u: int) -> SinrBreakdown:
    """各分項對均勻 RP 先驗取平均"""
    parts = [breakdown(p, book, u) for p in patterns]
    return SinrBreakdown(
        u=u,
        xi_bar=np.mean([b.xi_bar for b in parts], axis=0),
        mu=np.mean([b.mu for b in parts], axis=0),
        w=np.mean([b.w for b in parts], axis=0),
        Delta=np.mean([b.Delta for b in parts], axis=0),
        copilots=parts[0].copilots,
    )


def closed_form_sinr(
    bd: SinrBreakdown, c: np.ndarray, data_powers: np.ndarray, book: PilotBook, sigma2: float = 1.0
) -> float:
    """
    精簡閉式 SINR

    δ = p̄_u|tr(C^H Υ)|² / (Σ_k p̄_k tr(C^H T_uk C) + Σ_{k∈P_u∖u} p̄_k L_uk + tr(C^H(σ²Υ − p̄_u Δ²)C))
    """
    c = np.asarray(c, dtype=complex)
    p_bar = np.asarray(data_powers, dtype=float)
    u = bd.u
    weight = np.abs(c) ** 2

    numerator = p_bar[u] * np.abs(np.sum(c.conj() * bd.xi_bar)) ** 2
    noncoherent = float(np.sum(p_bar * (bd.mu @ weight)))
    coherent = sum(
        p_bar[k] * coherent_interference(bd, c, book, k)
        for k in np.flatnonzero(bd.copilots) if k != u
    )
    noise = float(np.sum(weight * (sigma2 * bd.xi_bar - p_bar[u] * bd.Delta ** 2)))

    denominator = noncoherent + coherent + noise
    if not denominator > 0:
        raise NumericFailureError(f"閉式 SINR 分母非正 (UE {u}): {denominator:.3e}")
    sinr = float(numerator / denominator)
    bd.sinr = sinr
    return sinr


def _pattern_moments(pattern: PatternStatistics, book: PilotBook):
    """
    單一 RP 下 g_uk,m = ĥ_mu^H h_mk 的均值 a 與二階矩 s，形狀 (M, U, U)

    a = h̄_u^H h̄_k + 1[k∈P_u]·√(p_u p_k)·τ_p·w_uk
    s = |a|² + p_u τ_p tr(Γ_u R_k) + h̄_u^H R_k h̄_u + p_u τ_p h̄_k^H Γ_u h̄_k
    """
    h_bar, R_h = pattern.moments.h_bar, pattern.moments.R_h
    est = pattern.estimation
    p, tau = book.pilot_powers, book.tau_p
    mask = book.copilot_mask()

    # tr(R_k Ψ_u^{-1} R_u) = tr(R_k · gain_u^H)/√p_u，gain_u = √p_u R_u Ψ_u^{-1}
    w = np.einsum("mkij,muij->muk", R_h, est.gain.conj()) / np.sqrt(p)[None, :, None]
    mean = np.einsum("mui,mki->muk", h_bar.conj(), h_bar)
    mean = mean + mask[None] * np.sqrt(np.outer(p, p))[None] * tau * w

    scale = (p * tau)[None, :, None]
    variance = (
        scale * np.real(np.einsum("muij,mkji->muk", est.Gamma, R_h))
        + np.real(np.einsum("mui,mkij,muj->muk", h_bar.conj(), R_h, h_bar))
        + scale * np.real(np.einsum("mki,muij,mkj->muk", h_bar.conj(), est.Gamma, h_bar))
    )
    second = variance + np.abs(mean) ** 2
    norm = np.sum(np.abs(h_bar) ** 2, axis=-1) + np.real(np.trace(est.C_bar, axis1=-2, axis2=-1))
    return mean, second, norm


def _assemble(mean: np.ndarray, second: np.ndarray, norm: np.ndarray) -> LsfdStatistics:
    """由 RP 平均後的逐 AP 均值與二階矩組成 Ω_uk = diag(s̄ − |ā|²) + ā ā^H"""
    g_mean = mean.transpose(1, 2, 0)                    # (U, U, M)
    second = second.transpose(1, 2, 0)
    Omega = np.einsum("ukm,ukl->ukml", g_mean, g_mean.conj())
    diagonal = second - np.abs(g_mean) ** 2
    M = g_mean.shape[-1]
    Omega[..., np.arange(M), np.arange(M)] += diagonal
    return LsfdStatistics(g_mean=g_mean, Omega=hermitian(Omega), V=norm.T, n_trials=0)


def closed_form_statistics(patterns: List[PatternStatistics], book: PilotBook) -> LsfdStatistics:
    """MR 合併下 LSFD 統計量的精確閉式，對 RP 碼本均勻平均 (各 AP 的 RP 互相獨立)"""
    moments = [_pattern_moments(p, book) for p in patterns]
    mean = np.mean([m[0] for m in moments], axis=0)
    second = np.mean([m[1] for m in moments], axis=0)
    norm = np.mean([m[2] for m in moments], axis=0)
    return _assemble(mean, second, norm)


def reference_statistics(patterns: List[PatternStatistics], book: PilotBook) -> LsfdStatistics:
    """
    逐元素分情況展開的 LSFD 統計量，用來交叉驗證 closed_form_statistics

    m = n 時依 k = u、k ∈ P_u∖{u}、k ∉ P_u 三種情況計算 E{|ĥ_mu^H h_mk|²}；
    m ≠ n 時 AP 間獨立，為兩個均值的乘積。
    """
    p, tau = book.pilot_powers, book.tau_p
    first = patterns[0].moments.h_bar
    M, U, J = first.shape
    C = len(patterns)

    mean = np.zeros((C, M, U, U), dtype=complex)
    second = np.zeros((C, M, U, U))
    norm = np.zeros((C, M, U))
    for c, pattern in enumerate(patterns):
        h_bar, R_h = pattern.moments.h_bar, pattern.moments.R_h
        est = pattern.estimation
        for m in range(M):
            for u in range(U):
                hu, Cu = h_bar[m, u], est.C_bar[m, u]
                Psi_inv_Ru = solve_hpd(est.Psi[m, u], R_h[m, u])
                norm[c, m, u] = np.real(np.vdot(hu, hu) + np.trace(Cu))
                for k in range(U):
                    hk, Rk = h_bar[m, k], R_h[m, k]
                    Ck, Lk = est.C_bar[m, k], est.Lambda[m, k]
                    cross = np.vdot(hu, hk)
                    if k == u:
                        a = np.real(np.vdot(hu, hu) + np.trace(Cu))
                        s = (
                            a ** 2
                            + 2 * np.real(np.vdot(hu, Cu @ hu))
                            + np.real(np.trace(Cu @ Cu))
                            + np.real(np.trace(Lk @ (Cu + np.outer(hu, hu.conj()))))
                        )
                    elif book.assignment[k] == book.assignment[u]:
                        w = np.trace(Rk @ Psi_inv_Ru)
                        a = cross + np.sqrt(p[u] * p[k]) * tau * w
                        s = (
                            np.abs(a) ** 2
                            + np.real(np.vdot(hu, Ck @ hu))
                            + np.real(np.vdot(hk, Cu @ hk))
                            + np.real(np.trace(Cu @ Ck))
                            + np.real(np.trace(Lk @ (Cu + np.outer(hu, hu.conj()))))
                        )
                    else:
                        a = cross
                        s = np.real(np.trace(
                            (Rk + np.outer(hk, hk.conj())) @ (Cu + np.outer(hu, hu.conj()))
                        ))
                    mean[c, m, u, k] = a
                    second[c, m, u, k] = s

    mean_bar, second_bar, norm_bar = mean.mean(axis=0), second.mean(axis=0), norm.mean(axis=0)
    g_mean = mean_bar.transpose(1, 2, 0)
    Omega = np.zeros((U, U, M, M), dtype=complex)
    for u in range(U):
        for k in range(U):
            for m in range(M):
                for n in range(M):
                    if m == n:
                        Omega[u, k, m, n] = second_bar[m, u, k]
                    else:
                        Omega[u, k, m, n] = g_mean[u, k, m] * np.conj(g_mean[u, k, n])
    return LsfdStatistics(g_mean=g_mean, Omega=Omega, V=norm_bar.T, n_trials=0)


def lemma1_check(
    rows: int, cols: int, variance: float, A: np.ndarray, n_samples: int, rng: np.random.Generator
) -> float:
    """
    Z 為 rows×cols、元素 i.i.d. CN(0, ζ) 時，E{Z A Z^H} = ζ·tr(A)·I

    Returns:
        樣本均值與理論值的最大相對誤差 (理論值為 0 時為絕對誤差)
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (cols, cols):
        raise InvalidArgumentError(f"A 的形狀必須為 {(cols, cols)}: {A.shape}")
    total = np.zeros((rows, rows), dtype=complex)
    remaining = n_samples
    while remaining > 0:
        n = min(LEMMA_CHUNK, remaining)
        Z = np.sqrt(variance) * complex_normal(rng, (n, rows, cols))
        total += np.einsum("nij,jk,nlk->il", Z, A, Z.conj())
        remaining -= n
    empirical = total / n_samples
    expected = variance * np.trace(A) * np.eye(rows)
    scale = np.max(np.abs(expected))
    error = np.max(np.abs(empirical - expected))
    return float(error / scale) if scale > 0 else float(error)


def lemma2_check(R_a: np.ndarray, W: np.ndarray, n_samples: int, rng: np.random.Generator) -> float:
    """
    a ~ CN(0, R_a) 時，E{|a^H W a|²} = |tr(R_a W)|² + tr(R_a W R_a W^H)

    Returns:
        相對誤差 (理論值為 0 時為絕對誤差)
    """
    R_a = np.atleast_2d(np.asarray(R_a, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    root = matrix_sqrt(R_a)
    dim = R_a.shape[0]

    total = 0.0
    remaining = n_samples
    while remaining > 0:
        n = min(LEMMA_CHUNK, remaining)
        a = complex_normal(rng, (n, dim)) @ root.T
        total += float(np.sum(np.abs(np.einsum("ni,ij,nj->n", a.conj(), W, a)) ** 2))
        remaining -= n
    empirical = total / n_samples
    expected = float(np.abs(np.trace(R_a @ W)) ** 2 + np.real(np.trace(R_a @ W @ R_a @ W.conj().T)))
    if expected > 0:
        return abs(empirical - expected) / expected
    return abs(empirical)
