"""
RPM-RIS Cell-Free - 反射圖樣調變 (RPM) 通道模型
RP 碼本、相移配置、聚合通道統計量與通道實現取樣
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.config_manager import FadingMode
from ..core.exceptions import InvalidArgumentError
from .linalg import complex_normal, hermitian, matrix_sqrt

logger = logging.getLogger(__name__)


@dataclass
class ReflectionPatternCodebook:
    """
    RP 碼本

    Args:
        G: 每個 RIS 的區塊數
        K: 每個 RP 啟用的區塊數
        N: 每個區塊的元件數
        patterns: C 組啟用區塊索引 (字典序)
        element_sets: 對應的啟用元件索引，每組 L_A = N·K 個
    """
    G: int
    K: int
    N: int
    patterns: List[Tuple[int, ...]]
    element_sets: List[np.ndarray]

    @property
    def C(self) -> int:
        return len(self.patterns)

    @property
    def L1(self) -> int:
        return self.C.bit_length() - 1

    @property
    def L(self) -> int:
        return self.G * self.N

    @property
    def L_A(self) -> int:
        return self.N * self.K


def build_rp_codebook(G: int, K: int, N: int) -> ReflectionPatternCodebook:
    """列舉 C(G,K) 種組合 (字典序) 並保留前 2^L1 種，L1 = ⌊log2 C(G,K)⌋"""
    if not 1 <= K <= G:
        raise InvalidArgumentError(f"需滿足 1 ≤ K ≤ G (K={K}, G={G})")
    if N < 1:
        raise InvalidArgumentError(f"N 必須 ≥ 1: {N}")

    total = math.comb(G, K)
    L1 = total.bit_length() - 1
    patterns = list(combinations(range(G), K))[: 2 ** L1]
    element_sets = [
        np.concatenate([np.arange(g * N, g * N + N) for g in blocks]) for blocks in patterns
    ]
    logger.debug(f"RP 碼本: G={G}, K={K}, N={N}, C={len(patterns)}, L1={L1}")
    return ReflectionPatternCodebook(G=G, K=K, N=N, patterns=patterns, element_sets=element_sets)


def map_bits_to_rp(bits: Union[int, Sequence[int]], codebook: ReflectionPatternCodebook) -> int:
    """將 L1 位元字 (整數或 MSB 在前的位元序列) 映射為 RP 索引"""
    if isinstance(bits, (int, np.integer)):
        word = int(bits)
    else:
        bits = list(bits)
        if len(bits) != codebook.L1 or any(b not in (0, 1) for b in bits):
            raise InvalidArgumentError(f"位元序列長度必須為 L1={codebook.L1} 且只含 0/1")
        word = int("".join(str(b) for b in bits), 2) if bits else 0
    if not 0 <= word < codebook.C:
        raise InvalidArgumentError(f"位元字 {word} 超出碼本範圍 [0, {codebook.C})")
    return word


def rpm_bit_rate(codebook: ReflectionPatternCodebook, M: int, tau_c: int, bandwidth: float) -> float:
    """RPM 附加資訊速率 (bit/s)：每個相干區塊每個 RIS 傳送 L1 位元"""
    return codebook.L1 * M * bandwidth / tau_c


@dataclass
class PhaseShiftConfig:
    """每個 RIS 的 L_A 個相移 (弧度)，形狀 (M, L_A)"""
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        if np.any(np.abs(self.theta) > np.pi + 1e-12):
            raise InvalidArgumentError("相移必須位於 [−π, π]")

    @classmethod
    def random(cls, M: int, L_A: int, rng: np.random.Generator) -> "PhaseShiftConfig":
        return cls(rng.uniform(-np.pi, np.pi, size=(M, L_A)))

    @classmethod
    def zeros(cls, M: int, L_A: int) -> "PhaseShiftConfig":
        return cls(np.zeros((M, L_A)))

    def reflection(self, m: int) -> np.ndarray:
        """Φ_m 的對角元素 exp(iθ)"""
        return np.exp(1j * self.theta[m])


@dataclass
class LinkGains:
    """單一 AP m 的大尺度增益 (U 維向量對應每個 UE)"""
    beta: np.ndarray
    xi: np.ndarray
    alpha: float
    iota: np.ndarray
    kappa: float


@dataclass
class LosSteering:
    """
    LoS 導向向量 (已限制在當前 RP 的啟用元件上)

    a_ap: AP 端 ULA (J,)；a_ris: RIS 朝 AP 的 USPA (L_A,)；z_bar: RIS 朝各 UE 的 USPA (U, L_A)
    """
    a_ap: np.ndarray
    a_ris: np.ndarray
    z_bar: np.ndarray

    @property
    def G_bar(self) -> np.ndarray:
        return np.outer(self.a_ap, self.a_ris.conj())


@dataclass
class CorrelationSet:
    """
    AP m 在某一 RP 下的相關矩陣

    R_mu: (U, J, J)；R_tilde_mu: (L_A, L_A)；R_AP_m: (J, J)；R_tilde_m: (J·L_A, J·L_A)
    """
    R_mu: np.ndarray
    R_tilde_mu: np.ndarray
    R_AP_m: np.ndarray
    R_tilde_m: np.ndarray

    @property
    def J(self) -> int:
        return self.R_AP_m.shape[0]

    @property
    def L_A(self) -> int:
        return self.R_tilde_mu.shape[0]

    @cached_property
    def blocks(self) -> np.ndarray:
        """R̃_m 重排為 (J, L_A, J, L_A)，block(j,j′) = blocks[j, :, j′, :]"""
        return self.R_tilde_m.reshape(self.J, self.L_A, self.J, self.L_A)

    @cached_property
    def root_mu(self) -> np.ndarray:
        return np.stack([matrix_sqrt(R) for R in self.R_mu])

    @cached_property
    def root_tilde_mu(self) -> np.ndarray:
        return matrix_sqrt(self.R_tilde_mu)

    @cached_property
    def root_cascade(self) -> np.ndarray:
        """vec(G̃) (列優先) 的取樣平方根；協方差為 R̃_m 在 RIS 索引上的部分轉置"""
        n = self.J * self.L_A
        partial = self.blocks.transpose(0, 3, 2, 1).reshape(n, n)
        return matrix_sqrt(partial)


@dataclass
class AggregatedChannelStats:
    """聚合通道統計量 (AP m, UE u)"""
    h_bar: np.ndarray
    R_h: np.ndarray
    Pi: np.ndarray
    Xi: np.ndarray
    b: float
    term1: np.ndarray = field(repr=False, default=None)


@dataclass
class ChannelRealization:
    """通道實現；h 形狀 (n, U, J)，保留分量時 f: (n,U,J), G: (n,J,L_A), z: (n,U,L_A)"""
    h: np.ndarray
    f: Optional[np.ndarray] = None
    G: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None


def fading_weights(kappa, iota, fading: FadingMode = FadingMode.RICIAN):
    """
    RIS-AP 與 UE-RIS 鏈路的 LoS/NLoS 功率權重

    Returns:
        (g_los, g_nlos, z_los, z_nlos)
    """
    kappa = np.asarray(kappa, dtype=float)
    iota = np.asarray(iota, dtype=float)
    if fading == FadingMode.RICIAN:
        return kappa / (kappa + 1), 1 / (kappa + 1), iota / (iota + 1), 1 / (iota + 1)
    if fading == FadingMode.RAYLEIGH:
        return np.zeros_like(kappa), np.ones_like(kappa), np.zeros_like(iota), np.ones_like(iota)
    if fading == FadingMode.PURE_LOS:
        return np.ones_like(kappa), np.zeros_like(kappa), np.ones_like(iota), np.zeros_like(iota)
    raise InvalidArgumentError(f"未知的衰落模式: {fading}")


def block_trace(B: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    """(j,j′) 元素為 tr(B·R̃_m[block j,j′]) 的 J×J 矩陣"""
    return np.einsum("ab,jbka->jk", B, blocks)


def _check_dimensions(corr: CorrelationSet, theta: np.ndarray, los: LosSteering) -> None:
    J, L_A = corr.J, corr.L_A
    if theta.shape != (L_A,) or los.a_ris.shape != (L_A,) or los.z_bar.shape[-1] != L_A:
        raise InvalidArgumentError(
            f"相移/導向向量維度與 RP 不符 (L_A={L_A}, theta={theta.shape}, z_bar={los.z_bar.shape})"
        )
    if los.a_ap.shape != (J,) or corr.R_tilde_m.shape != (J * L_A, J * L_A) or corr.R_mu.shape[1:] != (J, J):
        raise InvalidArgumentError(f"相關矩陣維度與 J={J}, L_A={L_A} 不符")


def aggregated_stats(
    gains: LinkGains,
    corr: CorrelationSet,
    theta: np.ndarray,
    los: LosSteering,
    u: int,
    fading: FadingMode = FadingMode.RICIAN,
    ris_enabled: bool = True,
) -> AggregatedChannelStats:
    """
    聚合通道 h_mu = f_mu + G_m Φ_m z_mu 的均值與 NLoS 協方差

    R^h = b·κ·G̅ΦR̃_muΦ^H G̅^H + R_mu + Π_mu + Ξ_mu
    """
    theta = np.asarray(theta, dtype=float)
    _check_dimensions(corr, theta, los)
    J = corr.J
    R_direct = corr.R_mu[u]

    if not ris_enabled:
        zero = np.zeros((J, J), dtype=complex)
        return AggregatedChannelStats(
            h_bar=np.zeros(J, dtype=complex), R_h=R_direct.copy(), Pi=zero, Xi=zero.copy(),
            b=0.0, term1=zero.copy(),
        )

    g_los, g_nlos, z_los, z_nlos = fading_weights(gains.kappa, gains.iota[u], fading)
    scale = gains.alpha * gains.xi[u]
    phi = np.exp(1j * theta)

    reflected = phi * los.z_bar[u]                       # Φ z̄
    steered_gain = np.vdot(los.a_ris, reflected)         # a_ris^H Φ z̄
    h_bar = np.sqrt(scale * g_los * z_los) * los.a_ap * steered_gain

    B_tilde = (phi[:, None] * corr.R_tilde_mu) * phi.conj()[None, :]    # Φ R̃_mu Φ^H
    ris_quadratic = np.real(np.vdot(los.a_ris, B_tilde @ los.a_ris))
    term1 = scale * g_los * z_nlos * ris_quadratic * np.outer(los.a_ap, los.a_ap.conj())

    B = np.outer(reflected, reflected.conj())
    Pi = scale * g_nlos * z_los * block_trace(B, corr.blocks)
    Xi = scale * g_nlos * z_nlos * block_trace(B_tilde, corr.blocks)

    R_h = hermitian(term1 + R_direct + Pi + Xi)
    return AggregatedChannelStats(
        h_bar=h_bar, R_h=R_h, Pi=hermitian(Pi), Xi=hermitian(Xi),
        b=float(scale * g_nlos * z_nlos), term1=hermitian(term1),
    )


def sample_channel(
    gains: LinkGains,
    corr: CorrelationSet,
    theta: np.ndarray,
    los: LosSteering,
    rng: np.random.Generator,
    n_samples: int = 1,
    fading: FadingMode = FadingMode.RICIAN,
    ris_enabled: bool = True,
    retain: bool = False,
) -> ChannelRealization:
    """
    取樣 AP m 上所有 UE 的聚合通道 h = f + G Φ z

    f ~ CN(0, R_mu)、z̃ ~ CN(0, R̃_mu)、vec(G̃) ~ CN(0, ·)，同一 AP 的所有 UE 共用 G̃_m。
    """
    theta = np.asarray(theta, dtype=float)
    _check_dimensions(corr, theta, los)
    J, L_A = corr.J, corr.L_A
    U = corr.R_mu.shape[0]

    f = np.einsum("uij,nuj->nui", corr.root_mu, complex_normal(rng, (n_samples, U, J)))
    if not ris_enabled:
        return ChannelRealization(h=f, f=f if retain else None)

    g_los, g_nlos, z_los, z_nlos = fading_weights(gains.kappa, gains.iota, fading)
    G_tilde = (complex_normal(rng, (n_samples, J * L_A)) @ corr.root_cascade.T).reshape(n_samples, J, L_A)
    G = np.sqrt(gains.alpha) * (np.sqrt(g_los) * los.G_bar[None] + np.sqrt(g_nlos) * G_tilde)

    z_tilde = complex_normal(rng, (n_samples, U, L_A)) @ corr.root_tilde_mu.T
    z = np.sqrt(gains.xi)[None, :, None] * (
        np.sqrt(z_los)[None, :, None] * los.z_bar[None] + np.sqrt(z_nlos)[None, :, None] * z_tilde
    )

    phi = np.exp(1j * theta)
    h = f + np.einsum("njl,nul->nuj", G, phi * z)
    if retain:
        return ChannelRealization(h=h, f=f, G=G, z=z, phi=phi)
    return ChannelRealization(h=h)
