"""
RPM-RIS Cell-Free - 能耗模型
每個 AP 的互資訊容量、上行總功耗與能量效率
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.config_manager import PowerConfig
from ..core.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

GBPS = 1.0e9


def dbm_to_watt(value_dbm):
    """10^((x − 30)/10)"""
    watt = 10.0 ** ((np.asarray(value_dbm, dtype=float) - 30.0) / 10.0)
    return float(watt) if watt.ndim == 0 else watt


@dataclass
class PowerModel:
    """
    功耗模型參數 (SI 單位)

    rho_ap / rho_bh: 每 bit/s 的訊務功耗 (W)；p_ris_element: 每個啟用元件的功耗 P(b)
    """
    rho_ap: float
    rho_bh: float
    p_ap_fix: float
    p_ap_antenna: float
    p_bh_fix: float
    p_ris_element: float
    alpha_ue: float
    p_ue_fix: float
    bandwidth: float
    sigma2: float

    def __post_init__(self):
        for name in ("rho_ap", "rho_bh", "p_ap_fix", "p_ap_antenna", "p_bh_fix",
                     "p_ris_element", "p_ue_fix", "bandwidth", "sigma2"):
            if getattr(self, name) < 0:
                raise InvalidArgumentError(f"{name} 不可為負: {getattr(self, name)}")
        if not 0 < self.alpha_ue <= 1:
            raise InvalidArgumentError(f"alpha_ue 必須在 (0, 1]: {self.alpha_ue}")

    @classmethod
    def from_config(cls, power: PowerConfig, p_ris_element_dbm: Optional[float] = None) -> "PowerModel":
        """由配置建立；p_ris_element_dbm 可覆寫 P(b) (ee-vs-rho 掃描)"""
        rho_dbm = power.p_ris_element_dbm if p_ris_element_dbm is None else p_ris_element_dbm
        return cls(
            rho_ap=power.rho_ap_w_per_gbps / GBPS,
            rho_bh=power.rho_bh_w_per_gbps / GBPS,
            p_ap_fix=power.p_ap_fix_w,
            p_ap_antenna=power.p_ap_antenna_w,
            p_bh_fix=power.p_bh_fix_w,
            p_ris_element=dbm_to_watt(rho_dbm),
            alpha_ue=power.alpha_ue,
            p_ue_fix=dbm_to_watt(power.p_ue_fix_dbm),
            bandwidth=power.bandwidth_hz,
            sigma2=dbm_to_watt(power.noise_dbm),
        )

    @property
    def traffic_rho(self) -> float:
        """ϱ̃ = ϱ^AP + ϱ^BH"""
        return self.rho_ap + self.rho_bh


def capacity_per_ap(H: np.ndarray, powers: np.ndarray, sigma2: float = 1.0) -> float:
    """
    C̄_m = E{log2 det(I_J + H P H^H / σ²)}

    Args:
        H: (n, J, U) 通道取樣，每欄為一個 UE 的通道
        powers: (U,) 發射功率，與 sigma2 同單位
    """
    H = np.asarray(H)
    if H.ndim == 2:
        H = H[None]
    if H.shape[0] < 1:
        raise InvalidArgumentError("至少需要一個通道取樣")
    J = H.shape[1]
    gram = np.einsum("nju,u,nku->njk", H, np.asarray(powers, dtype=float), H.conj()) / sigma2
    _, logdet = np.linalg.slogdet(np.eye(J) + gram)
    return float(np.mean(logdet) / np.log(2.0))


def network_capacity(h: np.ndarray, powers: np.ndarray, sigma2: float = 1.0) -> np.ndarray:
    """所有 AP 的 C̄_m；h 形狀 (n, M, U, J)"""
    return np.array([
        capacity_per_ap(np.swapaxes(h[:, m], -1, -2), powers, sigma2) for m in range(h.shape[1])
    ])


def total_power(
    model: PowerModel,
    ue_powers_w: np.ndarray,
    capacities: np.ndarray,
    L_A: int,
    M: int,
    J: int,
    tau_u: int,
    tau_c: int,
) -> float:
    """
    P_tot = P_fix + Σ_u p̄_u/α + M·L_A·P(b) + B·(τ_u/τ_c)·Σ_m C̄_m·ϱ̃

    P_fix = Σ_m(P^AP,fix + J·P^AP,a + P^BH,fix) + Σ_u P^UE,fix；只有啟用元件消耗 P(b)。
    """
    ue_powers_w = np.atleast_1d(np.asarray(ue_powers_w, dtype=float))
    capacities = np.atleast_1d(np.asarray(capacities, dtype=float))
    if capacities.shape[0] != M:
        raise InvalidArgumentError(f"容量向量長度 {capacities.shape[0]} 與 M={M} 不符")

    fixed = M * (model.p_ap_fix + J * model.p_ap_antenna + model.p_bh_fix) + ue_powers_w.size * model.p_ue_fix
    transmit = float(np.sum(ue_powers_w)) / model.alpha_ue
    ris = M * L_A * model.p_ris_element
    traffic = model.bandwidth * (tau_u / tau_c) * float(np.sum(capacities)) * model.traffic_rho
    return float(fixed + transmit + ris + traffic)


def energy_efficiency(sum_se: float, p_tot: float, bandwidth: float) -> float:
    """η_EE = B·η_SE / P_tot (bit/Joule)"""
    if p_tot <= 0:
        raise InvalidArgumentError(f"總功耗必須為正: {p_tot}")
    return float(bandwidth * sum_se / p_tot)
