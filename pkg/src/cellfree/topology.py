"""
RPM-RIS Cell-Free - 網路拓撲
AP/RIS/UE 佈建、環繞 (wrap-around) 距離、路徑損耗、相關陰影衰落與 Rician 因子
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.exceptions import InvalidArgumentError
from .linalg import matrix_sqrt

logger = logging.getLogger(__name__)

SHADOW_JITTER = 1e-10


@dataclass
class NetworkGeometry:
    """網路幾何：所有座標單位為公尺，形狀 (N, 3)"""
    ap_positions: np.ndarray
    ris_positions: np.ndarray
    ue_positions: np.ndarray
    area_side: float

    @property
    def M(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def U(self) -> int:
        return self.ue_positions.shape[0]


@dataclass
class LargeScaleParams:
    """
    大尺度參數

    beta: UE-AP 增益 (M, U)；xi: UE-RIS 路徑損耗 (M, U)；alpha: RIS-AP 路徑損耗 (M,)
    iota: UE-RIS Rician 因子 (M, U)；kappa: RIS-AP Rician 因子 (M,)
    shadow_F: UE-AP 陰影衰落 dB (M, U)；shadow_F_ris: UE-RIS 陰影衰落 dB (M, U)
    """
    beta: np.ndarray
    xi: np.ndarray
    alpha: np.ndarray
    iota: np.ndarray
    kappa: np.ndarray
    shadow_F: np.ndarray
    shadow_F_ris: np.ndarray


@dataclass
class LinkAngles:
    """由幾何推得的到達/離開角 (弧度)"""
    ap_to_ris_az: np.ndarray    # (M,) AP 看向 RIS 的方位角
    ris_to_ap_az: np.ndarray    # (M,)
    ris_to_ap_el: np.ndarray    # (M,)
    ris_to_ue_az: np.ndarray    # (M, U)
    ris_to_ue_el: np.ndarray    # (M, U)
    ap_to_ue_az: np.ndarray     # (M, U) 局部散射模型的標稱角


def generate_geometry(
    M: int,
    U: int,
    area_side: float,
    rng: np.random.Generator,
    ap_height: float = 12.5,
    ris_height: float = 30.0,
    ue_height: float = 1.5,
    ap_ris_distance: float = 10.0,
) -> NetworkGeometry:
    """
    在 area_side × area_side 區域內均勻佈建 AP 與 UE

    每個 RIS 位於其 AP 水平距離 ap_ris_distance 處，方位角均勻隨機，
    座標以環繞方式折回區域內。
    """
    if M < 1 or U < 1:
        raise InvalidArgumentError(f"M 與 U 必須 ≥ 1 (M={M}, U={U})")
    if area_side <= 0:
        raise InvalidArgumentError(f"area_side 必須為正: {area_side}")

    ap_xy = rng.uniform(0.0, area_side, size=(M, 2))
    ue_xy = rng.uniform(0.0, area_side, size=(U, 2))
    direction = rng.uniform(0.0, 2.0 * np.pi, size=M)
    ris_xy = np.mod(
        ap_xy + ap_ris_distance * np.column_stack([np.cos(direction), np.sin(direction)]),
        area_side,
    )

    def with_height(xy: np.ndarray, height: float) -> np.ndarray:
        return np.column_stack([xy, np.full(xy.shape[0], height)])

    geometry = NetworkGeometry(
        ap_positions=with_height(ap_xy, ap_height),
        ris_positions=with_height(ris_xy, ris_height),
        ue_positions=with_height(ue_xy, ue_height),
        area_side=float(area_side),
    )
    logger.debug(f"拓撲生成完成: M={M}, U={U}, 區域邊長={area_side} m")
    return geometry


def wrap_offset(p: np.ndarray, q: np.ndarray, area_side: float) -> np.ndarray:
    """q − p 的環繞位移；水平分量取最短的環面差，高度保持絕對差"""
    delta = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    horizontal = delta[..., :2]
    horizontal = horizontal - area_side * np.round(horizontal / area_side)
    return np.concatenate([horizontal, delta[..., 2:]], axis=-1)


def wrap_distance(p: np.ndarray, q: np.ndarray, area_side: float) -> np.ndarray:
    """三維環繞距離，水平分量逐軸取 min(|Δ|, area_side − |Δ|)"""
    delta = np.abs(np.asarray(q, dtype=float) - np.asarray(p, dtype=float))
    horizontal = np.minimum(delta[..., :2], area_side - delta[..., :2])
    return np.sqrt(np.sum(horizontal ** 2, axis=-1) + np.sum(delta[..., 2:] ** 2, axis=-1))


def pairwise_distance(a: np.ndarray, b: np.ndarray, area_side: float) -> np.ndarray:
    """a (N,3) 與 b (K,3) 間的環繞距離矩陣 (N, K)"""
    return wrap_distance(a[:, None, :], b[None, :, :], area_side)


def path_loss_nlos(d, shadow_F=0.0):
    """
    COST 321 Walfish-Ikegami 微蜂巢 NLoS 路徑損耗 (線性增益)

    PL[dB] = −34.53 − 38·log10(d/1m) + F
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise InvalidArgumentError("路徑損耗距離必須為正")
    gain_db = -34.53 - 38.0 * np.log10(d) + np.asarray(shadow_F, dtype=float)
    gain = 10.0 ** (gain_db / 10.0)
    return float(gain) if gain.ndim == 0 else gain


def rician_factor(d):
    """Rician 因子 10^(1.3 − 0.003·d)"""
    value = 10.0 ** (1.3 - 0.003 * np.asarray(d, dtype=float))
    return float(value) if value.ndim == 0 else value


def _correlated_field(
    positions: np.ndarray, area_side: float, delta_sf: float, d_dc: float, rng: np.random.Generator
) -> np.ndarray:
    """協方差 δ_sf²·2^(−d/d_dc) 的高斯場取樣"""
    cov = delta_sf ** 2 * 2.0 ** (-pairwise_distance(positions, positions, area_side) / d_dc)
    root = matrix_sqrt(cov, jitter=SHADOW_JITTER)
    return np.real(root @ rng.standard_normal(positions.shape[0]))


def correlated_shadow_fading(
    geometry: NetworkGeometry,
    delta_f: float = 0.5,
    delta_sf: float = 8.0,
    d_dc: float = 100.0,
    rng: Optional[np.random.Generator] = None,
    receivers: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    產生相關陰影衰落 F (dB, M×U)

    F_mu = √δ_f·a_u + √(1−δ_f)·b_m，a 依 UE 間距離相關，b 依接收端 (預設為 AP) 間距離相關。

    Args:
        receivers: 接收端座標 (M, 3)；None 時使用 AP 座標
    """
    if not 0.0 <= delta_f <= 1.0:
        raise InvalidArgumentError(f"delta_f 必須在 [0, 1]: {delta_f}")
    if d_dc <= 0:
        raise InvalidArgumentError(f"d_dc 必須為正: {d_dc}")
    rng = rng if rng is not None else np.random.default_rng()
    receivers = geometry.ap_positions if receivers is None else receivers

    a = _correlated_field(geometry.ue_positions, geometry.area_side, delta_sf, d_dc, rng)
    b = _correlated_field(receivers, geometry.area_side, delta_sf, d_dc, rng)
    return np.sqrt(delta_f) * a[None, :] + np.sqrt(1.0 - delta_f) * b[:, None]


def large_scale_params(
    geometry: NetworkGeometry,
    rng: np.random.Generator,
    delta_f: float = 0.5,
    delta_sf: float = 8.0,
    d_dc: float = 100.0,
) -> LargeScaleParams:
    """計算所有鏈路的路徑損耗、陰影衰落與 Rician 因子"""
    side = geometry.area_side
    d_ue_ap = pairwise_distance(geometry.ap_positions, geometry.ue_positions, side)
    d_ue_ris = pairwise_distance(geometry.ris_positions, geometry.ue_positions, side)
    # RIS m 只服務 AP m
    d_ris_ap = wrap_distance(geometry.ris_positions, geometry.ap_positions, side)

    shadow_ap = correlated_shadow_fading(geometry, delta_f, delta_sf, d_dc, rng)
    shadow_ris = correlated_shadow_fading(
        geometry, delta_f, delta_sf, d_dc, rng, receivers=geometry.ris_positions
    )

    return LargeScaleParams(
        beta=np.atleast_2d(path_loss_nlos(d_ue_ap, shadow_ap)),
        xi=np.atleast_2d(path_loss_nlos(d_ue_ris, shadow_ris)),
        alpha=np.atleast_1d(path_loss_nlos(d_ris_ap)),
        iota=np.atleast_2d(rician_factor(d_ue_ris)),
        kappa=np.atleast_1d(rician_factor(d_ris_ap)),
        shadow_F=shadow_ap,
        shadow_F_ris=shadow_ris,
    )


def link_angles(geometry: NetworkGeometry) -> LinkAngles:
    """由座標推得方位角與仰角"""
    side = geometry.area_side

    def azimuth(offset: np.ndarray) -> np.ndarray:
        return np.arctan2(offset[..., 1], offset[..., 0])

    def elevation(offset: np.ndarray) -> np.ndarray:
        return np.arctan2(offset[..., 2], np.hypot(offset[..., 0], offset[..., 1]))

    ap_ris = wrap_offset(geometry.ap_positions, geometry.ris_positions, side)
    ris_ap = -ap_ris
    ris_ue = wrap_offset(geometry.ris_positions[:, None, :], geometry.ue_positions[None, :, :], side)
    ap_ue = wrap_offset(geometry.ap_positions[:, None, :], geometry.ue_positions[None, :, :], side)

    return LinkAngles(
        ap_to_ris_az=azimuth(ap_ris),
        ris_to_ap_az=azimuth(ris_ap),
        ris_to_ap_el=elevation(ris_ap),
        ris_to_ue_az=azimuth(ris_ue),
        ris_to_ue_el=elevation(ris_ue),
        ap_to_ue_az=azimuth(ap_ue),
    )
