"""
RPM-RIS Cell-Free - 配置管理系統
統一管理模擬參數、實驗設定與 YAML 配置文件
"""

import os
import yaml
from typing import Any, Dict, List, Optional, get_args, get_origin, get_type_hints
from pathlib import Path
from dataclasses import dataclass, asdict, field, fields
from enum import Enum
import logging

from .exceptions import ConfigError


class Profile(Enum):
    """配置檔案類型枚舉"""
    DESK = "desk"
    FULL = "full"


class FadingMode(Enum):
    """RIS 鏈路衰落模式"""
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"
    PURE_LOS = "pure-los"


class CombinerKind(Enum):
    """本地合併器類型"""
    MR = "mr"
    LMMSE = "lmmse"


EXPERIMENT_KINDS = (
    "se-cdf", "se-vs-m", "se-vs-u", "se-vs-j",
    "ee-vs-m", "ee-vs-u", "ee-vs-rho",
    "optimize", "oracle-suite", "timing",
)


@dataclass
class SystemConfig:
    """網路拓撲與 RIS 結構配置"""
    M: int = 20                     # AP-RIS 組數
    J: int = 4                      # 每個 AP 天線數
    U: int = 5                      # UE 數
    L: int = 64                     # 每個 RIS 元件數
    G: int = 4                      # RIS 區塊數
    K: int = 2                      # 啟用區塊數
    tau_c: int = 200                # 相干區塊長度
    tau_p: int = 2                  # 導頻長度
    area_side: float = 1000.0       # 模擬區域邊長 (m)
    ap_height: float = 12.5
    ris_height: float = 30.0
    ue_height: float = 1.5
    ap_ris_distance: float = 10.0   # AP 與 RIS 水平距離 d_m
    ris_enabled: bool = True        # False 時退化為傳統 cell-free


@dataclass
class ChannelConfig:
    """通道模型配置"""
    fading: str = FadingMode.RICIAN.value
    carrier_frequency_hz: float = 2.0e9
    asd_deg: float = 15.0           # 局部散射角度標準差
    ap_spacing_wl: float = 0.5      # d_AP / λ
    ris_spacing_wl: float = 0.25    # d_RIS / λ
    element_size_wl: float = 0.25   # d_H = d_V (以波長計)
    delta_f: float = 0.5
    delta_sf: float = 8.0           # dB
    d_dc: float = 100.0             # 去相關距離 (m)
    ap_paths_ratio: float = 0.5     # P / J


@dataclass
class PowerConfig:
    """功率與能耗模型配置"""
    ue_power_mw: float = 200.0
    noise_dbm: float = -94.0
    bandwidth_hz: float = 20.0e6
    p_ris_element_dbm: float = 10.0
    rho_ap_w_per_gbps: float = 0.25
    rho_bh_w_per_gbps: float = 0.25
    p_ap_fix_w: float = 6.0
    p_ap_antenna_w: float = 0.15
    p_bh_fix_w: float = 0.8
    alpha_ue: float = 0.4
    p_ue_fix_dbm: float = 10.0


@dataclass
class OptimizerConfig:
    """CSA-PSO 與 PSO 配置"""
    particles: int = 20
    t_max: int = 100
    t_check: int = 2
    c1: float = 1.496
    c2: float = 1.496
    omega_min: float = 0.4
    omega_max: float = 0.9
    omega_fixed: float = 0.7298
    v_max: float = 4.0
    patience: int = 10              # N_i
    epsilon_rel: float = 1e-4       # ε = epsilon_rel × 初始 gbest
    mu_tilde: float = 4.0
    penalty_factor: float = 1e3
    qos_min_se: float = 0.0         # η_min (bit/s/Hz)
    capacity_draws: int = 64


@dataclass
class ExperimentSettings:
    """實驗流程配置"""
    kind: str = "se-cdf"
    seed: int = 1
    trials: int = 2000
    setups: int = 20
    output: str = "results.csv"
    combiner: str = CombinerKind.MR.value
    k_values: List[int] = field(default_factory=lambda: [1, 2, 4])
    m_values: List[int] = field(default_factory=lambda: [5, 10, 15, 20])
    u_values: List[int] = field(default_factory=lambda: [2, 4, 6, 8])
    j_values: List[int] = field(default_factory=lambda: [1, 2, 4, 8])
    rho_dbm_values: List[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0])
    optimizer_seeds: int = 10
    oracle_instances: int = 5
    oracle_samples: int = 100000
    workers: int = 4
    chunk_size: int = 1000


@dataclass
class LoggingConfig:
    """日誌配置"""
    level: str = "INFO"
    console_output: bool = True
    file_output: bool = False
    log_dir: str = "logs"
    slow_threshold_s: float = 1.0


@dataclass
class ExperimentConfig:
    """實驗主配置"""
    profile: Profile = Profile.DESK
    system: SystemConfig = None
    channel: ChannelConfig = None
    power: PowerConfig = None
    optimizer: OptimizerConfig = None
    experiment: ExperimentSettings = None
    logging: LoggingConfig = None

    def __post_init__(self):
        if self.system is None:
            self.system = SystemConfig()
        if self.channel is None:
            self.channel = ChannelConfig()
        if self.power is None:
            self.power = PowerConfig()
        if self.optimizer is None:
            self.optimizer = OptimizerConfig()
        if self.experiment is None:
            self.experiment = ExperimentSettings()
        if self.logging is None:
            self.logging = LoggingConfig()


SECTION_TYPES = {
    "system": SystemConfig,
    "channel": ChannelConfig,
    "power": PowerConfig,
    "optimizer": OptimizerConfig,
    "experiment": ExperimentSettings,
    "logging": LoggingConfig,
}


def coerce_value(value: Any, hint: Any) -> Any:
    """
    將 YAML 值轉為欄位宣告的類型

    YAML 1.1 會把 "2.0e9" 這類無正負號指數的寫法讀成字串，這裡統一轉成 float。
    bool 只接受真正的布林值；int 不接受帶小數的數值。

    Raises:
        TypeError / ValueError: 無法轉換
    """
    if get_origin(hint) in (list, List):
        if not isinstance(value, (list, tuple)):
            raise TypeError(f"需要列表，得到 {type(value).__name__}: {value!r}")
        (item_hint,) = get_args(hint)
        return [coerce_value(item, item_hint) for item in value]
    if hint is bool:
        if not isinstance(value, bool):
            raise TypeError(f"需要布林值，得到 {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool):
            raise TypeError(f"需要整數，得到 {value!r}")
        if isinstance(value, float):
            if not value.is_integer():
                raise ValueError(f"需要整數，得到 {value!r}")
            return int(value)
        return int(value)
    if hint is float:
        if isinstance(value, bool):
            raise TypeError(f"需要數值，得到 {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise TypeError(f"需要字串，得到 {value!r}")
        return value
    return value


def _type_matches(value: Any, hint: Any) -> bool:
    if get_origin(hint) in (list, List):
        (item_hint,) = get_args(hint)
        return isinstance(value, list) and all(_type_matches(v, item_hint) for v in value)
    if hint is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if hint is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(hint, type):
        return isinstance(value, hint)
    return True


def check_types(config: ExperimentConfig) -> None:
    """檢查各區段欄位值符合宣告類型"""
    for section, section_type in SECTION_TYPES.items():
        target = getattr(config, section)
        for name, hint in get_type_hints(section_type).items():
            value = getattr(target, name)
            if not _type_matches(value, hint):
                raise ConfigError(
                    f"類型錯誤: 需要 {getattr(hint, '__name__', hint)}，得到 {value!r}",
                    field=f"{section}.{name}",
                )


def validate_config(config: ExperimentConfig) -> None:
    """檢查欄位類型與參數間的一致性，違反時拋出 ConfigError"""
    check_types(config)
    s = config.system
    for name in ("M", "J", "U", "L", "G", "K", "tau_c", "tau_p"):
        if getattr(s, name) < 1:
            raise ConfigError(f"{name} 必須 ≥ 1", field=f"system.{name}")
    if s.K > s.G:
        raise ConfigError("K 不可大於 G", field="system.K")
    if s.L % s.G != 0:
        raise ConfigError("L 必須可被 G 整除", field="system.L")
    side = int(round(s.L ** 0.5))
    if side * side != s.L:
        raise ConfigError("RIS 為正方形平面陣列，L 必須是完全平方數", field="system.L")
    if s.tau_p > s.tau_c:
        raise ConfigError("tau_p 不可大於 tau_c", field="system.tau_p")
    if s.area_side <= 0:
        raise ConfigError("area_side 必須為正", field="system.area_side")

    try:
        FadingMode(config.channel.fading)
    except ValueError:
        raise ConfigError(f"未知的衰落模式: {config.channel.fading}", field="channel.fading")
    try:
        CombinerKind(config.experiment.combiner)
    except ValueError:
        raise ConfigError(f"未知的合併器: {config.experiment.combiner}", field="experiment.combiner")
    if config.experiment.kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"未知的實驗類型: {config.experiment.kind}", field="experiment.kind")
    for k in config.experiment.k_values:
        if not 1 <= k <= s.G:
            raise ConfigError(f"k_values 中的 K={k} 超出 [1, G]", field="experiment.k_values")

    o = config.optimizer
    if not 0 < o.omega_min < o.omega_max < 1:
        raise ConfigError("需滿足 0 < omega_min < omega_max < 1", field="optimizer.omega_min")
    if o.v_max <= 0:
        raise ConfigError("v_max 必須為正", field="optimizer.v_max")
    if o.t_check < 1:
        raise ConfigError("t_check 必須 ≥ 1", field="optimizer.t_check")
    if not 0 < config.power.alpha_ue <= 1:
        raise ConfigError("alpha_ue 必須在 (0, 1]", field="power.alpha_ue")
    if config.experiment.trials < 1 or config.experiment.chunk_size < 1:
        raise ConfigError("trials 與 chunk_size 必須 ≥ 1", field="experiment.trials")


class ConfigManager:
    """配置管理器"""

    def __init__(self, config_dir: str = "config"):
        self.config_dir = Path(config_dir)
        self.logger = logging.getLogger("ConfigManager")
        self._config: Optional[ExperimentConfig] = None

    def load_config(self, config_file: Optional[str] = None) -> ExperimentConfig:
        """載入配置文件"""
        if config_file is None:
            # 根據環境變數決定配置文件
            profile = os.getenv("RPMRIS_PROFILE", Profile.DESK.value)
            config_file = f"{profile}.yml"

        config_path = Path(config_file)
        if not config_path.is_absolute() and not config_path.exists():
            config_path = self.config_dir / config_file

        if config_path.exists():
            text = config_path.read_text(encoding="utf-8")
            try:
                config_data = yaml.safe_load(text) or {}
            except yaml.MarkedYAMLError as e:
                line = e.problem_mark.line + 1 if e.problem_mark else None
                raise ConfigError(f"YAML 語法錯誤: {e.problem}", line=line) from e
            if not isinstance(config_data, dict):
                raise ConfigError("配置文件頂層必須是映射", line=1)

            self._config = self._create_config_from_dict(config_data, self._key_lines(text))
            self.logger.info(f"成功載入配置文件: {config_path}")
        else:
            self.logger.warning(f"配置文件不存在: {config_path}，使用預設配置")
            self._config = self._load_default_config()

        # 從環境變數覆蓋配置
        self._override_from_env()
        validate_config(self._config)

        return self._config

    def save_config(self, config: ExperimentConfig, config_file: str = "current.yml") -> bool:
        """保存配置到文件"""
        try:
            self.config_dir.mkdir(parents=True, exist_ok=True)
            config_path = self.config_dir / config_file
            config_dict = asdict(config)

            # 處理枚舉類型
            config_dict['profile'] = config.profile.value

            with open(config_path, 'w', encoding='utf-8') as f:
                yaml.safe_dump(config_dict, f, default_flow_style=False, allow_unicode=True, sort_keys=False)

            self.logger.info(f"配置已保存到: {config_path}")
            return True

        except (OSError, yaml.YAMLError) as e:
            self.logger.error(f"保存配置失敗: {e}")
            return False

    def get_config(self) -> ExperimentConfig:
        """獲取當前配置"""
        if self._config is None:
            return self.load_config()
        return self._config

    def update_config(self, section: str, **kwargs) -> None:
        """更新指定區段的配置"""
        if self._config is None:
            self._config = self.load_config()

        target = getattr(self._config, section, None)
        if section not in SECTION_TYPES or target is None:
            raise ConfigError(f"未知的配置區段: {section}", field=section)
        for key, value in kwargs.items():
            if not hasattr(target, key):
                raise ConfigError(f"未知的配置鍵: {key}", field=f"{section}.{key}")
            setattr(target, key, value)

    def _create_config_from_dict(
        self, config_data: Dict[str, Any], key_lines: Optional[Dict[str, int]] = None
    ) -> ExperimentConfig:
        """從字典創建配置對象，未知鍵視為錯誤"""
        key_lines = key_lines or {}
        kwargs: Dict[str, Any] = {}

        for section, value in config_data.items():
            if section == "profile":
                try:
                    kwargs["profile"] = Profile(value)
                except ValueError:
                    raise ConfigError(f"未知的配置檔案類型: {value}", field="profile",
                                      line=key_lines.get("profile"))
                continue

            section_type = SECTION_TYPES.get(section)
            if section_type is None:
                raise ConfigError(f"未知的配置區段: {section}", field=section,
                                  line=key_lines.get(section))
            if not isinstance(value, dict):
                raise ConfigError("配置區段必須是映射", field=section, line=key_lines.get(section))

            known = {f.name for f in fields(section_type)}
            for key in value:
                if key not in known:
                    path = f"{section}.{key}"
                    raise ConfigError(f"未知的配置鍵: {key}", field=path, line=key_lines.get(path))
            hints = get_type_hints(section_type)
            coerced = {}
            for key, raw in value.items():
                path = f"{section}.{key}"
                try:
                    coerced[key] = coerce_value(raw, hints[key])
                except (TypeError, ValueError) as e:
                    raise ConfigError(f"類型錯誤: {e}", field=path, line=key_lines.get(path)) from e
            kwargs[section] = section_type(**coerced)

        return ExperimentConfig(**kwargs)

    def _load_default_config(self) -> ExperimentConfig:
        """載入預設配置"""
        return ExperimentConfig()

    def _override_from_env(self) -> None:
        """從環境變數覆蓋配置"""
        if self._config is None:
            return

        if os.getenv("RPMRIS_SEED"):
            self._config.experiment.seed = int(os.getenv("RPMRIS_SEED"))
        if os.getenv("RPMRIS_TRIALS"):
            self._config.experiment.trials = int(os.getenv("RPMRIS_TRIALS"))
        if os.getenv("RPMRIS_WORKERS"):
            self._config.experiment.workers = int(os.getenv("RPMRIS_WORKERS"))
        if os.getenv("RPMRIS_OUTPUT"):
            self._config.experiment.output = os.getenv("RPMRIS_OUTPUT")

    @staticmethod
    def _key_lines(text: str) -> Dict[str, int]:
        """記錄每個 section 與 section.key 在 YAML 中的行號"""
        lines: Dict[str, int] = {}
        try:
            root = yaml.compose(text)
        except yaml.YAMLError:
            return lines
        if not isinstance(root, yaml.MappingNode):
            return lines
        for key_node, value_node in root.value:
            section = key_node.value
            lines[section] = key_node.start_mark.line + 1
            if isinstance(value_node, yaml.MappingNode):
                for sub_key, _ in value_node.value:
                    lines[f"{section}.{sub_key.value}"] = sub_key.start_mark.line + 1
        return lines


# 全局配置管理器實例
config_manager = ConfigManager()

# 便利函數
def get_config() -> ExperimentConfig:
    """獲取實驗配置"""
    return config_manager.get_config()

def load_config(config_file: Optional[str] = None) -> ExperimentConfig:
    """載入配置"""
    return config_manager.load_config(config_file)

def save_config(config: ExperimentConfig, config_file: str = "current.yml") -> bool:
    """保存配置"""
    return config_manager.save_config(config, config_file)
