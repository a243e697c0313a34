"""
RPM-RIS Cell-Free - 測試配置文件
pytest 配置和共用測試工具
"""

import pytest
import tempfile
import shutil
from pathlib import Path
from typing import Generator
import logging

import numpy as np

from src.core.config_manager import (
    ExperimentConfig,
    SystemConfig,
    OptimizerConfig,
    ExperimentSettings,
    LoggingConfig,
)

# 測試期間禁用日誌輸出
logging.disable(logging.CRITICAL)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """創建臨時目錄用於測試"""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path, ignore_errors=True)


@pytest.fixture
def rng() -> np.random.Generator:
    """固定種子的亂數產生器"""
    return np.random.default_rng(20240607)


@pytest.fixture
def sample_config_data():
    """範例配置數據"""
    return {
        "profile": "desk",
        "system": {
            "M": 4,
            "J": 2,
            "U": 3,
            "L": 16,
            "G": 4,
            "K": 2,
        },
        "channel": {
            "fading": "rician",
        },
        "power": {
            "p_ris_element_dbm": 25.0,
        },
        "experiment": {
            "kind": "se-cdf",
            "seed": 7,
            "trials": 100,
        },
        "logging": {
            "level": "DEBUG",
            "console_output": False,
        },
    }


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    """小規模配置：每個測試數秒內完成"""
    return ExperimentConfig(
        system=SystemConfig(M=3, J=2, U=3, L=4, G=2, K=1, tau_p=2),
        optimizer=OptimizerConfig(particles=4, t_max=3, patience=10, capacity_draws=8),
        experiment=ExperimentSettings(
            trials=200,
            setups=2,
            k_values=[1, 2],
            m_values=[2, 3],
            u_values=[2, 3],
            j_values=[1, 2],
            rho_dbm_values=[10.0, 25.0],
            optimizer_seeds=1,
            oracle_instances=1,
            oracle_samples=2000,
            workers=1,
            chunk_size=100,
        ),
        logging=LoggingConfig(console_output=False),
    )
