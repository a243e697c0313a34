"""
RPM-RIS Cell-Free - Core Module
核心模組 - 提供配置管理、日誌系統、錯誤處理等基礎功能
"""

from .config_manager import (
    ConfigManager,
    ExperimentConfig,
    SystemConfig,
    ChannelConfig,
    PowerConfig,
    OptimizerConfig,
    ExperimentSettings,
    LoggingConfig,
    Profile,
    FadingMode,
    CombinerKind,
    EXPERIMENT_KINDS,
    validate_config,
    config_manager,
    get_config,
    load_config,
    save_config
)

from .logging_system import (
    LoggerManager,
    ErrorHandler,
    LogLevel,
    CustomFormatter,
    logger_manager,
    error_handler,
    get_logger,
    handle_error,
    log_performance,
    log_errors,
    configure_logging,
    error_category,
    PerformanceRecord
)

from .exceptions import (
    SimulationError,
    InvalidArgumentError,
    NumericFailureError,
    ConfigError,
    ObjectiveEvaluationError
)

__all__ = [
    # 配置管理
    'ConfigManager',
    'ExperimentConfig',
    'SystemConfig',
    'ChannelConfig',
    'PowerConfig',
    'OptimizerConfig',
    'ExperimentSettings',
    'LoggingConfig',
    'Profile',
    'FadingMode',
    'CombinerKind',
    'EXPERIMENT_KINDS',
    'validate_config',
    'config_manager',
    'get_config',
    'load_config',
    'save_config',

    # 日誌系統
    'LoggerManager',
    'ErrorHandler',
    'LogLevel',
    'CustomFormatter',
    'logger_manager',
    'error_handler',
    'get_logger',
    'handle_error',
    'log_performance',
    'log_errors',
    'configure_logging',
    'error_category',
    'PerformanceRecord',

    # 例外
    'SimulationError',
    'InvalidArgumentError',
    'NumericFailureError',
    'ConfigError',
    'ObjectiveEvaluationError'
]

__version__ = '0.1.0'
