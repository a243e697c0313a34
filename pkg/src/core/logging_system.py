"""
RPM-RIS Cell-Free - 日誌系統與錯誤處理
模擬器各模組的記錄器設置、依錯誤類別的處理回調，以及實驗階段的耗時記錄
"""

import functools
import logging
import logging.handlers
import sys
import time
from collections import deque
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Deque, Dict, List, Optional

from .exceptions import (
    ConfigError,
    InvalidArgumentError,
    NumericFailureError,
    ObjectiveEvaluationError,
    SimulationError,
)

PACKAGE_LOGGER = "src"
LOG_FILE_BYTES = 10 * 1024 * 1024
LOG_FILE_BACKUPS = 5
PERFORMANCE_HISTORY = 256

ERROR_CATEGORIES = (
    (ConfigError, "配置"),
    (InvalidArgumentError, "參數"),
    (NumericFailureError, "數值"),
    (ObjectiveEvaluationError, "目標函數"),
    (SimulationError, "模擬"),
)


class LogLevel(Enum):
    """日誌級別枚舉"""
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


class CustomFormatter(logging.Formatter):
    """終端機格式 "[LEVEL] time | name | message"，可選 ANSI 顏色"""

    LEVEL_COLORS = {
        logging.DEBUG: "\033[36m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[35m",
    }
    RESET = "\033[0m"

    def __init__(self, use_color: bool = True):
        super().__init__(datefmt="%Y-%m-%d %H:%M:%S")
        self.use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        level = f"[{record.levelname:8}]"
        if self.use_color:
            level = f"{self.LEVEL_COLORS.get(record.levelno, '')}{level}{self.RESET}"
        line = f"{level} {self.formatTime(record, self.datefmt)} | {record.name:28} | {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class LoggerManager:
    """
    日誌管理器

    所有模擬器模組的記錄器都掛在 ``src`` 命名空間之下，只需為 ``src`` 設置處理器；
    ErrorHandler、Performance 等專用記錄器則各自擁有處理器。

    Args:
        log_dir: 日誌文件目錄 (僅在 file_output=True 時建立)
        console_output: 是否輸出到 stderr
        file_output: 是否寫入輪替日誌文件 (另有僅含 ERROR 的 *_error.log)
    """

    def __init__(self, log_dir: str = "logs", console_output: bool = True, file_output: bool = False):
        self.log_dir = Path(log_dir)
        self.console_output = console_output
        self.file_output = file_output
        self.loggers: Dict[str, logging.Logger] = {}

    def get_logger(self, name: str, level: LogLevel = LogLevel.INFO) -> logging.Logger:
        """取得 (必要時建立) 指定名稱的記錄器；同名只設置一次處理器"""
        if name not in self.loggers:
            logger = logging.getLogger(name)
            logger.setLevel(level.value)
            if not logger.handlers:
                self._attach_handlers(logger, name)
            self.loggers[name] = logger
        return self.loggers[name]

    def _rotating_file(self, filename: str, level: int = logging.NOTSET) -> logging.Handler:
        handler = logging.handlers.RotatingFileHandler(
            self.log_dir / filename, maxBytes=LOG_FILE_BYTES, backupCount=LOG_FILE_BACKUPS, encoding="utf-8"
        )
        handler.setLevel(level)
        handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
        return handler

    def _attach_handlers(self, logger: logging.Logger, name: str) -> None:
        if self.console_output:
            console = logging.StreamHandler(sys.stderr)
            console.setFormatter(CustomFormatter(use_color=sys.stderr.isatty()))
            logger.addHandler(console)
        if self.file_output:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            logger.addHandler(self._rotating_file(f"{name}.log"))
            logger.addHandler(self._rotating_file(f"{name}_error.log", logging.ERROR))
        logger.propagate = False

    def set_log_level(self, logger_name: str, level: LogLevel) -> None:
        if logger_name in self.loggers:
            self.loggers[logger_name].setLevel(level.value)

    def reconfigure(self, log_dir: str, console_output: bool, file_output: bool, level: LogLevel) -> None:
        """依配置重建所有已登記記錄器的處理器"""
        self.log_dir = Path(log_dir)
        self.console_output = console_output
        self.file_output = file_output
        for name, logger in self.loggers.items():
            for handler in list(logger.handlers):
                logger.removeHandler(handler)
                handler.close()
            self._attach_handlers(logger, name)
            logger.setLevel(level.value)


@dataclass
class PerformanceRecord:
    """一次被量測呼叫的耗時"""
    function: str
    elapsed_s: float
    context: Dict[str, Any] = field(default_factory=dict)

    @property
    def slow(self) -> bool:
        return self.context.get("slow", False)


def error_category(error: Exception) -> str:
    """模擬錯誤依例外類別歸類；其他例外為「未預期」"""
    for error_type, category in ERROR_CATEGORIES:
        if isinstance(error, error_type):
            return category
    return "未預期"


class ErrorHandler:
    """
    錯誤處理器

    模擬錯誤 (SimulationError 子類) 只記錄訊息；未預期的例外連同 traceback 記錄。
    回調以例外類別名稱註冊，並沿 MRO 比對 (註冊 "SimulationError" 可接收所有模擬錯誤)。
    """

    def __init__(self, logger_manager: LoggerManager, slow_threshold_s: float = 1.0):
        self.logger_manager = logger_manager
        self.slow_threshold_s = slow_threshold_s
        self.error_callbacks: Dict[str, Callable[[Exception, Optional[Dict[str, Any]]], None]] = {}
        self.records: Deque[PerformanceRecord] = deque(maxlen=PERFORMANCE_HISTORY)

    @property
    def error_logger(self) -> logging.Logger:
        return self.logger_manager.get_logger("ErrorHandler")

    def register_error_callback(self, error_type: str, callback: Callable) -> None:
        self.error_callbacks[error_type] = callback
        self.error_logger.debug(f"註冊錯誤回調: {error_type}")

    def _callbacks_for(self, error: Exception) -> List[Callable]:
        names = [cls.__name__ for cls in type(error).__mro__]
        return [self.error_callbacks[name] for name in names if name in self.error_callbacks]

    def handle_error(self, error: Exception, context: Dict[str, Any] = None) -> None:
        category = error_category(error)
        where = f" ({context})" if context else ""
        if isinstance(error, SimulationError):
            self.error_logger.error(f"{category}錯誤 {type(error).__name__}: {error}{where}")
        else:
            self.error_logger.error(f"{category}錯誤 {type(error).__name__}: {error}{where}", exc_info=error)

        for callback in self._callbacks_for(error):
            try:
                callback(error, context)
            except Exception as callback_error:
                self.error_logger.error(f"錯誤回調執行失敗: {callback_error}")

    def log_performance(self, function_name: str, execution_time: float, context: Dict[str, Any] = None) -> None:
        """記錄耗時；超過 slow_threshold_s 以 WARNING 記錄"""
        slow = execution_time > self.slow_threshold_s
        record = PerformanceRecord(function_name, round(execution_time, 6), {**(context or {}), "slow": slow})
        self.records.append(record)

        perf_logger = self.logger_manager.get_logger("Performance")
        if slow:
            perf_logger.warning(f"慢速操作: {asdict(record)}")
        else:
            perf_logger.debug(f"耗時: {asdict(record)}")

    def slow_records(self) -> List[PerformanceRecord]:
        return [r for r in self.records if r.slow]


def _call_context(func: Callable, args: tuple) -> Dict[str, Any]:
    """若第一個參數是實驗配置，取出實驗類型、種子與試驗數"""
    context: Dict[str, Any] = {"function": func.__name__}
    settings = getattr(args[0], "experiment", None) if args else None
    if settings is not None:
        context.update(kind=settings.kind, seed=settings.seed, trials=settings.trials)
    return context


def log_errors(logger_name: str = "default"):
    """錯誤記錄裝飾器；成功時記錄耗時，失敗時交給 ErrorHandler 後重新拋出"""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger_manager.get_logger(logger_name)
            context = _call_context(func, args)
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                error_handler.handle_error(e, context)
                raise
            error_handler.log_performance(func.__name__, time.perf_counter() - start, context)
            return result

        return wrapper
    return decorator


# 全局實例
logger_manager = LoggerManager()
error_handler = ErrorHandler(logger_manager)


def get_logger(name: str, level: LogLevel = LogLevel.INFO) -> logging.Logger:
    return logger_manager.get_logger(name, level)


def handle_error(error: Exception, context: Dict[str, Any] = None) -> None:
    error_handler.handle_error(error, context)


def log_performance(function_name: str, execution_time: float, context: Dict[str, Any] = None) -> None:
    error_handler.log_performance(function_name, execution_time, context)


def configure_logging(settings: Any) -> logging.Logger:
    """
    依 LoggingConfig 設定全局日誌行為

    Args:
        settings: 具有 level / console_output / file_output / log_dir / slow_threshold_s 屬性的配置

    Returns:
        套件根記錄器 ``src``
    """
    level = LogLevel[str(settings.level).upper()]
    logger_manager.reconfigure(settings.log_dir, settings.console_output, settings.file_output, level)
    error_handler.slow_threshold_s = settings.slow_threshold_s
    return logger_manager.get_logger(PACKAGE_LOGGER, level)
