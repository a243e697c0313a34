"""
測試日誌系統、錯誤分類與耗時記錄
"""

import logging

import pytest

from src.core.config_manager import ExperimentConfig, LoggingConfig
from src.core.exceptions import (
    ConfigError,
    InvalidArgumentError,
    NumericFailureError,
    ObjectiveEvaluationError,
)
from src.core.logging_system import (
    CustomFormatter,
    ErrorHandler,
    LoggerManager,
    LogLevel,
    configure_logging,
    error_category,
    error_handler,
    get_logger,
    log_errors,
)


@pytest.fixture
def quiet_manager(temp_dir):
    return LoggerManager(str(temp_dir), console_output=False)


class TestLoggerManager:
    """日誌管理器測試"""

    def test_same_name_same_logger(self, quiet_manager):
        """測試同名記錄器只建立一次"""
        logger = quiet_manager.get_logger("src.cellfree", LogLevel.DEBUG)

        assert logger.level == logging.DEBUG
        assert quiet_manager.get_logger("src.cellfree") is logger
        assert list(quiet_manager.loggers) == ["src.cellfree"]

    def test_set_log_level(self, quiet_manager):
        """測試調整已登記記錄器的級別"""
        logger = quiet_manager.get_logger("src.optimizer")
        quiet_manager.set_log_level("src.optimizer", LogLevel.ERROR)

        assert logger.level == logging.ERROR

    def test_file_output_creates_rotating_files(self, temp_dir):
        """測試文件輸出建立一般與錯誤兩個輪替檔"""
        manager = LoggerManager(str(temp_dir / "logs"), console_output=False, file_output=True)
        logger = manager.get_logger("sweep_logger")

        assert (temp_dir / "logs").is_dir()
        assert [h.level for h in logger.handlers] == [logging.NOTSET, logging.ERROR]
        for handler in logger.handlers:
            handler.close()

    def test_reconfigure_replaces_handlers(self, temp_dir):
        """測試依配置重建處理器"""
        manager = LoggerManager(str(temp_dir), console_output=True)
        logger = manager.get_logger("reconfigured_logger")
        assert len(logger.handlers) == 1

        manager.reconfigure(str(temp_dir), console_output=False, file_output=False, level=LogLevel.WARNING)

        assert logger.handlers == []
        assert logger.level == logging.WARNING


class TestFormatter:
    """終端機格式測試"""

    def test_plain_format(self):
        """測試無顏色時的欄位順序"""
        record = logging.LogRecord("src.experiments", logging.INFO, __file__, 1, "se-cdf 完成", None, None)
        line = CustomFormatter(use_color=False).format(record)

        assert line.startswith("[INFO    ] ")
        assert "| src.experiments" in line
        assert line.endswith("| se-cdf 完成")
        assert "\033[" not in line

    def test_colored_format(self):
        """測試 WARNING 使用黃色"""
        record = logging.LogRecord("x", logging.WARNING, __file__, 1, "m", None, None)
        assert CustomFormatter(use_color=True).format(record).startswith("\033[33m[WARNING ]\033[0m")


class TestErrorHandler:
    """錯誤處理器測試"""

    @pytest.mark.parametrize("error, category", [
        (ConfigError("壞鍵", field="system.M"), "配置"),
        (InvalidArgumentError("M 必須 ≥ 1"), "參數"),
        (NumericFailureError("矩陣非正定"), "數值"),
        (ObjectiveEvaluationError(1, 0, RuntimeError("x")), "目標函數"),
        (RuntimeError("x"), "未預期"),
    ])
    def test_error_category(self, error, category):
        """測試錯誤分類"""
        assert error_category(error) == category

    def test_callback_matches_exact_type(self, quiet_manager):
        """測試回調只由對應類型觸發"""
        handler = ErrorHandler(quiet_manager)
        received = []
        handler.register_error_callback("NumericFailureError", lambda e, c: received.append((e, c)))

        handler.handle_error(InvalidArgumentError("M 必須 ≥ 1"))
        assert received == []

        error = NumericFailureError("矩陣非正定")
        handler.handle_error(error, {"stage": "estimation"})
        assert received == [(error, {"stage": "estimation"})]

    def test_callback_on_base_class(self, quiet_manager):
        """測試註冊基底類別可接收所有模擬錯誤"""
        handler = ErrorHandler(quiet_manager)
        received = []
        handler.register_error_callback("SimulationError", lambda e, c: received.append(type(e).__name__))

        handler.handle_error(ConfigError("x"))
        handler.handle_error(NumericFailureError("y"))
        handler.handle_error(RuntimeError("z"))

        assert received == ["ConfigError", "NumericFailureError"]

    def test_failing_callback_is_contained(self, quiet_manager):
        """測試回調本身失敗時不向外拋出"""
        handler = ErrorHandler(quiet_manager)

        def broken(error, context):
            raise RuntimeError("callback")

        handler.register_error_callback("RuntimeError", broken)
        handler.handle_error(RuntimeError("original"))

    def test_slow_records(self, quiet_manager):
        """測試超過門檻的呼叫被標記為慢速"""
        handler = ErrorHandler(quiet_manager, slow_threshold_s=1.0)
        handler.log_performance("lsfd_statistics", 0.5, {"trials": 100})
        handler.log_performance("run_csa_pso", 2.0, {"particles": 20})

        assert len(handler.records) == 2
        assert [r.function for r in handler.slow_records()] == ["run_csa_pso"]
        assert handler.records[0].context["trials"] == 100


class TestLogErrors:
    """log_errors 裝飾器測試"""

    def test_success_records_experiment_context(self):
        """測試成功呼叫記錄實驗類型與種子"""
        config = ExperimentConfig()
        config.experiment.kind = "timing"
        config.experiment.seed = 17

        @log_errors("test")
        def run(cfg):
            return cfg.experiment.kind

        assert run(config) == "timing"
        record = error_handler.records[-1]
        assert record.function == "run"
        assert (record.context["kind"], record.context["seed"]) == ("timing", 17)

    def test_exception_is_reraised(self):
        """測試例外被記錄後重新拋出"""

        @log_errors("test")
        def failing():
            raise InvalidArgumentError("Test error")

        with pytest.raises(InvalidArgumentError):
            failing()

    def test_preserves_metadata(self):
        """測試裝飾器保留函數名稱"""

        @log_errors("test")
        def named_function():
            return None

        assert named_function.__name__ == "named_function"


class TestConfigureLogging:
    """全局日誌設定測試"""

    def test_get_logger_function(self):
        """測試 get_logger 便利函數"""
        logger = get_logger("utility_test", LogLevel.WARNING)

        assert logger.name == "utility_test"
        assert logger.level == logging.WARNING

    def test_configure_logging(self, temp_dir):
        """測試依 LoggingConfig 設定日誌與慢速門檻"""
        settings = LoggingConfig(level="debug", console_output=False, file_output=False,
                                 log_dir=str(temp_dir), slow_threshold_s=5.0)
        logger = configure_logging(settings)

        assert logger.name == "src"
        assert logger.level == logging.DEBUG
        assert error_handler.slow_threshold_s == 5.0

    def test_configure_logging_rejects_unknown_level(self, temp_dir):
        """測試未知日誌級別"""
        settings = LoggingConfig(level="VERBOSE", console_output=False, log_dir=str(temp_dir))

        with pytest.raises(KeyError):
            configure_logging(settings)


class TestExceptions:
    """例外類別測試"""

    def test_config_error_location(self):
        """測試配置錯誤訊息包含欄位與行號"""
        error = ConfigError("未知的配置鍵", field="system.antennas", line=3)

        assert "system.antennas" in str(error)
        assert "line 3" in str(error)

    def test_invalid_argument_is_value_error(self):
        """測試參數錯誤同時是 ValueError"""
        assert issubclass(InvalidArgumentError, ValueError)

    def test_objective_error_context(self):
        """測試目標函數錯誤攜帶迭代與粒子索引"""
        error = ObjectiveEvaluationError(4, 2, RuntimeError("boom"))

        assert error.iteration == 4
        assert error.particle == 2
        assert "iteration=4" in str(error)
