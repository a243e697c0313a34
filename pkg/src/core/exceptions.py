"""
RPM-RIS Cell-Free - 例外類別定義
模擬器各模組共用的錯誤類型
"""

from typing import Optional


class SimulationError(Exception):
    """模擬器錯誤基底類別"""
    pass


class InvalidArgumentError(SimulationError, ValueError):
    """參數不合法 (維度、範圍或前置條件不符)"""
    pass


class NumericFailureError(SimulationError, ArithmeticError):
    """數值計算失敗 (分解失敗、矩陣非正定、積分不收斂)"""
    pass


class ConfigError(SimulationError):
    """
    配置錯誤

    Args:
        message: 錯誤描述
        field: 發生錯誤的欄位 (section.key)
        line: YAML 行號 (1 起算)，未知時為 None
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = ""
        if field:
            location += f" [{field}]"
        if line is not None:
            location += f" (line {line})"
        super().__init__(f"{message}{location}")


class ObjectiveEvaluationError(SimulationError):
    """目標函數評估失敗，附帶迭代與粒子索引"""

    def __init__(self, iteration: int, particle: int, cause: Exception):
        self.iteration = iteration
        self.particle = particle
        self.cause = cause
        super().__init__(
            f"目標函數評估失敗 (iteration={iteration}, particle={particle}): {cause}"
        )
