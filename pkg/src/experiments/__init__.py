"""
實驗模組
提供實驗執行器、閉式統計量交叉驗證與最佳化器耗時量測
"""

from .harness import RESULT_COLUMNS, run_experiment, setup_streams, trace_path, write_table
from .oracles import ORACLE_COLUMNS, OracleResult, run_oracle_suite
from .timing import TIMING_COLUMNS, measure, scaling_slope, timing_suite

__all__ = [
    "RESULT_COLUMNS",
    "run_experiment",
    "setup_streams",
    "trace_path",
    "write_table",
    "ORACLE_COLUMNS",
    "OracleResult",
    "run_oracle_suite",
    "TIMING_COLUMNS",
    "measure",
    "scaling_slope",
    "timing_suite",
]
