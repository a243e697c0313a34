"""
RPM-RIS Cell-Free - 命令列入口
載入 YAML 配置、套用命令列覆寫並執行指定的實驗
"""

import argparse
import sys
from typing import List, Optional

from src.core import ConfigManager, SimulationError
from src.core.config_manager import EXPERIMENT_KINDS, CombinerKind, FadingMode, validate_config
from src.core.logging_system import configure_logging, handle_error
from src.experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="RPM-RIS 輔助 cell-free massive MIMO 上行模擬")
    parser.add_argument("--config", type=str, default=None, help="YAML 配置文件 (預設依 RPMRIS_PROFILE)")
    parser.add_argument("--experiment", type=str, choices=EXPERIMENT_KINDS, help="實驗類型")
    parser.add_argument("--seed", type=int, help="隨機種子")
    parser.add_argument("--trials", type=int, help="每個佈建的通道試驗次數")
    parser.add_argument("--output", type=str, help="輸出 CSV 路徑")
    parser.add_argument("--combiner", type=str, choices=[c.value for c in CombinerKind], help="本地合併器")
    parser.add_argument("--k", type=int, help="啟用區塊數 K (覆寫 k_values)")
    parser.add_argument("--fading", type=str, choices=[f.value for f in FadingMode], help="RIS 鏈路衰落模式")
    return parser


def apply_overrides(config, args: argparse.Namespace) -> None:
    """命令列參數優先於配置文件與環境變數"""
    settings = config.experiment
    if args.experiment is not None:
        settings.kind = args.experiment
    if args.seed is not None:
        settings.seed = args.seed
    if args.trials is not None:
        settings.trials = args.trials
    if args.output is not None:
        settings.output = args.output
    if args.combiner is not None:
        settings.combiner = args.combiner
    if args.k is not None:
        config.system.K = args.k
        settings.k_values = [args.k]
    if args.fading is not None:
        config.channel.fading = args.fading


def main(argv: Optional[List[str]] = None) -> int:
    """成功回傳 0；模擬錯誤 (含配置錯誤) 回傳 2；其他錯誤回傳 1"""
    args = build_parser().parse_args(argv)
    try:
        config = ConfigManager().load_config(args.config)
        apply_overrides(config, args)
        validate_config(config)
        configure_logging(config.logging)
        run_experiment(config)
    except SimulationError as e:
        print(f"錯誤: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        handle_error(e, {"argv": argv})
        print(f"未預期的錯誤: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
