from rlser.experiments.config import (
    ConfigError,
    CorpusRef,
    Method,
    NetworkSize,
    ScenarioConfig,
    Scheme,
    load_scenario,
)
from rlser.experiments.evaluate import (
    ConfusionMatrix,
    RunResult,
    SubsetResult,
    UARReport,
    evaluate_uar,
    predict_greedy,
)
from rlser.experiments.pretrain import PretrainHistory, pretrain
from rlser.experiments.report import emit_report, load_reports, render_table
from rlser.experiments.runner import run_rl_da, run_scenario_method, run_sl_da

__all__ = [
    "ConfigError",
    "ConfusionMatrix",
    "CorpusRef",
    "Method",
    "NetworkSize",
    "PretrainHistory",
    "RunResult",
    "ScenarioConfig",
    "Scheme",
    "SubsetResult",
    "UARReport",
    "emit_report",
    "evaluate_uar",
    "load_reports",
    "load_scenario",
    "predict_greedy",
    "pretrain",
    "render_table",
    "run_rl_da",
    "run_scenario_method",
    "run_sl_da",
]
