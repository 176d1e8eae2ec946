from .backtest import Alignment, BacktestRun, origin_window, run_backtest, tuning_cutoff
from .bootstrap import (
    BootstrapResult, PairedBootstrapResult, block_length, paired_bootstrap, stationary_bootstrap,
    stationary_indices,
)
from .metrics import HIGHER_IS_BETTER, METRICS, brier, decompose_mse, pr_auc, roc_auc
from .reports import (
    EncompassingResult, MetricReport, SectorLedger, derive_peaks, disagreement_series, encompassing,
    metric_report, sector_contributions,
)

__all__ = [
    "Alignment", "BacktestRun", "BootstrapResult", "EncompassingResult", "HIGHER_IS_BETTER", "METRICS",
    "MetricReport", "PairedBootstrapResult", "SectorLedger", "block_length", "brier", "decompose_mse",
    "derive_peaks", "disagreement_series", "encompassing", "metric_report", "origin_window",
    "paired_bootstrap", "pr_auc", "roc_auc", "run_backtest", "sector_contributions",
    "stationary_bootstrap", "stationary_indices", "tuning_cutoff",
]
