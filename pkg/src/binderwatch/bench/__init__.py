from .harness import (ALL_MODES, BenchCell, BenchReport, BenchRow, Mode, margin_of_error,
                      run_bench, run_full_pipeline, self_comparison, summarize, welch_p)
from .report import format_csv, format_report
from .workloads import SORTS, UnknownWorkload, Workload, generate_raw, generate_workload

__all__ = [
    "ALL_MODES", "BenchCell", "BenchReport", "BenchRow", "Mode", "SORTS", "UnknownWorkload",
    "Workload", "format_csv", "format_report", "generate_raw", "generate_workload",
    "margin_of_error", "run_bench", "run_full_pipeline", "self_comparison", "summarize",
    "welch_p",
]
