from __future__ import annotations

import csv
import io

from .harness import BenchReport, BenchRow, Mode

HEADERS = ("Interface", "Method", "Baseline (ms)", "InterceptOnly (ms)", "FullPipeline (ms)",
           "InterceptOnly (overhead %)", "FullPipeline (overhead %)")
_TIME_MODES = (Mode.BASELINE, Mode.INTERCEPT_ONLY, Mode.FULL_PIPELINE)
_OVERHEAD_MODES = (Mode.INTERCEPT_ONLY, Mode.FULL_PIPELINE)


def _time(cell) -> str:
    return "" if cell is None else f"{cell.mean_ms:.2f} ± {cell.moe_ms:.2f}"


def _overhead(cell) -> str:
    # blank, not "0", when the t-test could not tell the modes apart
    if cell is None or cell.overhead_pct is None:
        return ""
    return f"{cell.overhead_pct:.2f}"


def table_rows(report: BenchReport) -> list[tuple]:
    out = []
    for row in report.rows:
        out.append((row.api_class, row.api_method,
                    *(_time(row.cells.get(m)) for m in _TIME_MODES),
                    *(_overhead(row.cells.get(m)) for m in _OVERHEAD_MODES)))
    return out


def _align(rows) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for n, r in enumerate(rows):
        cells = [c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def self_check_line(check: BenchRow) -> str:
    twin = check.cells["twin"]
    verdict = "blank (no significant difference)" if not twin.significant else f"{twin.overhead_pct:.2f}"
    return (f"Self-comparison {check.api_method}: baseline {_time(check.cells[Mode.BASELINE])} vs "
            f"baseline {_time(twin)} ms, p={twin.p_value:.3f}, overhead {verdict}")


def format_report(report: BenchReport) -> str:
    parts = [
        f"Execution of API method calls, {report.runs} runs per mode, seed {report.seed}.",
        "Margin of error is the 95% confidence interval half-width; overhead cells are blank "
        "where Welch's t-test does not reject at alpha = 0.05.",
        "",
        _align([HEADERS, *table_rows(report)]),
    ]
    if report.self_check is not None:
        parts += ["", self_check_line(report.self_check)]
    return "\n".join(parts) + "\n"


def format_csv(report: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["interface", "method", "workload", "event_count", "mode", "mean_ms", "moe_ms",
                "overhead_pct", "significant", "p_value"])
    for row in report.rows:
        for mode, cell in row.cells.items():
            w.writerow([row.api_class, row.api_method, row.workload.name,
                        row.workload.event_count, mode.value, f"{cell.mean_ms:.4f}",
                        f"{cell.moe_ms:.4f}",
                        "" if cell.overhead_pct is None else f"{cell.overhead_pct:.2f}",
                        int(cell.significant),
                        "" if cell.p_value is None else f"{cell.p_value:.4g}"])
    return buf.getvalue()
