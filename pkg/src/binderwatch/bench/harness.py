"""Three-mode overhead measurement with confidence intervals and Welch tests.

Every repetition runs each mode once, in a freshly shuffled order, so slow
drift of the host (frequency scaling, other load) hits every mode alike;
the host clock cannot be pinned from here. The garbage collector is paused while a run
is being timed.
"""
from __future__ import annotations

import enum
import gc
import math
import random
import statistics
import time
from dataclasses import dataclass, field

from scipy import stats

from ..bridge import DEFAULT_CAPACITY, Bridge
from ..interceptor import Interceptor, parse_trace
from ..registry import SignatureRegistry, load_registry
from ..service import Subscription, TracerService
from .workloads import Workload, generate_workload

ALPHA = 0.05
CONFIDENCE = 0.95


class Mode(enum.Enum):
    BASELINE = "baseline"
    INTERCEPT_ONLY = "intercept"
    FULL_PIPELINE = "full"

    @classmethod
    def parse_list(cls, text: str) -> list["Mode"]:
        return [cls(t.strip()) for t in text.split(",") if t.strip()]


ALL_MODES = (Mode.BASELINE, Mode.INTERCEPT_ONLY, Mode.FULL_PIPELINE)


class PipelineLoss(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchCell:
    mode: Mode
    mean_ms: float
    moe_ms: float
    overhead_pct: float | None = None
    significant: bool = False
    p_value: float | None = None
    samples: tuple = ()

    def __post_init__(self):
        if (self.overhead_pct is not None) != self.significant:
            raise ValueError("overhead_pct must be present exactly when significant")
        if self.moe_ms < 0:
            raise ValueError("negative margin of error")


@dataclass
class BenchRow:
    workload: Workload
    cells: dict = field(default_factory=dict)
    stats_line: str = ""

    @property
    def api_class(self):
        return self.workload.sort.api_class

    @property
    def api_method(self):
        return self.workload.sort.api_method


@dataclass
class BenchReport:
    rows: list
    runs: int
    seed: int
    self_check: BenchRow | None = None


def margin_of_error(samples, confidence: float = CONFIDENCE) -> float:
    n = len(samples)
    if n < 2:
        raise ValueError("margin of error needs at least two samples")
    sd = statistics.stdev(samples)
    return float(stats.t.ppf(0.5 + confidence / 2, n - 1)) * sd / math.sqrt(n)


def welch_p(a, b) -> float:
    if statistics.pvariance(a) == 0 and statistics.pvariance(b) == 0:
        return 1.0 if statistics.fmean(a) == statistics.fmean(b) else 0.0
    return float(stats.ttest_ind(a, b, equal_var=False).pvalue)


def summarize(mode: Mode, samples, baseline=None, alpha: float = ALPHA) -> BenchCell:
    mean = statistics.fmean(samples)
    moe = margin_of_error(samples)
    if baseline is None:
        return BenchCell(mode, mean, moe, samples=tuple(samples))
    p = welch_p(baseline, samples)
    significant = p < alpha
    overhead = None
    if significant:
        base = statistics.fmean(baseline)
        overhead = (mean - base) / base * 100.0
    return BenchCell(mode, mean, moe, overhead, significant, p, tuple(samples))


# -- timed runs -------------------------------------------------------------

def _noop(raw):
    return None


def _run_baseline(raws, uid) -> float:
    t0 = time.perf_counter_ns()
    for raw in raws:
        _noop(raw)
    return (time.perf_counter_ns() - t0) / 1e6


def _run_intercept(raws, uid) -> float:
    icpt = Interceptor(monitored=[uid])
    icpt.attach_all(_noop)
    feed = icpt.feed
    t0 = time.perf_counter_ns()
    for raw in raws:
        feed(raw)
    return (time.perf_counter_ns() - t0) / 1e6


class _Counter:
    def __init__(self):
        self.n = 0

    def __call__(self, item):
        self.n += 1


def run_full_pipeline(raws, uid, registry: SignatureRegistry):
    """Interceptor -> bridge -> service -> one subscriber; returns (ms, service)."""
    icpt = Interceptor(monitored=[uid])
    bridge = Bridge(icpt, capacity=max(DEFAULT_CAPACITY, len(raws)))
    icpt.attach_all(bridge.send_event)
    service = TracerService.start(bridge, registry)
    sink = _Counter()
    service.subscribe(Subscription("bench", sink))
    feed = icpt.feed
    try:
        t0 = time.perf_counter_ns()
        for raw in raws:
            feed(raw)
        bridge.drain()
        elapsed = (time.perf_counter_ns() - t0) / 1e6
    finally:
        bridge.close()
    s = service.stats
    if s.decode_ok + s.decode_failed != len(raws) or sink.n != len(raws):
        raise PipelineLoss(f"{len(raws)} events in, {service.stats.line()}, {sink.n} delivered")
    return elapsed, service


def _timed(mode: Mode, raws, uid, registry):
    """One timed run; returns (ms, service or None)."""
    gc_was = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        if mode is Mode.BASELINE:
            return _run_baseline(raws, uid), None
        if mode is Mode.INTERCEPT_ONLY:
            return _run_intercept(raws, uid), None
        return run_full_pipeline(raws, uid, registry)
    finally:
        if gc_was:
            gc.enable()


def run_bench(workloads, runs: int = 30, modes=ALL_MODES, seed: int = 0,
              registry: SignatureRegistry | None = None, self_check: bool = True,
              progress=None) -> BenchReport:
    if runs < 2:
        raise ValueError("runs must be >= 2 for a confidence interval")
    registry = registry if registry is not None else load_registry()
    modes = list(modes)
    if Mode.BASELINE not in modes:
        modes.insert(0, Mode.BASELINE)
    rng = random.Random(seed)
    rows = []
    check = None
    for i, w in enumerate(workloads):
        raws = parse_trace(generate_workload(w, seed, registry))
        samples = {m: [] for m in modes}
        twin = []
        with_twin = self_check and i == 0
        stats_line = ""
        slots = list(modes) + (["twin"] if with_twin else [])
        for _ in range(runs):
            rng.shuffle(slots)
            for m in slots:
                ms, service = _timed(Mode.BASELINE if m == "twin" else m, raws, w.uid, registry)
                (twin if m == "twin" else samples[m]).append(ms)
                if service is not None:
                    stats_line = service.stats.line()
        base = samples[Mode.BASELINE]
        row = BenchRow(w, stats_line=stats_line)
        for m in modes:
            row.cells[m] = summarize(m, samples[m], None if m is Mode.BASELINE else base)
        rows.append(row)
        if with_twin:
            check = BenchRow(w, {Mode.BASELINE: row.cells[Mode.BASELINE],
                                 "twin": summarize(Mode.BASELINE, twin, base)})
        if progress:
            progress(row)
    return BenchReport(rows, runs, seed, check)


def self_comparison(workload: Workload, runs: int = 30, seed: int = 0,
                    registry: SignatureRegistry | None = None) -> BenchCell:
    """Baseline against itself; the overhead cell should almost always be blank."""
    registry = registry if registry is not None else load_registry()
    raws = parse_trace(generate_workload(workload, seed, registry))
    rng = random.Random(seed)
    a, b = [], []
    for _ in range(runs):
        pair = [a, b]
        rng.shuffle(pair)
        for sink in pair:
            sink.append(_timed(Mode.BASELINE, raws, workload.uid, registry)[0])
    return summarize(Mode.BASELINE, b, a)
