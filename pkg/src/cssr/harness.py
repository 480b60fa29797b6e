"""Simulation sweeps: generate, reconstruct, score, and write CSV."""

from __future__ import annotations

import csv
import hashlib
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .alphabet import Corpus
from .engine import InferenceConfig, infer
from .errors import CSSRError, ValidationError
from .machine import CausalStateMachine, ProcessSpec, check_same_alphabet, generate, word_distribution
from .stats import DEFAULT_ALPHA, KS, total_variation

CSV_HEADER = ("n", "lmax", "alpha", "trial", "seed", "n_states", "tv_error", "runtime_ms", "error")
LMAX_EPSILON = 0.1


def trial_seed(base: int, n: int, lmax: int, trial: int) -> int:
    """First 8 bytes (big-endian, top bit cleared) of SHA-256 over "base:n:lmax:trial"."""
    digest = hashlib.sha256(f"{base}:{n}:{lmax}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def prediction_error(true_spec: ProcessSpec, machine: CausalStateMachine, W: int = 10, true_words=None) -> float:
    """Total variation between the true and predicted length-W word distributions."""
    check_same_alphabet(true_spec, machine)
    if true_words is None:
        true_words = word_distribution(true_spec, W)
    return total_variation(true_words.probs, word_distribution(machine, W).probs)


@dataclass(frozen=True)
class SweepConfig:
    spec: ProcessSpec
    n_values: tuple[int, ...]
    lmax_values: tuple[int, ...]
    trials: int = 30
    alpha: float = DEFAULT_ALPHA
    word_length: int = 10
    base_seed: int = 0
    jobs: int = 1
    test: str = KS
    timing: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be at least 1")
        if self.word_length < 1:
            raise ValidationError("word length must be at least 1")
        if not self.n_values or not self.lmax_values:
            raise ValidationError("need at least one n and one lmax")
        if self.jobs < 1:
            raise ValidationError("jobs must be at least 1")


@dataclass
class TrialRecord:
    n: int
    lmax: int
    alpha: float
    trial: int
    seed: int | None
    n_states: float | None
    tv_error: float | None
    runtime_ms: float | None
    error: str = ""
    machine: CausalStateMachine | None = field(default=None, repr=False, compare=False)


def run_trial(spec, n, lmax, trial, seed, alpha, test, W, true_words, timing=True, keep_machine=False) -> TrialRecord:
    seq = generate(spec, n, seed)
    t0 = time.perf_counter()
    try:
        machine = infer(Corpus((seq,)), spec.alphabet, InferenceConfig(lmax, alpha, test))
        runtime = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
        err = prediction_error(spec, machine, W, true_words)
    except CSSRError as exc:
        runtime = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
        return TrialRecord(n, lmax, alpha, trial, seed, None, None, runtime, type(exc).__name__)
    return TrialRecord(
        n, lmax, alpha, trial, seed, machine.n_states, err, runtime, "", machine if keep_machine else None
    )


def _run_task(task):
    return run_trial(*task)


def run_sweep(config: SweepConfig, keep_machines: bool = False) -> list[TrialRecord]:
    """All (n, lmax, trial) cells, ordered by (n, lmax, trial) whatever the scheduling."""
    true_words = word_distribution(config.spec, config.word_length)
    tasks = []
    for n in sorted(config.n_values):
        for lmax in sorted(config.lmax_values):
            for trial in range(config.trials):
                seed = trial_seed(config.base_seed, n, lmax, trial)
                tasks.append(
                    (
                        config.spec, n, lmax, trial, seed, config.alpha, config.test,
                        config.word_length, true_words, config.timing, keep_machines,
                    )
                )
    if config.jobs == 1:
        records = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.jobs))))
    records.sort(key=lambda r: (r.n, r.lmax, r.trial))
    return records


@dataclass(frozen=True)
class CellSummary:
    n: int
    lmax: int
    alpha: float
    trials: int
    errored: int
    mean_states: float
    sd_states: float
    mean_tv: float
    sd_tv: float
    mean_runtime_ms: float
    frac_exact: float = math.nan  # share of ok trials with the target state count

    def as_record(self) -> TrialRecord:
        return TrialRecord(
            self.n, self.lmax, self.alpha, -1, None, self.mean_states, self.mean_tv,
            self.mean_runtime_ms, f"errored={self.errored}" if self.errored else "",
        )


def _sd(xs):
    return statistics.stdev(xs) if len(xs) > 1 else 0.0


def summarize(records: Iterable[TrialRecord], target_states: int | None = None) -> list[CellSummary]:
    """Per-(n, lmax) means and standard deviations over trials that did not error."""
    cells: dict[tuple[int, int], list[TrialRecord]] = {}
    for r in records:
        if r.trial >= 0:
            cells.setdefault((r.n, r.lmax), []).append(r)
    out = []
    for (n, lmax), rs in sorted(cells.items()):
        ok = [r for r in rs if not r.error]
        states = [float(r.n_states) for r in ok]
        tvs = [float(r.tv_error) for r in ok]
        runtimes = [float(r.runtime_ms) for r in rs if r.runtime_ms is not None]
        exact = math.nan
        if target_states is not None and ok:
            exact = sum(s == target_states for s in states) / len(ok)
        out.append(
            CellSummary(
                n, lmax, rs[0].alpha, len(rs), len(rs) - len(ok),
                statistics.fmean(states) if ok else math.nan, _sd(states),
                statistics.fmean(tvs) if ok else math.nan, _sd(tvs),
                statistics.fmean(runtimes) if runtimes else math.nan, exact,
            )
        )
    return out


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return format(x, ".6g")
    return format(float(x), ".6g")


def write_csv(records: Iterable[TrialRecord], fh: IO[str], aggregates: bool = False):
    """One row per trial; with ``aggregates``, per-cell mean rows flagged trial=-1."""
    records = list(records)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    rows = list(records)
    if aggregates:
        summaries = {(s.n, s.lmax): s.as_record() for s in summarize(records)}
        rows = []
        for key in sorted(summaries):
            rows.extend(r for r in records if (r.n, r.lmax) == key)
            rows.append(summaries[key])
    for r in rows:
        writer.writerow(
            [r.n, r.lmax, _fmt(r.alpha), r.trial, _fmt(r.seed), _fmt(r.n_states), _fmt(r.tv_error),
             _fmt(r.runtime_ms), r.error]
        )


def suggest_lmax(n: int, k: int, h: float | None = None) -> int:
    """Longest history length that data of size n supports: floor(log2 n / (h + 0.1)).

    Without an entropy rate, log2 k stands in for it, which errs on the
    short side.
    """
    if n < 2 or k < 2:
        raise ValidationError("need n >= 2 and k >= 2")
    h_eff = math.log2(k) if h is None else h
    if h_eff < 0:
        raise ValidationError("entropy rate must be non-negative")
    return int(math.floor(math.log2(n) / (h_eff + LMAX_EPSILON)))
