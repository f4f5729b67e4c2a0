"""One-sided CUSUM detection of the dot's G -> X change in the readout mean.

Samples are time-integrated readouts ``y`` over a window ``dt_avg``; the
window mean ``y / dt_avg`` has variance ``beta^2 / dt_avg``. The
log-likelihood increment keeps its constant prefactor so thresholds ``h``
are in genuine log-likelihood units.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np


class Decision(enum.Enum):
    H0_continue = 0
    H1_stop = 1


@dataclass(frozen=True)
class Hypotheses:
    beta: float
    dt_avg: float
    mu0: float = 0.0
    mu1: float = 1.0

    def __post_init__(self):
        if not self.mu1 > self.mu0:
            raise ValueError("need mu1 > mu0")
        if not (self.beta > 0 and self.dt_avg > 0):
            raise ValueError("beta and dt_avg must be positive")

    @property
    def sigma2(self) -> float:
        return self.beta**2 / self.dt_avg


@dataclass(frozen=True)
class CusumState:
    S: float = 0.0
    m: float = 0.0
    k: int = 0

    @property
    def statistic(self) -> float:
        return self.S - self.m


def llr_increment(y, hyp: Hypotheses):
    """Gaussian log-likelihood ratio of one integrated sample; vectorises over ``y``."""
    mean = np.divide(y, hyp.dt_avg)
    return (hyp.mu1 - hyp.mu0) / hyp.beta**2 * (mean - 0.5 * (hyp.mu0 + hyp.mu1)) * hyp.dt_avg


def cusum_fold(S, m, s):
    """Array form of one CUSUM update; returns ``(S, m)``."""
    S = S + s
    return S, np.minimum(m, S)


def cusum_update(state: CusumState, s: float, h: float) -> tuple[CusumState, Decision]:
    if h < 0:
        raise ValueError("threshold must be non-negative")
    S, m = cusum_fold(state.S, state.m, s)
    new = CusumState(float(S), float(m), state.k + 1)
    # ties continue
    verdict = Decision.H1_stop if new.statistic > h else Decision.H0_continue
    return new, verdict


def run_cusum(increments, h: float) -> tuple[int | None, list[CusumState]]:
    """Feed increments until the first stop; returns (1-based stop sample or None, states)."""
    state = CusumState()
    states = []
    for s in increments:
        state, d = cusum_update(state, s, h)
        states.append(state)
        if d is Decision.H1_stop:
            return state.k, states
    return None, states


def first_alarm(increments, h: float) -> int | None:
    """1-based index of the first sample with ``S - m > h`` (vectorised scan)."""
    S = np.cumsum(increments)
    m = np.minimum.accumulate(np.minimum(S, 0.0))
    hits = np.flatnonzero(S - m > h)
    return int(hits[0]) + 1 if hits.size else None


TRACE_COLUMNS = ("k", "y", "s", "S", "m", "S_minus_m", "verdict")


def cusum_trace(ys, hyp: Hypotheses, h: float, stop_at_first: bool = True) -> list[dict]:
    rows = []
    state = CusumState()
    for y in ys:
        s = float(llr_increment(y, hyp))
        state, d = cusum_update(state, s, h)
        rows.append(
            dict(k=state.k, y=float(y), s=s, S=state.S, m=state.m,
                 S_minus_m=state.statistic, verdict=d.name)
        )
        if stop_at_first and d is Decision.H1_stop:
            break
    return rows


def write_trace(rows: list[dict], path: str | Path, columns=TRACE_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([f"{r[c]:.17g}" if isinstance(r[c], float) else r[c] for c in columns])


# -- calibration harness ----------------------------------------------------------


@dataclass(frozen=True)
class DetectionStats:
    mean_delay: float
    se_delay: float
    false_alarm_rate: float
    se_false_alarm: float
    n_runs: int
    n_detected: int


def step_signal(change_at: int | None, n_samples: int, hyp: Hypotheses,
                noise_scale: float = 1.0) -> Callable:
    """Generator of integrated samples whose mean jumps mu0 -> mu1 at ``change_at``.

    ``change_at`` is the 0-based index of the first post-change sample;
    ``None`` gives pure pre-change noise. ``noise_scale=0`` yields a clean step.
    """

    def gen(rng: np.random.Generator) -> tuple[np.ndarray, int | None]:
        mean = np.full(n_samples, hyp.mu0)
        if change_at is not None:
            mean[change_at:] = hyp.mu1
        noise = rng.standard_normal(n_samples) * (noise_scale * hyp.beta * math.sqrt(hyp.dt_avg))
        return mean * hyp.dt_avg + noise, change_at

    return gen


def detection_stats(signal_generator: Callable, hyp: Hypotheses, h: float, n_runs: int,
                    seed: int = 0) -> DetectionStats:
    """Empirical detection delay (in samples) and false-alarm rate.

    An alarm before the change counts as a false alarm. Delay is counted in
    samples including the one that fires, so an immediate detection has
    delay 1. Runs that never alarm after the change are excluded from the
    delay average.
    """
    rng = np.random.default_rng(seed)
    delays, false_alarms = [], 0
    for _ in range(n_runs):
        ys, change = signal_generator(rng)
        k = first_alarm(llr_increment(ys, hyp), h)
        if k is None:
            continue
        if change is None or k - 1 < change:
            false_alarms += 1
        else:
            delays.append(k - change)
    fa = false_alarms / n_runs
    d = np.asarray(delays, dtype=float)
    mean = float(d.mean()) if d.size else math.nan
    se = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else (0.0 if d.size else math.nan)
    return DetectionStats(mean, se, fa, math.sqrt(fa * (1 - fa) / n_runs), n_runs, int(d.size))
