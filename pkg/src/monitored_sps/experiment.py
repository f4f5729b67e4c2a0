"""Trajectory orchestration, Monte Carlo aggregation and parameter sweeps.

A trajectory pumps under the stochastic master equation while a controller
watches the readout. When the controller fires (or ``t_max`` is reached) the
pump is switched off and the photon-number distribution is read out after a
pump-off tail of length ``t_tail``.

The tail is applied as the exact Lindblad propagator ``exp(L_off t_tail)``
followed by the readout, i.e. the trajectory's outcome is the conditional
expectation of its final photon distribution given the state at switch-off.
Trajectory-averaged quantities are therefore unchanged, while the tail costs
one small matrix product.

Controllers whose decision is monotone in a threshold (CUSUM ``h``, Bayes
``epsilon``, timer ``t_stop``) are evaluated on a whole threshold grid from a
single pass over each noise realisation: pump-on dynamics do not depend on the
threshold until the moment it fires.

Reproducibility: every trajectory owns a PCG64 stream seeded by
:func:`trajectory_seed`, and trajectories are processed in fixed-size chunks of
consecutive indices, so the arithmetic seen by each trajectory is the same
whatever the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from monitored_sps import bayes, detect
from monitored_sps.dynamics import (
    POSITIVITY_TOL,
    TRACE_DRIFT_TOL,
    ModelParams,
    coords,
    generator,
    ground_state,
    measure_coords,
    rk4_propagator,
)
from monitored_sps.errors import (
    DegenerateNoise,
    NoFeasibleTime,
    SimulationError,
    StepUnstable,
    TailNotConverged,
)

CONTROLLERS = ("timer", "cusum", "bayes")
TAIL_RESIDUAL_TOL = 1e-4
NOISE_BLOCK = 512
CHUNK_SIZE = 256
DEFAULT_H_GRID = tuple(float(h) for h in np.logspace(-2, 2, 121))

_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def trajectory_seed(base_seed: int, index: int) -> int:
    """64-bit seed of trajectory ``index``: ``splitmix64(splitmix64(base) + index)``."""
    return _splitmix64((_splitmix64(base_seed & _M64) + index) & _M64)


@dataclass(frozen=True)
class RunControl:
    """Numerical and controller settings.

    ``t_tail=None`` picks the shortest ``100 * 2**j`` for which every state
    leaves less than ``1e-4`` outside ``|G,0,n>`` after the tail.
    """

    dt: float = 0.01
    t_max: float = 200.0
    t_tail: float | None = None
    n_traj: int = 1000
    seed: int = 0
    epsilon: float = 0.01
    h: float = 1.0
    controller: str = "timer"
    t_stop: float = 8.0
    record_period: int = 1
    workers: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"controller must be one of {CONTROLLERS}")
        if self.n_traj < 1 or self.record_period < 1 or self.workers < 1:
            raise ValueError("n_traj, record_period and workers must be >= 1")
        if self.t_max < 0 or self.h < 0 or self.t_stop < 0:
            raise ValueError("t_max, h and t_stop must be non-negative")
        if self.t_tail is not None and self.t_tail < 0:
            raise ValueError("t_tail must be non-negative")

    def replace(self, **changes) -> "RunControl":
        return RunControl(**{**asdict(self), **changes})

    def threshold(self) -> float:
        return {"timer": self.t_stop, "cusum": self.h, "bayes": self.epsilon}[self.controller]


@dataclass(frozen=True)
class TrajectoryOutcome:
    stop_time: float
    probs: tuple[float, float, float]
    stopped_by: str  # "controller" | "t_max"


@dataclass(frozen=True)
class PhotonStats:
    mean_p0: float
    mean_p1: float
    mean_p2plus: float
    se_p0: float
    se_p1: float
    se_p2plus: float
    n_traj: int
    controller: str
    threshold: float
    mean_stop_time: float
    params: ModelParams = field(compare=False)

    @classmethod
    def from_probs(cls, probs: np.ndarray, stop_times: np.ndarray, controller: str,
                   threshold: float, params: ModelParams) -> "PhotonStats":
        n = probs.shape[0]
        mean = probs.mean(axis=0)
        se = np.sqrt(np.clip(mean * (1.0 - mean), 0.0, None) / n)
        return cls(*map(float, mean), *map(float, se), n, controller, float(threshold),
                   float(np.mean(stop_times)), params)


# -- tail readout ---------------------------------------------------------------


def _readout_rows() -> np.ndarray:
    """Rows: p(n_ext = 0), p(n_ext = 1), p(n_ext = 2), residual outside |G,0,n>."""
    C = coords()
    space = C.space
    R = np.zeros((4, C.size))
    for i, s in enumerate(space.states):
        R[s.n_ext, i] = 1.0
        if not (s.dot == 0 and s.n_cav == 0):
            R[3, i] = 1.0
    return R


def _worst_residual(row: np.ndarray) -> float:
    """Largest value of a linear functional over all density matrices."""
    C = coords()
    half = np.where(C.rows == C.cols, row, 0.5 * row)
    return float(np.linalg.eigvalsh(C.to_matrix(half)).max())


@dataclass(frozen=True)
class TailReadout:
    t_tail: float
    matrix: np.ndarray  # (4, n_coords)
    worst_residual: float

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return v @ self.matrix.T


def tail_readout(params: ModelParams, t_tail: float | None = None) -> TailReadout:
    """Readout after a pump-off tail; raises TailNotConverged for a too-short explicit tail."""
    L_off = generator(params, pump_on=False)
    R = _readout_rows()
    if t_tail is not None:
        M = R @ expm(L_off * t_tail)
        return TailReadout(float(t_tail), M, _worst_residual(M[3]))
    t = 100.0
    for _ in range(14):
        M = R @ expm(L_off * t)
        worst = _worst_residual(M[3])
        if worst < TAIL_RESIDUAL_TOL:
            return TailReadout(t, M, worst)
        t *= 2
    raise TailNotConverged(f"population still outside final states after t_tail={t / 2:g}")


def _check_tail(tail: TailReadout, out: np.ndarray) -> None:
    bad = out[..., 3] >= TAIL_RESIDUAL_TOL
    if np.any(bad):
        raise TailNotConverged(
            f"{float(out[..., 3].max()):.3e} population outside final states after "
            f"t_tail={tail.t_tail:g}; increase t_tail"
        )


# -- batched trajectory kernel ------------------------------------------------------


@dataclass
class _Chunk:
    probs: np.ndarray  # (n, n_thr, 3)
    stop_steps: np.ndarray  # (n, n_thr)
    by_tmax: np.ndarray  # (n, n_thr)
    records: list | None = None


def _thresholds_array(kind: str, thresholds, dt: float) -> np.ndarray:
    thr = np.asarray(thresholds, dtype=float).reshape(-1)
    if thr.size == 0:
        raise ValueError("need at least one threshold")
    if kind == "timer":
        steps = np.rint(thr / dt)
        if np.any(np.abs(steps * dt - thr) > 1e-9 * max(1.0, thr.max())):
            raise ValueError("timer stop times must be multiples of dt")
        return steps.astype(np.int64)
    return thr


def _simulate_chunk(params: ModelParams, dt: float, t_max: float, kind: str, thresholds,
                    seeds: Sequence[int], record_period: int, tail: TailReadout,
                    record_row: int | None = None) -> _Chunk:
    C = coords()
    n = len(seeds)
    thr = _thresholds_array(kind, thresholds, dt)
    n_thr = thr.size
    n_steps = int(round(t_max / dt))
    stochastic = params.measured
    if kind != "timer" and not stochastic:
        raise DegenerateNoise(f"{kind} controller needs a measurement record (eta*gamma > 0)")

    if stochastic:
        L = generator(params, pump_on=True, dephasing=False)
        beta = params.beta()
    else:
        L = generator(params, pump_on=True)
    PT = rk4_propagator(L, dt).T.copy()
    diag = C.diag

    V = np.tile(C.to_coords(ground_state()), (n, 1))
    probs = np.zeros((n, n_thr, 3))
    stop_steps = np.full((n, n_thr), n_steps, dtype=np.int64)
    fired = np.zeros((n, n_thr), dtype=bool)
    by_tmax = np.zeros((n, n_thr), dtype=bool)
    active = np.arange(n)
    live = fired.copy()  # ``fired`` restricted to active rows
    gens = [np.random.Generator(np.random.PCG64(s)) for s in seeds] if stochastic else None
    sqdt = math.sqrt(dt)
    dt_avg = record_period * dt

    if kind == "cusum":
        hyp = detect.Hypotheses(beta=beta, dt_avg=dt_avg)
        S = np.zeros(n)
        m = np.zeros(n)
    elif kind == "bayes":
        chain = bayes.ChainParams.from_model(params)
        bp = np.zeros((n, chain.K + 1))
        bp[:, 0] = 1.0
        xbar = np.zeros(n)
    y_acc = np.zeros(n)
    records = [] if record_row is not None else None

    def capture(newly, step, tmax=False):
        rows = np.flatnonzero(newly.any(axis=1))
        out = tail(V[rows])
        try:
            _check_tail(tail, out)
        except TailNotConverged as exc:
            raise _tagged(exc, active[rows][out[:, 3] >= TAIL_RESIDUAL_TOL]) from None
        sub = newly[rows]
        r_idx, j_idx = np.nonzero(sub)
        a_idx = active[rows][r_idx]
        probs[a_idx, j_idx] = out[r_idx, :3]
        stop_steps[a_idx, j_idx] = step
        fired[a_idx, j_idx] = True
        by_tmax[a_idx, j_idx] = tmax
        live[rows] |= sub

    if kind == "timer" and np.any(thr == 0):
        capture(np.broadcast_to(thr == 0, (n, n_thr)), 0)

    buf = None
    for k in range(n_steps):
        if active.size == 0:
            break
        if stochastic:
            j = k % NOISE_BLOCK
            if j == 0:
                buf = np.stack([gens[i].standard_normal(NOISE_BLOCK) for i in active]) * sqdt
            dW = buf[:, j]
            V, e = measure_coords(V, params, dt, dW)
            tr_in = V[:, diag].sum(axis=1)
            y = e * dt + beta * dW
            y_acc += y
            if record_row is not None:
                r = int(np.searchsorted(active, record_row))
                if r < active.size and active[r] == record_row:
                    records.append((k * dt, float(y[r]), float(e[r])))
        else:
            tr_in = 1.0
        V = V @ PT
        tr = V[:, diag].sum(axis=1)
        drift = np.abs(tr / tr_in - 1.0)
        if np.any(drift > TRACE_DRIFT_TOL):
            raise _tagged(StepUnstable(f"trace drift {drift.max():.2e} at t={(k + 1) * dt:g}"),
                          active[drift > TRACE_DRIFT_TOL])
        V /= tr[:, None]
        step = k + 1

        newly = None
        if kind == "timer":
            newly = (thr[None, :] == step) & ~live
        elif step % record_period == 0:
            if kind == "cusum":
                S, m = detect.cusum_fold(S, m, detect.llr_increment(y_acc, hyp))
                newly = ((S - m)[:, None] > thr[None, :]) & ~live
            else:
                bp, xbar, _ = bayes.filter_arrays(bp, xbar, chain, y_acc, dt_avg, beta)
                newly = bayes.stop_mask(bp[:, None, :], thr[None, :]) & ~live
            y_acc = np.zeros(active.size)
        if newly is not None and newly.any():
            capture(newly, step)

        if step % 100 == 0:
            lo = np.linalg.eigvalsh(C.to_matrix(V)).min(axis=-1)
            if np.any(lo < POSITIVITY_TOL):
                raise _tagged(StepUnstable(f"negative eigenvalue {lo.min():.2e} at t={step * dt:g}"),
                              active[lo < POSITIVITY_TOL])

        done = live.all(axis=1)
        if done.any():
            keep = ~done
            active, V, y_acc, live = active[keep], V[keep], y_acc[keep], live[keep]
            if buf is not None:
                buf = buf[keep]
            if kind == "cusum":
                S, m = S[keep], m[keep]
            elif kind == "bayes":
                bp, xbar = bp[keep], xbar[keep]

    if active.size:
        capture(~live, n_steps, tmax=True)
    return _Chunk(probs, stop_steps, by_tmax, records)


def _tagged(exc: Exception, local_rows) -> Exception:
    exc.chunk_rows = [int(r) for r in local_rows]
    return exc


def _chunk_job(args):
    try:
        return _simulate_chunk(*args)
    except SimulationError as exc:
        exc.chunk_seeds = list(args[5])
        raise


def _run_indices(params, ctrl: RunControl, kind, thresholds, indices, tail):
    """Simulate trajectories ``indices`` in fixed chunks; reduce in index order."""
    indices = list(indices)
    jobs = []
    for start in range(0, len(indices), CHUNK_SIZE):
        seeds = [trajectory_seed(ctrl.seed, i) for i in indices[start:start + CHUNK_SIZE]]
        jobs.append((params, ctrl.dt, ctrl.t_max, kind, thresholds, seeds,
                     ctrl.record_period, tail))
    try:
        if ctrl.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=ctrl.workers) as pool:
                chunks = list(pool.map(_chunk_job, jobs))
        else:
            chunks = [_chunk_job(j) for j in jobs]
    except SimulationError as exc:
        _attach_index(exc, jobs, indices)
        raise
    return (np.concatenate([c.probs for c in chunks]),
            np.concatenate([c.stop_steps for c in chunks]),
            np.concatenate([c.by_tmax for c in chunks]))


def _attach_index(exc: SimulationError, jobs, indices) -> None:
    """Name the first failing trajectory in the message (``exc.traj_index``)."""
    rows = getattr(exc, "chunk_rows", None)
    seeds = getattr(exc, "chunk_seeds", None)
    if not rows or seeds is None:
        return
    for start in range(0, len(indices), CHUNK_SIZE):
        if jobs[start // CHUNK_SIZE][5] == seeds:
            exc.traj_index = indices[start + rows[0]]
            exc.args = (f"trajectory {exc.traj_index}: {exc.args[0]}",) + exc.args[1:]
            return


# -- public operations --------------------------------------------------------------


def _tail_for(params: ModelParams, ctrl: RunControl) -> TailReadout:
    return tail_readout(params, ctrl.t_tail)


def run_trajectory(params: ModelParams, ctrl: RunControl, traj_index: int = 0,
                   with_record: bool = False):
    """Single trajectory; identical to row ``traj_index`` of :func:`monte_carlo` with ``ctrl``.

    The fixed-size chunk holding ``traj_index`` is simulated in full because
    batched matrix products round differently from single-row ones.

    With ``with_record=True`` also returns the pumping-phase record as a list of
    ``(t, y, expect_PX, pump_on)`` rows ending with the switch-off row.
    """
    # simulate the whole chunk so batched arithmetic matches monte_carlo bit for bit
    start = traj_index - traj_index % CHUNK_SIZE
    stop = min(start + CHUNK_SIZE, max(ctrl.n_traj, traj_index + 1))
    row = traj_index - start
    tail = _tail_for(params, ctrl)
    chunk = _simulate_chunk(params, ctrl.dt, ctrl.t_max, ctrl.controller, [ctrl.threshold()],
                            [trajectory_seed(ctrl.seed, i) for i in range(start, stop)],
                            ctrl.record_period, tail, record_row=row if with_record else None)
    step = int(chunk.stop_steps[row, 0])
    outcome = TrajectoryOutcome(
        stop_time=step * ctrl.dt,
        probs=tuple(float(x) for x in chunk.probs[row, 0]),
        stopped_by="t_max" if chunk.by_tmax[row, 0] else "controller",
    )
    if not with_record:
        return outcome
    rec = [(t, y, e, 1) for (t, y, e) in chunk.records]
    rec.append((step * ctrl.dt, math.nan, math.nan, 0))
    return outcome, rec


@dataclass(frozen=True)
class ThresholdScan:
    """Monte Carlo results for one controller over a threshold grid."""

    controller: str
    thresholds: tuple[float, ...]
    probs: np.ndarray  # (n_traj, n_thr, 3)
    stop_times: np.ndarray  # (n_traj, n_thr)
    by_tmax: np.ndarray
    params: ModelParams

    def stats(self, j: int) -> PhotonStats:
        return PhotonStats.from_probs(self.probs[:, j], self.stop_times[:, j], self.controller,
                                      self.thresholds[j], self.params)

    def all_stats(self) -> list[PhotonStats]:
        return [self.stats(j) for j in range(len(self.thresholds))]

    def best(self, epsilon: float = 0.01) -> PhotonStats:
        """Largest mean p1 among thresholds with mean p2plus <= epsilon (ties -> first)."""
        ok = [s for s in self.all_stats() if s.mean_p2plus <= epsilon]
        if not ok:
            raise NoFeasibleTime(f"no {self.controller} threshold keeps p2plus <= {epsilon}")
        return max(ok, key=lambda s: s.mean_p1)


def scan_thresholds(params: ModelParams, ctrl: RunControl, thresholds) -> ThresholdScan:
    thresholds = tuple(float(t) for t in thresholds)
    tail = _tail_for(params, ctrl)
    probs, steps, tmax = _run_indices(params, ctrl, ctrl.controller, thresholds,
                                      range(ctrl.n_traj), tail)
    return ThresholdScan(ctrl.controller, thresholds, probs, steps * ctrl.dt, tmax, params)


def monte_carlo(params: ModelParams, ctrl: RunControl) -> PhotonStats:
    return scan_thresholds(params, ctrl, [ctrl.threshold()]).stats(0)


def optimize_h(params: ModelParams, ctrl: RunControl, h_grid=DEFAULT_H_GRID) -> tuple[PhotonStats, ThresholdScan]:
    """Best CUSUM threshold on ``h_grid`` under ``p2plus <= ctrl.epsilon``."""
    scan = scan_thresholds(params, ctrl.replace(controller="cusum"), sorted(h_grid))
    return scan.best(ctrl.epsilon), scan


def ensemble_states(params: ModelParams, t: float, n_traj: int, seed: int = 0,
                    dt: float = 0.01, pump_on: bool = True) -> np.ndarray:
    """Conditional states at time ``t`` of ``n_traj`` monitored trajectories from ``|G,0,0>``.

    Uses the same split step and per-trajectory seeds as the Monte Carlo kernel
    but no controller. Returns an array of shape ``(n_traj, 9, 9)``.
    """
    if not params.measured:
        raise DegenerateNoise("trajectories need eta*gamma > 0")
    C = coords()
    PT = rk4_propagator(generator(params, pump_on, dephasing=False), dt).T.copy()
    n_steps = int(round(t / dt))
    gens = [np.random.Generator(np.random.PCG64(trajectory_seed(seed, i))) for i in range(n_traj)]
    V = np.tile(C.to_coords(ground_state()), (n_traj, 1))
    sqdt = math.sqrt(dt)
    for k in range(n_steps):
        j = k % NOISE_BLOCK
        if j == 0:
            buf = np.stack([g.standard_normal(NOISE_BLOCK) for g in gens]) * sqdt
        V, _ = measure_coords(V, params, dt, buf[:, j])
        V = V @ PT
        V /= V[:, C.diag].sum(axis=1)[:, None]
    return C.to_matrix(V)


# -- deterministic benchmark -----------------------------------------------------------


@dataclass(frozen=True)
class DeterministicCurve:
    t: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2plus: np.ndarray
    params: ModelParams

    def rows(self):
        return zip(self.t, self.p0, self.p1, self.p2plus)


def deterministic_curve(params: ModelParams, t_grid, dt: float = 0.01,
                        t_tail: float | None = None) -> DeterministicCurve:
    """Photon statistics versus pumping duration from the Lindblad equation."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be ascending")
    steps = np.rint(t_grid / dt).astype(np.int64)
    if np.any(np.abs(steps * dt - t_grid) > 1e-9 * max(1.0, float(t_grid.max(initial=0.0)))):
        raise ValueError("t_grid entries must be multiples of dt")
    C = coords()
    P = rk4_propagator(generator(params, pump_on=True), dt)
    tail = tail_readout(params, t_tail)
    v = C.to_coords(ground_state())
    out = np.zeros((t_grid.size, 4))
    done = 0
    for i, n in enumerate(steps):
        for _ in range(n - done):
            v = P @ v
            v = v / v[C.diag].sum()
        done = n
        out[i] = tail(v)
    _check_tail(tail, out)
    return DeterministicCurve(t_grid, out[:, 0], out[:, 1], out[:, 2], params)


@dataclass(frozen=True)
class TimerOptimum:
    t_stop: float
    p0: float
    p1: float
    p2plus: float


def optimal_timer(curve: DeterministicCurve, epsilon: float) -> TimerOptimum:
    """Argmax of p1 over the grid subject to p2plus <= epsilon; ties go to the smaller t.

    ``t = 0`` is always feasible when it is on the grid, so ``epsilon = 0``
    returns ``t_stop = 0`` there; without it :class:`NoFeasibleTime` is raised.
    """
    ok = np.flatnonzero(curve.p2plus <= epsilon)
    if ok.size == 0:
        raise NoFeasibleTime(f"p2plus exceeds {epsilon} at every grid time")
    i = ok[np.argmax(curve.p1[ok])]  # argmax returns the first maximum
    return TimerOptimum(float(curve.t[i]), float(curve.p0[i]), float(curve.p1[i]),
                        float(curve.p2plus[i]))


def timer_grid(t_max: float, dt: float, spacing: float = 0.1) -> np.ndarray:
    n = int(round(spacing / dt))
    return np.arange(0, int(round(t_max / dt)) + 1, n) * dt


# -- sweeps ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Case:
    """One curve of a sweep: controller plus monitoring settings."""

    controller: str  # "deterministic" | "cusum" | "bayes"
    gamma: float
    eta: float

    @property
    def label(self) -> str:
        return f"{self.controller}(gamma={self.gamma:g},eta={self.eta:g})"


RESULT_COLUMNS = ("omega", "gamma", "eta", "controller", "h_or_eps", "p0", "p1", "p2plus",
                  "se_p0", "se_p1", "se_p2plus", "n_traj", "mean_stop_time")


@dataclass(frozen=True)
class SweepRow:
    omega: float
    gamma: float
    eta: float
    controller: str
    h_or_eps: float
    p0: float
    p1: float
    p2plus: float
    se_p0: float
    se_p1: float
    se_p2plus: float
    n_traj: int
    mean_stop_time: float

    @classmethod
    def from_stats(cls, s: PhotonStats, controller: str | None = None) -> "SweepRow":
        return cls(s.params.Omega, s.params.gamma, s.params.eta, controller or s.controller,
                   s.threshold, s.mean_p0, s.mean_p1, s.mean_p2plus, s.se_p0, s.se_p1,
                   s.se_p2plus, s.n_traj, s.mean_stop_time)


def evaluate_case(params: ModelParams, case: Case, ctrl: RunControl,
                  h_grid=DEFAULT_H_GRID, timer_spacing: float = 0.1) -> SweepRow:
    p = params.replace(gamma=case.gamma, eta=case.eta)
    if case.controller == "deterministic":
        curve = deterministic_curve(p, timer_grid(ctrl.t_max, ctrl.dt, timer_spacing), ctrl.dt,
                                    ctrl.t_tail)
        opt = optimal_timer(curve, ctrl.epsilon)
        return SweepRow(p.Omega, p.gamma, p.eta, "deterministic", opt.t_stop, opt.p0, opt.p1,
                        opt.p2plus, 0.0, 0.0, 0.0, 0, opt.t_stop)
    if case.controller == "cusum":
        best, _ = optimize_h(p, ctrl, h_grid)
        return SweepRow.from_stats(best)
    if case.controller == "bayes":
        return SweepRow.from_stats(monte_carlo(p, ctrl.replace(controller="bayes")))
    if case.controller == "timer":
        return SweepRow.from_stats(monte_carlo(p, ctrl.replace(controller="timer")))
    raise ValueError(f"unknown case controller {case.controller!r}")


def sweep_omega(params_base: ModelParams, omega_grid, cases: Sequence[Case], ctrl: RunControl,
                h_grid=DEFAULT_H_GRID) -> list[SweepRow]:
    if len(omega_grid) == 0 or len(cases) == 0:
        raise ValueError("omega_grid and cases must be non-empty")
    rows = []
    for om in omega_grid:
        for case in cases:
            rows.append(evaluate_case(params_base.replace(Omega=float(om)), case, ctrl, h_grid))
    return rows


NOISE_CASES = (
    Case("deterministic", 1.0, 0.0),
    Case("cusum", 10.0, 1.0),
    Case("cusum", 1.0, 1.0),
    Case("cusum", 0.1, 1.0),
)

EFFICIENCY_CASES = (
    Case("deterministic", 1.0, 0.0),
    Case("cusum", 1.0, 1.0),
    Case("cusum", 1.0, 0.1),
    Case("cusum", 2.0, 0.5),
)
