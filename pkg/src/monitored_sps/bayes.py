"""Bayesian pump controller on the two-rate Markov chain approximation.

Chain states ``k = 2 n + x``: ``n`` photons already emitted, ``x`` dot
occupation. Even ``k`` pumps to ``k + 1`` at ``r_p = Omega``; odd ``k`` emits
to ``k + 1`` at ``r_e = 4 g^2 / kappa``. The chain is cut at ``K = 5`` with the
last state absorbing. Spontaneous emission is not part of the chain.

Filtering follows the first-order (``dt << beta^2``) Bayes update: after the
prior drift every even state is multiplied by ``1 - xbar (y - xbar dt) / beta^2``
and every odd state by ``1 + (1 - xbar)(y - xbar dt) / beta^2``. Those factors
can dip below zero for large innovations, so probabilities are clipped at 0
and renormalised; ``n_clipped`` counts how often that happened.

All array functions accept a leading batch axis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from monitored_sps.detect import Decision

K_MAX = 5


@dataclass(frozen=True)
class ChainParams:
    r_p: float
    r_e: float
    K: int = K_MAX

    def __post_init__(self):
        if self.r_p <= 0 or self.r_e <= 0:
            raise ValueError("chain rates must be positive")
        if self.K < 3:
            raise ValueError("need K >= 3 to represent multi-photon states")

    @classmethod
    def from_model(cls, params, K: int = K_MAX) -> "ChainParams":
        return cls(r_p=params.Omega, r_e=4.0 * params.g**2 / params.kappa, K=K)

    def generator(self) -> np.ndarray:
        """Rate matrix ``Q`` with ``dp/dt = Q p``."""
        n = self.K + 1
        Q = np.zeros((n, n))
        for k in range(self.K):
            rate = self.r_p if k % 2 == 0 else self.r_e
            Q[k, k] -= rate
            Q[k + 1, k] += rate
        return Q


@dataclass(frozen=True)
class BayesFilterState:
    p: np.ndarray
    xbar: float
    n_clipped: int = 0

    @classmethod
    def initial(cls, K: int = K_MAX) -> "BayesFilterState":
        p = np.zeros(K + 1)
        p[0] = 1.0
        return cls(p, 0.0)

    @property
    def p_tail(self) -> float:
        return float(1.0 - self.p[..., :3].sum(-1))


def odd_mass(p: np.ndarray) -> np.ndarray:
    return p[..., 1::2].sum(-1)


def prior_drift(p: np.ndarray, chain: ChainParams) -> np.ndarray:
    out = np.zeros_like(p)
    even = p[..., 0:chain.K:2] * chain.r_p
    odd = p[..., 1:chain.K:2] * chain.r_e
    out[..., 0:chain.K:2] -= even
    out[..., 1:chain.K + 1:2] += even
    out[..., 1:chain.K:2] -= odd
    out[..., 2:chain.K + 1:2] += odd
    return out


def prior_step(state: BayesFilterState, chain: ChainParams, dt: float,
               method: str = "euler") -> BayesFilterState:
    """Advance the unconditioned chain by ``dt``.

    ``method="euler"`` is the forward-Euler step used inside the filter;
    ``"expm"`` applies the exact transition matrix ``exp(Q dt)``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if method == "euler":
        p = state.p + prior_drift(state.p, chain) * dt
    elif method == "expm":
        p = state.p @ expm(chain.generator() * dt).T
    else:
        raise ValueError(f"unknown method {method!r}")
    return replace(state, p=p, xbar=float(odd_mass(p)))


def q1_step(xbar, chain: ChainParams, dt: float, y, beta: float):
    """Closed recursion for the excited-dot probability ``xbar``; clipped to [0, 1]."""
    nxt = (xbar - (chain.r_p + chain.r_e) * xbar * dt + chain.r_p * dt
           + xbar * (1.0 - xbar) * (y - xbar * dt) / beta**2)
    return np.clip(nxt, 0.0, 1.0)


def conditioning_factors(xbar, y, dt: float, beta: float, n: int):
    """Per-state likelihood ratios ``p(y|x)/p(y)`` to first order, shape ``(..., n)``."""
    xbar = np.asarray(xbar, dtype=float)
    innov = (np.asarray(y) - xbar * dt) / beta**2
    even = 1.0 - xbar * innov
    odd = 1.0 + (1.0 - xbar) * innov
    k = np.arange(n)
    return np.where(k % 2 == 0, even[..., None], odd[..., None])


def _clip_renorm(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    neg = (p < 0).any(-1)
    p = np.maximum(p, 0.0)
    return p / p.sum(-1, keepdims=True), neg


def posterior_update(state: BayesFilterState, y: float, dt: float, beta: float) -> BayesFilterState:
    if beta <= 0:
        raise ValueError("beta must be positive")
    p = state.p * conditioning_factors(state.xbar, y, dt, beta, state.p.shape[-1])
    p, neg = _clip_renorm(p)
    return BayesFilterState(p, float(odd_mass(p)), state.n_clipped + int(np.sum(neg)))


def filter_arrays(p, xbar, chain: ChainParams, y, dt: float, beta: float):
    """Combined prior + conditioning step on arrays; returns ``(p, xbar, clipped)``.

    Both parts are evaluated at the pre-step ``(p, xbar)`` and added, matching
    the one-step recursion for each ``p_k``.
    """
    f = conditioning_factors(xbar, y, dt, beta, p.shape[-1])
    nxt = p + prior_drift(p, chain) * dt + p * (f - 1.0)
    nxt, neg = _clip_renorm(nxt)
    return nxt, odd_mass(nxt), neg


def filter_step(state: BayesFilterState, chain: ChainParams, y: float, dt: float,
                beta: float) -> BayesFilterState:
    p, xbar, neg = filter_arrays(state.p, state.xbar, chain, y, dt, beta)
    return BayesFilterState(p, float(xbar), state.n_clipped + int(neg))


def stop_mask(p: np.ndarray, epsilon) -> np.ndarray:
    return p[..., :3].sum(-1) < 1.0 - np.asarray(epsilon)


def should_stop(state: BayesFilterState, epsilon: float) -> Decision:
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    return Decision.H1_stop if bool(stop_mask(state.p, epsilon)) else Decision.H0_continue


TRACE_COLUMNS = ("t", "y", "xbar", "p0", "p1", "p2", "p_tail", "verdict")


def filter_trace(ys, chain: ChainParams, dt: float, beta: float, epsilon: float,
                 stop_at_first: bool = True) -> list[dict]:
    state = BayesFilterState.initial(chain.K)
    rows = []
    for i, y in enumerate(ys, start=1):
        state = filter_step(state, chain, float(y), dt, beta)
        d = should_stop(state, epsilon)
        rows.append(dict(t=i * dt, y=float(y), xbar=state.xbar, p0=float(state.p[0]),
                         p1=float(state.p[1]), p2=float(state.p[2]), p_tail=state.p_tail,
                         verdict=d.name))
        if stop_at_first and d is Decision.H1_stop:
            break
    return rows


def write_trace(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([f"{r[c]:.17g}" if isinstance(r[c], float) else r[c] for c in TRACE_COLUMNS])
