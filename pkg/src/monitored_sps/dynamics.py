"""Stochastic master equation for the monitored dot and its Lindblad limit.

Generator (hbar = 1, rates in units of kappa)::

    d rho = -i[H, rho] dt
            + (Gamma H[s-] + kappa H[a b^dag] + gamma H[P_X] + Omega H[s+]) rho dt
            + sqrt(eta gamma) D[P_X] rho dW

    H[A] rho = A rho A^dag - (A^dag A rho + rho A^dag A) / 2
    D[P] rho = P rho + rho P - 2 <P> rho

The observer receives ``y = <P_X> dt + beta dW`` per step with
``beta = (eta gamma)^(-1/2)``; the same ``dW`` drives the state update.

Two stochastic schemes are provided:

``"split"`` (default)
    RK4 for the unmonitored part of the generator, then the closed-form map for
    dephasing plus diffusive readout of the projector ``P_X``. Because
    ``P_X`` is diagonal with eigenvalues 0/1, the monitored part alone is
    solved exactly by scaling ``rho_ij`` with
    ``exp(c n_ij dY - c^2 n_ij^2 dt / 2 - gamma d_ij dt / 2)``, where
    ``c = sqrt(eta gamma)``, ``n_ij = x_i + x_j``, ``d_ij = (x_i - x_j)^2``,
    ``x`` is the dot excitation of each basis state and
    ``dY = 2 c <P_X> dt + dW``. That map is completely positive, so
    trajectories stay physical at any signal strength.
``"euler"``
    RK4 drift of the full Lindblad generator plus the Euler-Maruyama
    increment ``sqrt(eta gamma) D[P_X] rho dW``. Kept as a reference; at
    ``gamma = 10`` it regularly produces negative populations at
    ``dt = 0.01`` and then aborts with :class:`StepUnstable`.
"""

from __future__ import annotations

import functools
from dataclasses import asdict, dataclass

import numpy as np

from monitored_sps.errors import DegenerateNoise, StepUnstable
from monitored_sps.hilbert import StateSpace, build_space, hamiltonian, make_operator

TRACE_DRIFT_TOL = 1e-6
POSITIVITY_TOL = -1e-5


@dataclass(frozen=True)
class ModelParams:
    """Physical rates, all in units of the cavity leakage rate.

    Defaults are the dot/cavity values ``g = 0.1, Gamma = 0.001, kappa = 1``
    with dephasing ``gamma = 1``, perfect monitoring and ``Omega = 0.1``.
    """

    g: float = 0.1
    Gamma: float = 0.001
    kappa: float = 1.0
    gamma: float = 1.0
    Omega: float = 0.1
    eta: float = 1.0

    def __post_init__(self):
        for name in ("g", "Gamma", "kappa", "gamma", "Omega"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be a finite non-negative rate, got {v!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")

    @property
    def measured(self) -> bool:
        return self.eta * self.gamma > 0

    def beta(self) -> float:
        if not self.measured:
            raise DegenerateNoise("beta = (eta*gamma)^-1/2 is undefined for eta*gamma == 0")
        return (self.eta * self.gamma) ** -0.5

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**asdict(self), **changes})


@dataclass
class StepOutput:
    rho_next: np.ndarray
    y: float | None
    expect_PX: float


@dataclass(frozen=True)
class Operators:
    space: StateSpace
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray
    a_bdag: np.ndarray
    proj_X: np.ndarray
    jc: np.ndarray  # Hamiltonian for g = 1

    def hamiltonian(self, g: float) -> np.ndarray:
        return g * self.jc

    def dissipators(self, params: ModelParams, pump_on: bool, dephasing: bool = True):
        out = [
            (params.Gamma, self.sigma_minus),
            (params.kappa, self.a_bdag),
        ]
        if dephasing:
            out.append((params.gamma, self.proj_X))
        if pump_on:
            out.append((params.Omega, self.sigma_plus))
        return [(r, A) for r, A in out if r > 0]


@functools.lru_cache(maxsize=None)
def operators() -> Operators:
    space = build_space()
    return Operators(
        space=space,
        sigma_minus=make_operator("sigma_minus", space),
        sigma_plus=make_operator("sigma_plus", space),
        a_bdag=make_operator("a_bdag", space),
        proj_X=make_operator("proj_X", space),
        jc=hamiltonian(1.0, space),
    )


def ground_state() -> np.ndarray:
    ops = operators()
    return ops.space.projector(("G", 0, 0))


def expect(rho: np.ndarray, op: np.ndarray) -> float:
    return float(np.real(np.trace(op @ rho)))


def _lindblad(rho, H, dissipators):
    out = -1j * (H @ rho - rho @ H)
    for rate, A in dissipators:
        Ad = A.conj().T
        AdA = Ad @ A
        out += rate * (A @ rho @ Ad - 0.5 * (AdA @ rho + rho @ AdA))
    return out


def lindblad_rhs(rho: np.ndarray, params: ModelParams, pump_on: bool) -> np.ndarray:
    ops = operators()
    return _lindblad(rho, ops.hamiltonian(params.g), ops.dissipators(params, pump_on))


def _rk4(f, rho, dt):
    k1 = f(rho)
    k2 = f(rho + 0.5 * dt * k1)
    k3 = f(rho + 0.5 * dt * k2)
    k4 = f(rho + dt * k3)
    return rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _tidy(rho: np.ndarray) -> np.ndarray:
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.real(np.trace(rho))
    if abs(tr - 1.0) > TRACE_DRIFT_TOL:
        raise StepUnstable(f"trace drifted to {tr!r}; reduce dt")
    return rho / tr


def check_positive(rho: np.ndarray, tol: float = POSITIVITY_TOL) -> float:
    lo = float(np.linalg.eigvalsh(rho).min())
    if lo < tol:
        raise StepUnstable(f"density matrix eigenvalue {lo:.3e} below {tol:g}")
    return lo


def step_deterministic(rho: np.ndarray, params: ModelParams, pump_on: bool, dt: float) -> np.ndarray:
    """One classical RK4 step of the Lindblad equation, symmetrised and renormalised."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return _tidy(_rk4(lambda r: lindblad_rhs(r, params, pump_on), rho, dt))


def sample_record(expect_PX: float, params: ModelParams, dt: float, dW):
    """Time-integrated readout ``<P_X> dt + beta dW``; works on arrays."""
    return expect_PX * dt + params.beta() * dW


def measurement_map(rho: np.ndarray, params: ModelParams, dt: float, dW: float) -> np.ndarray:
    """Exact dephasing + diffusive readout of ``P_X`` over one step, normalised."""
    x = operators().space.dot_excited()
    c = np.sqrt(params.eta * params.gamma)
    e = float(np.real(np.diag(rho)) @ x)
    dY = 2.0 * c * e * dt + dW
    n = x[:, None] + x[None, :]
    d = (x[:, None] - x[None, :]) ** 2
    out = rho * np.exp(c * n * dY - 0.5 * c * c * n * n * dt - 0.5 * params.gamma * d * dt)
    return out / np.real(np.trace(out))


def step_stochastic(
    rho: np.ndarray,
    params: ModelParams,
    pump_on: bool,
    dt: float,
    dW: float,
    *,
    scheme: str = "split",
    record: bool = True,
) -> StepOutput:
    ops = operators()
    e = expect(rho, ops.proj_X)
    if not params.measured:
        if record:
            raise DegenerateNoise("no measurement record exists when eta*gamma == 0")
        return StepOutput(step_deterministic(rho, params, pump_on, dt), None, e)
    y = float(sample_record(e, params, dt, dW)) if record else None

    if scheme == "split":
        H = ops.hamiltonian(params.g)
        diss = ops.dissipators(params, pump_on, dephasing=False)
        rho1 = measurement_map(rho, params, dt, dW)
        nxt = _tidy(_rk4(lambda r: _lindblad(r, H, diss), rho1, dt))
    elif scheme == "euler":
        P = ops.proj_X
        drift = _rk4(lambda r: lindblad_rhs(r, params, pump_on), rho, dt)
        kick = np.sqrt(params.eta * params.gamma) * (P @ rho + rho @ P - 2.0 * e * rho) * dW
        nxt = _tidy(drift + kick)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    check_positive(nxt)
    return StepOutput(nxt, y, e)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


# -- real coordinates on the reachable block-diagonal support -----------------


class HermitianCoords:
    """Real parametrisation of Hermitian matrices supported on equal-quanta blocks.

    Every generator term preserves total quanta or shifts both sides of rho by
    the same amount, so a state starting in ``|G,0,0>`` stays block diagonal.
    Coordinates are ``rho_ii`` for diagonal entries and ``(Re, Im)`` of
    ``rho_ij`` for ``i < j`` in the same block: 35 numbers for the 9-state space.
    """

    def __init__(self, space: StateSpace | None = None):
        self.space = space or build_space()
        q = self.space.quanta()
        x = self.space.dot_excited()
        n = self.space.dim
        rows, cols, part = [], [], []
        for i in range(n):
            rows.append(i), cols.append(i), part.append(0)
        for i in range(n):
            for j in range(i + 1, n):
                if q[i] == q[j]:
                    rows += [i, i]
                    cols += [j, j]
                    part += [0, 1]
        self.rows = np.array(rows)
        self.cols = np.array(cols)
        self.part = np.array(part)  # 0 = real part, 1 = imaginary part
        self.size = len(rows)
        self.diag = np.arange(n)  # diagonal coordinates come first
        self.excited_diag = np.flatnonzero(x)
        self.n_excited = x[self.rows] + x[self.cols]
        self.mismatch = (x[self.rows] - x[self.cols]) ** 2

    def to_coords(self, rho: np.ndarray) -> np.ndarray:
        v = rho[..., self.rows, self.cols]
        return np.where(self.part == 0, v.real, v.imag)

    def to_matrix(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        n = self.space.dim
        out = np.zeros(c.shape[:-1] + (n, n), dtype=complex)
        re = self.part == 0
        im = ~re
        out[..., self.rows[re], self.cols[re]] += c[..., re]
        out[..., self.rows[im], self.cols[im]] += 1j * c[..., im]
        off = self.rows != self.cols
        out[..., self.cols[off & re], self.rows[off & re]] += c[..., off & re]
        out[..., self.cols[off & im], self.rows[off & im]] -= 1j * c[..., off & im]
        return out

    def basis(self, m: int) -> np.ndarray:
        e = np.zeros(self.size)
        e[m] = 1.0
        return self.to_matrix(e)

    def superoperator(self, fn) -> np.ndarray:
        """Matrix of a Hermiticity-preserving linear map in these coordinates.

        Raises if the map leaks out of the block-diagonal support.
        """
        cols = []
        mask = np.zeros((self.space.dim,) * 2, dtype=bool)
        mask[self.rows, self.cols] = True
        mask[self.cols, self.rows] = True
        for m in range(self.size):
            out = fn(self.basis(m))
            if np.abs(out[~mask]).max(initial=0.0) > 1e-14:
                raise ValueError("map leaves the block-diagonal support")
            cols.append(self.to_coords(out))
        return np.array(cols).T


@functools.lru_cache(maxsize=None)
def coords() -> HermitianCoords:
    return HermitianCoords()


def measure_coords(V: np.ndarray, params: ModelParams, dt: float, dW) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`measurement_map` on rows of coordinates, left unnormalised.

    ``V`` is scaled in place. Returns ``(V, <P_X>)`` with the expectation taken
    before the step.
    """
    C = coords()
    c = np.sqrt(params.eta * params.gamma)
    e = V[..., C.excited_diag].sum(axis=-1)
    dY = 2.0 * c * e * dt + dW
    one, two = _excited_groups()
    V[..., one] *= np.exp(c * dY - 0.5 * (c * c + params.gamma) * dt)[..., None]
    V[..., two] *= np.exp(2.0 * c * dY - 2.0 * c * c * dt)[..., None]
    return V, e


@functools.lru_cache(maxsize=None)
def _excited_groups() -> tuple[np.ndarray, np.ndarray]:
    # coordinates with one side / both sides in the X manifold
    C = coords()
    return np.flatnonzero(C.n_excited == 1), np.flatnonzero(C.n_excited == 2)


def generator(params: ModelParams, pump_on: bool, dephasing: bool = True) -> np.ndarray:
    """Lindblad generator as a real matrix on :func:`coords`."""
    ops = operators()
    H = ops.hamiltonian(params.g)
    diss = ops.dissipators(params, pump_on, dephasing=dephasing)
    return coords().superoperator(lambda r: _lindblad(r, H, diss))


def rk4_propagator(L: np.ndarray, dt: float) -> np.ndarray:
    """Matrix of one RK4 step for the linear ODE ``dv/dt = L v``.

    For a constant linear generator RK4 reduces to the degree-4 Taylor
    polynomial of ``exp(L dt)``.
    """
    A = L * dt
    eye = np.eye(L.shape[0])
    A2 = A @ A
    return eye + A + A2 / 2.0 + (A2 @ A) / 6.0 + (A2 @ A2) / 24.0
