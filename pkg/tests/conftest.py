import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from monitored_sps.dynamics import ModelParams, operators
from monitored_sps.hilbert import build_space

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def space():
    return build_space()


@pytest.fixture(scope="session")
def ops():
    return operators()


@pytest.fixture
def params():
    return ModelParams()


def random_state(rng: np.random.Generator, space, block_diagonal: bool = True) -> np.ndarray:
    """Random density matrix, optionally restricted to equal-quanta blocks."""
    n = space.dim
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = A @ A.conj().T
    if block_diagonal:
        q = space.quanta()
        rho = rho * (q[:, None] == q[None, :])
    return rho / np.trace(rho).real


@functools.lru_cache(maxsize=None)
def case_result(controller: str, gamma: float, eta: float, omega: float, n_traj: int = 1000,
                seed: int = 0):
    """Best-p1 row for one sweep case, shared between test modules."""
    from monitored_sps.experiment import Case, RunControl, evaluate_case

    return evaluate_case(ModelParams(Omega=omega), Case(controller, gamma, eta),
                         RunControl(n_traj=n_traj, seed=seed))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}: {detail}")
