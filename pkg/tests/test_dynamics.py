import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from monitored_sps.dynamics import (
    ModelParams,
    check_positive,
    coords,
    expect,
    generator,
    ground_state,
    lindblad_rhs,
    measure_coords,
    measurement_map,
    rk4_propagator,
    sample_record,
    step_deterministic,
    step_stochastic,
    trace_distance,
)
from monitored_sps.errors import DegenerateNoise, StepUnstable

CLOSED = ModelParams(g=0.1, Gamma=0.0, kappa=0.0, gamma=0.0, Omega=0.0, eta=0.0)

rates = st.floats(0.0, 2.0, allow_nan=False)
param_st = st.builds(ModelParams, g=st.floats(0.0, 0.5), Gamma=st.floats(0.0, 0.1), kappa=rates,
                     gamma=st.floats(0.0, 10.0), Omega=st.floats(0.0, 0.5), eta=st.floats(0.0, 1.0))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(eta=1.5)
    with pytest.raises(ValueError):
        ModelParams(kappa=-1.0)
    with pytest.raises(DegenerateNoise):
        ModelParams(eta=0.0).beta()
    assert ModelParams(gamma=4.0, eta=1.0).beta() == 0.5


def test_rhs_ground_state_is_stationary_without_pump(params):
    assert np.abs(lindblad_rhs(ground_state(), params, pump_on=False)).max() == 0


def test_rhs_external_photon_is_terminal(params, space):
    rho = space.projector(("G", 0, 1))
    assert np.abs(lindblad_rhs(rho, params, pump_on=False)).max() == 0


def test_rhs_spontaneous_decay(space, ops):
    p = ModelParams(g=0.0, Gamma=0.001, kappa=0.0, gamma=0.0, Omega=0.0)
    d = lindblad_rhs(space.projector(("X", 0, 0)), p, pump_on=False)
    assert expect(d, ops.proj_X) == pytest.approx(-0.001, abs=1e-15)


@given(param_st, st.integers(0, 2**32 - 1), st.booleans())
def test_rhs_is_traceless_and_hermitian(p, seed, pump_on):
    from monitored_sps.hilbert import build_space

    rho = random_state(np.random.default_rng(seed), build_space(), block_diagonal=False)
    d = lindblad_rhs(rho, p, pump_on)
    assert abs(np.trace(d)) < 1e-12
    np.testing.assert_allclose(d, d.conj().T, atol=1e-14)


def test_rabi_oscillation(space, ops):
    rho = space.projector(("X", 0, 0))
    dt, g = 0.01, CLOSED.g
    worst = 0.0
    for k in range(1, 5001):
        rho = step_deterministic(rho, CLOSED, pump_on=False, dt=dt)
        worst = max(worst, abs(expect(rho, ops.proj_X) - math.cos(g * k * dt) ** 2))
    assert worst < 1e-6


def test_closed_system_conserves_quanta(space):
    rng = np.random.default_rng(3)
    rho = random_state(rng, space)
    N = np.diag(space.quanta()).astype(float)
    n0 = expect(rho, N)
    for _ in range(2000):
        rho = step_deterministic(rho, CLOSED, pump_on=False, dt=0.01)
    assert abs(expect(rho, N) - n0) < 1e-8


@given(param_st, st.integers(0, 2**32 - 1), st.booleans())
def test_deterministic_step_invariants(p, seed, pump_on):
    from monitored_sps.hilbert import build_space

    rho = random_state(np.random.default_rng(seed), build_space())
    nxt = step_deterministic(rho, p, pump_on, 0.01)
    assert abs(np.trace(nxt).real - 1) < 1e-10
    np.testing.assert_allclose(nxt, nxt.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(nxt).min() >= -1e-7 + min(0.0, np.linalg.eigvalsh(rho).min())


@given(param_st.filter(lambda p: p.measured), st.integers(0, 2**32 - 1), st.booleans(),
       st.floats(-0.5, 0.5))
def test_stochastic_step_invariants(p, seed, pump_on, dW):
    from monitored_sps.hilbert import build_space

    rho = random_state(np.random.default_rng(seed), build_space())
    out = step_stochastic(rho, p, pump_on, 0.01, dW)
    nxt = out.rho_next
    assert abs(np.trace(nxt).real - 1) < 1e-10
    np.testing.assert_allclose(nxt, nxt.conj().T, atol=1e-10)
    assert np.linalg.eigvalsh(nxt).min() >= -1e-7
    assert -1e-7 <= out.expect_PX <= 1 + 1e-7


def test_deterministic_step_detects_trace_drift(params):
    with pytest.raises(StepUnstable):
        step_deterministic(2 * ground_state(), params, True, 0.01)
    with pytest.raises(ValueError):
        step_deterministic(ground_state(), params, True, 0.0)


def test_check_positive():
    bad = np.diag([1.1, -0.1] + [0.0] * 7)
    with pytest.raises(StepUnstable):
        check_positive(bad)
    assert check_positive(ground_state()) == 0.0


def test_unmeasured_step_reduces_to_lindblad(space):
    p = ModelParams(eta=0.0)
    rho = random_state(np.random.default_rng(0), space)
    out = step_stochastic(rho, p, True, 0.01, 0.3, record=False)
    np.testing.assert_array_equal(out.rho_next, step_deterministic(rho, p, True, 0.01))
    assert out.y is None
    with pytest.raises(DegenerateNoise):
        step_stochastic(rho, p, True, 0.01, 0.3)


@pytest.mark.parametrize("label", [("X", 0, 0), ("G", 1, 0)])
def test_projector_eigenstates_ignore_noise(space, label):
    p = ModelParams(gamma=3.0)
    rho = space.projector(label)
    np.testing.assert_allclose(measurement_map(rho, p, 0.01, 0.7), rho, atol=1e-15)
    a = step_stochastic(rho, p, True, 0.01, 0.5).rho_next
    b = step_stochastic(rho, p, True, 0.01, -0.5).rho_next
    np.testing.assert_allclose(a, b, atol=1e-15)


def test_split_and_euler_agree_to_first_order(space):
    p = ModelParams(gamma=1.0)
    rho = random_state(np.random.default_rng(1), space)
    errs = []
    for dt in (1e-3, 1e-4):
        dW = 0.5 * math.sqrt(dt)
        a = step_stochastic(rho, p, True, dt, dW).rho_next
        b = step_stochastic(rho, p, True, dt, dW, scheme="euler").rho_next
        errs.append(np.abs(a - b).max())
    # local difference is O(dW^2) = O(dt)
    assert errs[1] < errs[0] / 5
    with pytest.raises(ValueError):
        step_stochastic(rho, p, True, 0.01, 0.0, scheme="milstein")


def test_record_sample_examples():
    p = ModelParams(gamma=1.0, eta=1.0)
    assert sample_record(1.0, p, 0.01, 0.0) == pytest.approx(0.01)
    rng = np.random.default_rng(11)
    dt, n = 0.01, 100_000
    dW = rng.normal(0.0, math.sqrt(dt), n)
    y = sample_record(0.0, p, dt, dW)
    assert abs(y.mean()) < 4 * p.beta() * math.sqrt(dt / n)
    assert y.var() == pytest.approx(p.beta() ** 2 * dt, rel=0.05)
    with pytest.raises(DegenerateNoise):
        sample_record(0.0, ModelParams(eta=0.0), dt, 0.0)


def test_expectation_stays_in_range_along_trajectory():
    p = ModelParams(gamma=10.0)
    rng = np.random.default_rng(5)
    rho = ground_state()
    for _ in range(3000):
        out = step_stochastic(rho, p, True, 0.01, rng.normal(0, 0.1))
        assert -1e-7 <= out.expect_PX <= 1 + 1e-7
        rho = out.rho_next


def test_coordinate_round_trip(space):
    C = coords()
    rho = random_state(np.random.default_rng(2), space)
    assert C.size == 35
    np.testing.assert_allclose(C.to_matrix(C.to_coords(rho)), rho, atol=1e-15)


def test_rk4_propagator_matches_matrix_rk4(space, params):
    C = coords()
    rho = random_state(np.random.default_rng(4), space)
    P = rk4_propagator(generator(params, pump_on=True), 0.01)
    via_coords = C.to_matrix(P @ C.to_coords(rho))
    np.testing.assert_allclose(via_coords, step_deterministic(rho, params, True, 0.01), atol=1e-13)


def test_measure_coords_matches_matrix_map(space):
    p = ModelParams(gamma=2.0, eta=0.5)
    C = coords()
    rho = random_state(np.random.default_rng(6), space)
    V, e = measure_coords(C.to_coords(rho)[None, :].copy(), p, 0.01, np.array([0.2]))
    got = C.to_matrix(V[0])
    got /= np.trace(got).real
    np.testing.assert_allclose(got, measurement_map(rho, p, 0.01, 0.2), atol=1e-14)
    assert e[0] == pytest.approx(expect(rho, np.diag(C.space.dot_excited()).astype(float)))


def test_trace_distance_basic(space):
    a, b = space.projector(("G", 0, 0)), space.projector(("X", 0, 0))
    assert trace_distance(a, a) == 0
    assert trace_distance(a, b) == pytest.approx(1.0)
