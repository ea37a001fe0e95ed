import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvzeno import dynamics, linalg
from nvzeno.model import I_0_DOWN, I_0_UP, I_M1_DOWN, I_M1_UP, TWO_PI, default_params

P = default_params()

UP = np.diag([1.0, 0.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def ket_density(index):
    rho = np.zeros((6, 6), dtype=complex)
    rho[index, index] = 1.0
    return rho


def assert_density(rho, dim):
    assert rho.shape == (dim, dim)
    assert dynamics.density_matrix_errors(rho) == []


# -- states -------------------------------------------------------------------

def test_schedule_invariants():
    s = dynamics.CycleSchedule(2e-6, 2e-6, 3)
    assert s.tau == 4e-6
    with pytest.raises(ValueError):
        dynamics.CycleSchedule(2e-6, 2e-6, 0)
    with pytest.raises(ValueError):
        dynamics.CycleSchedule(0.0, 0.0, 1)


def test_density_checks():
    with pytest.raises(ValueError, match="trace"):
        dynamics.check_density_matrix(np.eye(2))
    with pytest.raises(ValueError, match="negative"):
        dynamics.check_density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError, match="Hermitian"):
        dynamics.check_density_matrix(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        dynamics.nuclear_state(0.5, 0.6)


def test_initial_joint_state():
    np.testing.assert_array_equal(dynamics.initial_joint_state(UP), ket_density(I_0_UP))
    joint = dynamics.initial_joint_state(PLUS)
    assert np.trace(joint) == pytest.approx(1.0)
    assert joint[I_0_UP, I_0_DOWN] == 0.5
    with pytest.raises(ValueError):
        dynamics.initial_joint_state(np.eye(2))


# -- free evolution -----------------------------------------------------------

def test_free_evolution():
    rho = dynamics.initial_joint_state(PLUS)
    np.testing.assert_allclose(dynamics.evolve_free(rho, P, 0.0), rho, atol=1e-15)
    diag = np.diag(np.arange(1, 7) / 21).astype(complex)
    np.testing.assert_allclose(dynamics.evolve_free(diag, P, 1.7e-6), diag, atol=1e-15)
    dt = 1.3e-6
    out = dynamics.evolve_free(rho, P, dt)
    assert out[I_0_UP, I_0_DOWN] == pytest.approx(0.5 * cmath.exp(-1j * P.gamma_n * P.b_z * dt), abs=1e-12)


def test_free_propagator_is_diagonal_phases():
    u = dynamics.free_propagator(P, P.dt_f)
    e = np.real(np.diag(dynamics.build_h_free(P)))
    np.testing.assert_allclose(u, np.diag(np.exp(-1j * e * P.dt_f)), atol=1e-12)


def test_frame_round_trip():
    rho = dynamics.initial_joint_state(PLUS)
    back = dynamics.to_static_frame(dynamics.to_rotating_frame(rho, P, 0.7e-6), P, 0.7e-6)
    np.testing.assert_allclose(back, rho, atol=1e-14)


# -- measurement pulse --------------------------------------------------------

def test_measurement_without_drive_is_free():
    p = P.retuned(rabi=0.0)
    rho = dynamics.initial_joint_state(PLUS)
    np.testing.assert_allclose(
        dynamics.evolve_measurement(rho, p, p.dt_m), dynamics.evolve_free(rho, p, p.dt_m), atol=1e-14
    )


def test_full_transfer_at_quarter_period():
    # coupling rabi on the matrix element: populations go as sin^2(rabi t)
    p = P.retuned(dt_m=(math.pi / 2) / P.rabi)
    out = dynamics.evolve_measurement(ket_density(I_0_UP), p, p.dt_m)
    assert out[I_M1_UP, I_M1_UP].real == pytest.approx(1.0, abs=1e-12)


def test_pulse_area_pi_returns_with_sign_flip():
    p = P.retuned(dt_m=math.pi / P.rabi)
    out = dynamics.evolve_measurement(dynamics.initial_joint_state(PLUS), p, p.dt_m)
    assert out[I_0_UP, I_0_UP].real == pytest.approx(0.5, abs=1e-12)
    assert out[I_M1_UP, I_M1_UP].real == pytest.approx(0.0, abs=1e-12)
    # the up amplitude picked up cos(pi) = -1 relative to the down amplitude
    phase = cmath.exp(-1j * P.gamma_n * P.b_z * p.dt_m)
    assert out[I_0_UP, I_0_DOWN] == pytest.approx(-0.5 * phase, abs=1e-12)


def test_down_manifold_is_not_driven():
    out = dynamics.evolve_measurement(ket_density(I_0_DOWN), P, 0.37e-6)
    np.testing.assert_allclose(out, ket_density(I_0_DOWN), atol=1e-15)


# -- reset and cycles ---------------------------------------------------------

def test_reset():
    rho = dynamics.initial_joint_state(PLUS)
    np.testing.assert_allclose(dynamics.electron_reset(rho), rho, atol=1e-16)
    np.testing.assert_array_equal(dynamics.electron_reset(ket_density(I_M1_UP)), ket_density(I_0_UP))


def test_reset_of_entangled_state():
    psi = np.zeros(6, dtype=complex)
    psi[I_0_UP] = psi[I_M1_DOWN] = 1 / math.sqrt(2)
    rho = np.outer(psi, psi.conj())
    out = dynamics.electron_reset(rho)
    np.testing.assert_allclose(dynamics.nuclear_marginal(out), np.eye(2) / 2, atol=1e-16)
    np.testing.assert_allclose(out, np.kron(dynamics.ELECTRON_GROUND, np.eye(2) / 2), atol=1e-16)


def test_run_cycle_populations_and_coherence():
    alpha, beta = 0.3, 0.2 - 0.35j
    rho0 = dynamics.initial_joint_state(dynamics.nuclear_state(alpha, beta))
    nuc = dynamics.nuclear_marginal(dynamics.run_cycle(rho0, P))
    assert nuc[0, 0].real == pytest.approx(alpha, abs=1e-12)
    assert nuc[1, 1].real == pytest.approx(1 - alpha, abs=1e-12)
    lam1 = cmath.exp(-1j * P.gamma_n * P.b_z * P.tau) * math.cos(P.rabi * P.dt_m)
    assert nuc[0, 1] == pytest.approx(beta * lam1, abs=1e-12)


def test_default_lambda1_phase():
    lam1 = cmath.exp(-1j * P.gamma_n * P.b_z * P.tau) * math.cos(P.rabi * P.dt_m)
    # gamma_n B tau / 2pi = 1.0705e3 * 100 * 4e-6 = 0.4282 turns
    assert cmath.phase(lam1) == pytest.approx(-TWO_PI * 0.4282, abs=1e-9)


def test_quarter_pulse_kills_coherence():
    p = P.retuned(dt_m=(math.pi / 2) / P.rabi)
    nuc = dynamics.run_n_cycles(PLUS, p, 1)[1]
    assert abs(nuc[0, 1]) < 1e-12


def test_run_n_cycles_matches_run_cycle():
    p = P.retuned(dt_m=1.3e-6)
    traj = dynamics.run_n_cycles(PLUS, p, 3)
    assert len(traj) == 4
    rho = dynamics.initial_joint_state(PLUS)
    for k in range(1, 4):
        rho = dynamics.run_cycle(rho, p)
        np.testing.assert_allclose(traj[k], dynamics.nuclear_marginal(rho), atol=1e-13)
    with pytest.raises(ValueError):
        dynamics.run_n_cycles(PLUS, p, 0)


def test_run_n_cycles_coherence_magnitude():
    p = P.retuned(dt_m=0.9e-6)
    traj = dynamics.run_n_cycles(PLUS, p, 50)
    c = abs(math.cos(p.rabi * p.dt_m))
    np.testing.assert_allclose([abs(r[0, 1]) for r in traj], 0.5 * c ** np.arange(51), atol=1e-13)


def test_run_n_cycles_on_locus():
    p = P.retuned(dt_m=TWO_PI / P.rabi)
    mags = np.array([abs(r[0, 1]) for r in dynamics.run_n_cycles(PLUS, p, 500)])
    assert np.max(np.abs(mags - 0.5)) < 1e-12


states = st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, TWO_PI)).map(
    lambda t: (t[0], t[1] * math.sqrt(t[0] * (1 - t[0])) * cmath.exp(1j * t[2]))
)
params = st.tuples(st.floats(0, 200), st.floats(0, TWO_PI * 10e6), st.floats(0, 5e-6), st.floats(0, 5e-6)).filter(
    lambda t: t[2] + t[3] > 0
)


@settings(max_examples=40, deadline=None)
@given(states, params)
def test_cycle_keeps_valid_state_and_purity(state, prm):
    alpha, beta = state
    b_z, rabi, dt_f, dt_m = prm
    p = P.retuned(b_z=b_z, rabi=rabi, dt_f=dt_f, dt_m=dt_m)
    rho_n = dynamics.nuclear_state(alpha, beta)
    out = dynamics.run_cycle(dynamics.initial_joint_state(rho_n), p)
    assert_density(out, 6)
    nuc = dynamics.nuclear_marginal(out)
    assert np.trace(nuc @ nuc).real <= np.trace(rho_n @ rho_n).real + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), params)
def test_diagonal_states_are_fixed(alpha, prm):
    b_z, rabi, dt_f, dt_m = prm
    p = P.retuned(b_z=b_z, rabi=rabi, dt_f=dt_f, dt_m=dt_m)
    rho_n = dynamics.nuclear_state(alpha)
    nuc = dynamics.nuclear_marginal(dynamics.run_cycle(dynamics.initial_joint_state(rho_n), p))
    assert np.max(np.abs(nuc - rho_n)) < 1e-12


def test_long_chain_stays_valid():
    traj = dynamics.run_n_cycles(dynamics.nuclear_state(0.4, 0.3j), P.retuned(dt_m=0.77e-6), 20_000)
    assert_density(traj[-1], 2)


# -- lab-frame oracle ---------------------------------------------------------

def test_lab_frame_without_drive_is_free():
    p = P.retuned(rabi=0.0)
    rho = dynamics.initial_joint_state(PLUS)
    for steps in (1, 7):
        out = dynamics.lab_frame_integrator(rho, p, p.dt_m, steps)
        np.testing.assert_allclose(out, dynamics.evolve_free(rho, p, p.dt_m), atol=1e-12)


def test_lab_frame_rejects_bad_input():
    rho = dynamics.initial_joint_state(PLUS)
    with pytest.raises(ValueError):
        dynamics.lab_frame_integrator(rho, P, P.dt_m, 0)
    with pytest.raises(ValueError):
        dynamics.lab_frame_integrator(rho, P, P.dt_m, 10, order=3)


def test_lab_frame_propagator_unitary():
    u = dynamics.lab_frame_propagator(P, 0.2e-6, 20_000, selective=False)
    assert linalg.unitarity_error(u) < 1e-10


def _frame_error(p, steps, order):
    rho = dynamics.initial_joint_state(PLUS)
    closed = dynamics.evolve_measurement(rho, p, p.dt_m)
    return linalg.trace_distance(dynamics.lab_frame_integrator(rho, p, p.dt_m, steps, order=order), closed)


def test_midpoint_error_decreases_quadratically():
    # short pulse so the midpoint rule reaches its asymptotic regime cheaply
    p = P.retuned(dt_m=0.05e-6)
    errs = [_frame_error(p, s, 2) for s in (20_000, 40_000, 80_000)]
    for a, b in zip(errs, errs[1:]):
        assert a / b >= 4 * 0.9


def test_higher_orders_converge_faster():
    p = P.retuned(dt_m=0.1e-6)
    ratios = {}
    for order in (4, 6):
        e1, e2 = _frame_error(p, 3_000, order), _frame_error(p, 6_000, order)
        ratios[order] = e1 / e2
    assert ratios[4] > 12
    assert ratios[6] > 40


def test_lab_frame_matches_closed_form():
    p = P.retuned(dt_m=0.5e-6)
    assert _frame_error(p, 25_000, 6) < 1e-6


def test_selectivity_short_pulse():
    rho = ket_density(I_0_DOWN)
    out = dynamics.lab_frame_integrator(rho, P, 0.5e-6, 25_000, selective=False, order=6)
    assert out[I_M1_DOWN, I_M1_DOWN].real < 1e-4
    # selective drive never touches the down manifold
    out = dynamics.lab_frame_integrator(rho, P, 0.5e-6, 1000, selective=True)
    assert out[I_M1_DOWN, I_M1_DOWN].real < 1e-20


# -- secular approximation ----------------------------------------------------

def test_secular_deviation_vanishes_without_transverse_coupling():
    p = P.retuned(a_xx=0.0, a_yy=0.0, b_z=200.0)
    assert dynamics.secular_population_deviation(p, samples=101) < 1e-12


def test_secular_deviation_shrinks_with_d():
    p = P.retuned(b_z=200.0)
    devs = [dynamics.secular_population_deviation(p.retuned(d_zfs=p.d_zfs * s), samples=1001) for s in (1, 10, 100)]
    assert devs[0] < 1e-2
    assert devs[0] > devs[1] > devs[2]
