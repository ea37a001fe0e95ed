"""Acceptance criteria, one test per criterion, tolerances pinned here.

Each test prints a single ``[PASS]``/``[FAIL]`` line (also collected in the
terminal summary) before asserting.
"""

import math
import time

import numpy as np
import pytest

from nvzeno import channel, dynamics, linalg, validation
from nvzeno.model import TWO_PI, default_params

P = default_params()

SPECTRUM_TOL = 1e-9
OFF_DIAGONAL_TOL = 1e-10
SPECTRUM_SETS = 100
SPECTRUM_SECONDS = 10.0

FIXED_POINT_CYCLES = 20_000
FIXED_POINT_TOL = 1e-8
FIXED_POINT_SECONDS = 30.0

QZLE_CYCLES = 20_000
QZLE_TOL = 1e-6

QUADRATIC_EPS = (1e-1, 1e-2, 1e-3)
QUADRATIC_RATIO = 16.0
QUADRATIC_RATIO_RTOL = 0.2

FRAME_TOL = 1e-6
FRAME_MAX_STEPS = 100_000
FRAME_MIN_RATIO = 3.0
FRAME_SECONDS = 60.0

LEAKAGE_TOL = 1e-4

SECULAR_TOL = 1e-2

DECAY_CYCLES = 10_000
DECAY_TOL = 1e-8

LINALG_INSTANCES = 1000
LINALG_SECONDS = 5.0


def _line(ok, name, **measured):
    bits = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}" for k, v in measured.items())
    return f"[{'PASS' if ok else 'FAIL'}] {name}: {bits}"


def test_c1_spectrum_oracle_equivalence(acceptance_report):
    rng = np.random.default_rng(20240611)
    t0 = time.perf_counter()
    worst_diag = worst_off = 0.0
    for _ in range(SPECTRUM_SETS):
        p = validation.random_params(rng, P)
        tm = channel.extract_transfer_matrix(p)
        worst_diag = max(worst_diag, float(np.max(np.abs(tm.diagonal - channel.analytic_spectrum(p).as_vector()))))
        worst_off = max(worst_off, tm.max_off_diagonal())
    elapsed = time.perf_counter() - t0
    ok = worst_diag < SPECTRUM_TOL and worst_off < OFF_DIAGONAL_TOL and elapsed < SPECTRUM_SECONDS
    acceptance_report(_line(ok, "C1 spectrum oracle equivalence", max_diag=worst_diag, max_off_diag=worst_off,
                            seconds=elapsed))
    assert ok


def test_c2_zeno_like_fixed_point(acceptance_report):
    t0 = time.perf_counter()
    worst = 0.0
    for alpha in (1.0, 0.0, 0.5, 0.271828):
        rho0 = dynamics.nuclear_state(alpha, 0.0)
        final = dynamics.run_n_cycles(rho0, P, FIXED_POINT_CYCLES)[-1]
        worst = max(worst, linalg.trace_distance(final, rho0))
    elapsed = time.perf_counter() - t0
    ok = worst < FIXED_POINT_TOL and elapsed < FIXED_POINT_SECONDS
    acceptance_report(_line(ok, "C2 Zeno-like fixed point", trace_distance=worst, cycles=FIXED_POINT_CYCLES,
                            seconds=elapsed))
    assert ok


def test_c3_qzle_preservation(acceptance_report):
    rho0 = dynamics.nuclear_state(0.5, 0.5)
    worst = 0.0
    for n1 in (1, 2, 3):
        p = P.retuned(rabi=TWO_PI * n1 / P.dt_m)
        final = dynamics.run_n_cycles(rho0, p, QZLE_CYCLES)[-1]
        worst = max(worst, abs(abs(final[0, 1]) - 0.5))
    ok = worst < QZLE_TOL
    acceptance_report(_line(ok, "C3 QZLE preservation", max_coherence_deviation=worst, cycles=QZLE_CYCLES))
    assert ok


def test_c4_qze_quadratic_law(acceptance_report):
    def err(n1, eps):
        q = P.replace(dt_m=(TWO_PI * n1 + eps) / P.rabi)
        return abs(abs(channel.analytic_spectrum(q).lambda1) - channel.quadratic_approx(q, n1).real)

    bound_ok = True
    ratios = []
    for n1 in (1, 2, 3):
        for eps in QUADRATIC_EPS:
            e = err(n1, eps)
            bound_ok &= e < eps**4 / 20
            # successive errors at eps and eps/2 (see README for the reading)
            ratios.append(e / err(n1, eps / 2))
    ratio_ok = all(abs(r - QUADRATIC_RATIO) <= QUADRATIC_RATIO_RTOL * QUADRATIC_RATIO for r in ratios)
    ok = bound_ok and ratio_ok
    acceptance_report(_line(ok, "C4 QZE quadratic law", bound_ok=bound_ok, ratio_min=min(ratios),
                            ratio_max=max(ratios)))
    assert ok


def test_c5_frame_equivalence(acceptance_report):
    t0 = time.perf_counter()
    res = validation.check_frame_equivalence(P, steps=FRAME_MAX_STEPS, order=6)
    elapsed = time.perf_counter() - t0
    m = res.measured
    ok = m["trace_distance"] < FRAME_TOL and m["halving_ratio"] >= FRAME_MIN_RATIO and elapsed < FRAME_SECONDS
    acceptance_report(_line(ok, "C5 frame equivalence", trace_distance=m["trace_distance"],
                            halving_ratio=m["halving_ratio"], steps=FRAME_MAX_STEPS, order=6, seconds=elapsed))
    assert ok


@pytest.mark.parametrize("dt_m", [2e-6, 1e-6], ids=["dtm_2us", "dtm_1us_2pi"])
def test_c6_selectivity_bound(acceptance_report, dt_m):
    assert P.rabi == TWO_PI * 1e6 and P.a_zz == TWO_PI * 130e6
    res = validation.check_selectivity(P, dt_m=dt_m)
    leak = res.measured["leakage"]
    ok = leak < LEAKAGE_TOL
    acceptance_report(_line(ok, f"C6 selectivity bound (dt_m={dt_m * 1e6:g} us)", leakage=leak,
                            two_level_max=res.measured["two_level_max_transfer"]))
    assert ok


def test_c7_secular_approximation(acceptance_report):
    p = P.retuned(b_z=200.0, a_xx=P.a_zz, a_yy=P.a_zz)
    devs = [dynamics.secular_population_deviation(p.retuned(d_zfs=p.d_zfs * s)) for s in (1, 10, 100)]
    ok = devs[0] < SECULAR_TOL and devs[0] > devs[1] > devs[2]
    acceptance_report(_line(ok, "C7 secular approximation", dev_x1=devs[0], dev_x10=devs[1], dev_x100=devs[2]))
    assert ok


def test_c8_coherence_decay_curve(acceptance_report):
    worst = 0.0
    lams = []
    rho0 = dynamics.nuclear_state(0.5, 0.3 + 0.2j)
    for dt_m in (2e-6 + 0.02 / P.rabi, 0.6e-6):
        p = P.retuned(dt_m=dt_m)
        lam = abs(channel.analytic_spectrum(p).lambda1)
        assert lam < 1
        lams.append(lam)
        traj = dynamics.run_n_cycles(rho0, p, DECAY_CYCLES)
        mags = np.array([abs(r[0, 1]) for r in traj])
        predicted = abs(rho0[0, 1]) * lam ** np.arange(DECAY_CYCLES + 1)
        worst = max(worst, float(np.max(np.abs(mags - predicted))))
    ok = worst < DECAY_TOL
    acceptance_report(_line(ok, "C8 coherence decay curve", max_deviation=worst, abs_lambda1=lams,
                            cycles=DECAY_CYCLES))
    assert ok


def test_c9_linalg_properties(acceptance_report):
    t0 = time.perf_counter()
    errs = validation.linalg_property_errors(seed=99, n_instances=LINALG_INSTANCES)
    elapsed = time.perf_counter() - t0
    tols = dict(unitarity=1e-12, inverse=1e-11, group=1e-11, partial_trace_linearity=1e-12,
                kron_mixed_product=1e-12, eig_trace=1e-11, eig_reconstruct=1e-11)
    ok = all(errs[k] < tols[k] for k in tols) and elapsed < LINALG_SECONDS
    worst_ratio = max(errs[k] / tols[k] for k in tols)
    acceptance_report(_line(ok, "C9 linalg property suite", worst_error_over_tol=worst_ratio,
                            instances=LINALG_INSTANCES, seconds=elapsed))
    assert ok


def test_c5_midpoint_rule_alone(acceptance_report):
    """The midpoint rule at the step budget, reported for reference only."""
    rho0 = dynamics.initial_joint_state(dynamics.nuclear_state(0.5, 0.5))
    closed = dynamics.evolve_measurement(rho0, P, P.dt_m)
    err = linalg.trace_distance(dynamics.lab_frame_integrator(rho0, P, P.dt_m, FRAME_MAX_STEPS, order=2), closed)
    acceptance_report(f"[INFO] C5 midpoint rule at {FRAME_MAX_STEPS} steps: trace_distance={err:.3e}")
    assert math.isfinite(err)
