"""The effective per-cycle channel acting on the nuclear spin.

Nuclear operators are expanded as ``c0 I + c1 s+ + c2 s- + c3 sz`` with
``s+ = |up><down|``. In that basis the cycle channel is diagonal:
``I`` and ``sz`` are fixed points, and the coherences pick up

    lambda1 = conj(lambda2) = exp(-i gamma_n B_z tau) cos(rabi dt_m)

per cycle. Note the precession phase survives on the measurement-condition
locus ``rabi dt_m = 2 pi n1``: there only ``|lambda1| = 1`` holds. Freezing
the state itself also needs ``gamma_n B_z tau`` to be a multiple of 2 pi,
which :func:`freezing_schedule` solves for.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import dynamics
from .linalg import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, kron
from .model import TWO_PI, PhysicalParams

QUADRATIC_WINDOW = 0.5
DEFAULT_LOCUS_POINTS = 256


@dataclass(frozen=True)
class NuclearBlochCoeffs:
    c0: float
    c1: complex
    c2: complex
    c3: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3], dtype=complex)


@dataclass(frozen=True)
class ChannelSpectrum:
    lambda0: complex
    lambda1: complex
    lambda2: complex
    lambda3: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.lambda0, self.lambda1, self.lambda2, self.lambda3], dtype=complex)


@dataclass(frozen=True)
class TransferMatrix:
    """4x4 matrix acting on coefficient vectors ``(c0, c1, c2, c3)``."""

    m: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diagonal(self.m).copy()

    def max_off_diagonal(self) -> float:
        off = self.m - np.diag(np.diagonal(self.m))
        return float(np.max(np.abs(off)))


def operator_coeffs(x) -> np.ndarray:
    """Coefficients of an arbitrary 2x2 operator in ``{I, s+, s-, sz}``."""
    x = np.asarray(x, dtype=complex)
    return np.array(
        [(x[0, 0] + x[1, 1]) / 2, x[0, 1], x[1, 0], (x[0, 0] - x[1, 1]) / 2],
        dtype=complex,
    )


def decompose(nuclear) -> NuclearBlochCoeffs:
    rho = dynamics.check_density_matrix(nuclear, 2, "nuclear state")
    c = operator_coeffs(rho)
    return NuclearBlochCoeffs(c[0].real, complex(c[1]), complex(c[2]), c[3].real)


def recompose(coeffs: NuclearBlochCoeffs) -> np.ndarray:
    return (
        coeffs.c0 * np.eye(2, dtype=complex)
        + coeffs.c1 * SIGMA_PLUS
        + coeffs.c2 * SIGMA_MINUS
        + coeffs.c3 * SIGMA_Z
    )


def apply_cycle_to_nuclear(nuclear, p: PhysicalParams) -> np.ndarray:
    """One cycle as seen by the nuclear spin, for any 2x2 operator.

    Non-states are fine here (the map is linear), which is why this skips
    the density-matrix checks of :func:`dynamics.initial_joint_state`.
    """
    u = dynamics.cycle_propagator(p)
    joint = kron(dynamics.ELECTRON_GROUND, np.asarray(nuclear, dtype=complex))
    return dynamics.nuclear_marginal(dynamics.conjugate(u, joint))


def analytic_spectrum(p: PhysicalParams) -> ChannelSpectrum:
    lam1 = cmath.exp(-1j * p.gamma_n * p.b_z * p.tau) * math.cos(p.rabi * p.dt_m)
    return ChannelSpectrum(1.0 + 0j, lam1, lam1.conjugate(), 1.0 + 0j)


def extract_transfer_matrix(p: PhysicalParams) -> TransferMatrix:
    """Read the channel off the full 6x6 cycle.

    Only physical states are simulated: ``I/2``, ``|up>``, ``|+>`` and
    ``|+i>``. The images of ``I, s+, s-, sz`` follow by linearity.
    """
    def phi(rho):
        return dynamics.nuclear_marginal(dynamics.run_cycle(dynamics.initial_joint_state(rho), p))

    mixed = np.eye(2, dtype=complex) / 2
    up = np.array([[1, 0], [0, 0]], dtype=complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    plus_i = np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex)
    out_mixed, out_up, out_plus, out_plus_i = (phi(r) for r in (mixed, up, plus, plus_i))

    img_identity = 2 * out_mixed
    img_sz = 2 * out_up - 2 * out_mixed
    img_sx = 2 * out_plus - 2 * out_mixed
    img_sy = 2 * out_plus_i - 2 * out_mixed
    img_plus = (img_sx + 1j * img_sy) / 2
    img_minus = (img_sx - 1j * img_sy) / 2

    cols = [operator_coeffs(x) for x in (img_identity, img_plus, img_minus, img_sz)]
    return TransferMatrix(np.column_stack(cols))


def numeric_spectrum(p: PhysicalParams) -> ChannelSpectrum:
    d = extract_transfer_matrix(p).diagonal
    return ChannelSpectrum(*(complex(x) for x in d))


def predict_after_n(coeffs: NuclearBlochCoeffs, spectrum: ChannelSpectrum, n: int) -> NuclearBlochCoeffs:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return NuclearBlochCoeffs(
        (coeffs.c0 * spectrum.lambda0**n).real,
        coeffs.c1 * spectrum.lambda1**n,
        coeffs.c2 * spectrum.lambda2**n,
        (coeffs.c3 * spectrum.lambda3**n).real,
    )


def coherence_decay_curve(p: PhysicalParams, n: int) -> np.ndarray:
    """``|lambda1|**k`` for ``k = 0..n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return abs(analytic_spectrum(p).lambda1) ** np.arange(n + 1)


def qzle_locus(
    omega_range: tuple[float, float],
    dtm_range: tuple[float, float],
    n1_max: int = 3,
    points: int = DEFAULT_LOCUS_POINTS,
) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """Sample the hyperbolas ``rabi * dt_m = 2 pi n1`` inside a window.

    Returns one ``(n1, rabi, dt_m)`` triple per ``n1 = 1..n1_max``; each
    curve is log-spaced in ``rabi`` (rad/s) and may be empty when the
    hyperbola misses the window.
    """
    w_lo, w_hi = omega_range
    t_lo, t_hi = dtm_range
    if w_lo < 0 or w_hi <= 0 or t_lo <= 0 or t_hi <= 0 or w_lo > w_hi or t_lo > t_hi:
        raise ValueError("omega_range and dtm_range must be ordered and positive")
    if n1_max < 1:
        raise ValueError(f"n1_max must be >= 1, got {n1_max}")
    curves = []
    for n1 in range(1, n1_max + 1):
        k = TWO_PI * n1
        lo = max(w_lo, k / t_hi)
        hi = min(w_hi, k / t_lo)
        if lo > hi:
            curves.append((n1, np.empty(0), np.empty(0)))
            continue
        omega = np.geomspace(lo, hi, points) if hi > lo else np.array([lo])
        curves.append((n1, omega, k / omega))
    return curves


def quadratic_approx(p: PhysicalParams, n1: int, with_phase: bool = False) -> complex:
    """Second-order expansion of ``lambda1`` around ``rabi dt_m = 2 pi n1``.

    By default the precession phase is dropped, matching ``|lambda1|``
    near the locus. ``n1 = 0`` gives the short-pulse limit.

    Raises:
        ValueError: outside ``|rabi dt_m - 2 pi n1| < 0.5``.
    """
    if n1 < 0:
        raise ValueError(f"n1 must be >= 0, got {n1}")
    eps = p.rabi * p.dt_m - TWO_PI * n1
    if abs(eps) >= QUADRATIC_WINDOW:
        raise ValueError(f"|rabi*dt_m - 2*pi*n1| = {abs(eps):.3g} is outside the expansion window {QUADRATIC_WINDOW}")
    value = complex(1.0 - 0.5 * eps * eps)
    if with_phase:
        value *= cmath.exp(-1j * p.gamma_n * p.b_z * p.tau)
    return value


def precession_phase(p: PhysicalParams, n_cycles: int = 1) -> float:
    """Nuclear Zeeman phase ``gamma_n B_z N tau`` accumulated over N cycles."""
    return p.gamma_n * p.b_z * p.tau * n_cycles


def is_precession_locked(p: PhysicalParams, n_cycles: int, atol: float = 1e-9) -> bool:
    """Whether ``gamma_n B_z N tau`` is a multiple of 2 pi."""
    phase = precession_phase(p, n_cycles) / TWO_PI
    return abs(phase - round(phase)) <= atol


def freezing_schedule(p: PhysicalParams, n1: int = 1, m: int | None = None) -> PhysicalParams:
    """Pick ``dt_m`` on the locus and ``dt_f`` so that the per-cycle
    precession is a whole turn; with both, ``lambda1 = 1`` exactly.

    ``m`` is the number of precession turns per cycle; the smallest one
    giving ``dt_f >= 0`` is used when omitted.
    """
    if p.rabi <= 0:
        raise ValueError("freezing schedule needs a non-zero Rabi frequency")
    if p.gamma_n * p.b_z == 0:
        raise ValueError("freezing schedule needs a non-zero nuclear Larmor frequency")
    dt_m = TWO_PI * n1 / p.rabi
    period = TWO_PI / abs(p.gamma_n * p.b_z)
    if m is None:
        m = max(1, math.ceil(dt_m / period - 1e-12))
    dt_f = m * period - dt_m
    if dt_f < 0:
        raise ValueError(f"m={m} precession turns is shorter than the pulse")
    return p.replace(dt_f=dt_f, dt_m=dt_m)
