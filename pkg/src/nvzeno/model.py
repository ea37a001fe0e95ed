"""Physical parameters and Hamiltonians for an NV electron spin (S=1)
coupled to a first-shell 13C nuclear spin (I=1/2).

Basis conventions used throughout the package:

* electron levels ordered ``m_s = +1, 0, -1`` so that ``S_z = diag(1, 0, -1)``;
* nuclear levels ordered ``up, down``;
* joint index ``2 * electron + nuclear`` (electron factor first in every kron).

All frequencies are angular (rad/s); the field is in gauss and times in
seconds. Conversion from lab units happens at the config boundary.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import kron

TWO_PI = 2.0 * math.pi

# secular approximation is only trusted below this field
SECULAR_FIELD_LIMIT_G = 200.0
# drive must stay well inside the hyperfine splitting to remain selective
SELECTIVITY_RATIO = 10.0
# |omega_drive - resonance| allowed by the rotating-frame closed form
RESONANCE_RTOL = 1e-12

ELECTRON = {+1: 0, 0: 1, -1: 2}
NUCLEAR = {"up": 0, "down": 1}


def joint_index(m_s: int, nuclear: str) -> int:
    """Index of ``|m_s, nuclear>`` in the 6-dim joint basis."""
    return 2 * ELECTRON[m_s] + NUCLEAR[nuclear]


I_0_UP = joint_index(0, "up")
I_0_DOWN = joint_index(0, "down")
I_M1_UP = joint_index(-1, "up")
I_M1_DOWN = joint_index(-1, "down")


@dataclass(frozen=True)
class SpinOperators:
    s_x: np.ndarray
    s_y: np.ndarray
    s_z: np.ndarray
    i_x: np.ndarray
    i_y: np.ndarray
    i_z: np.ndarray


def spin_operators() -> SpinOperators:
    r = 1.0 / math.sqrt(2.0)
    s_x = np.array([[0, r, 0], [r, 0, r], [0, r, 0]], dtype=complex)
    s_y = np.array([[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]], dtype=complex)
    s_z = np.diag([1.0, 0.0, -1.0]).astype(complex)
    i_x = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    i_y = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
    i_z = 0.5 * np.diag([1.0, -1.0]).astype(complex)
    return SpinOperators(s_x, s_y, s_z, i_x, i_y, i_z)


@dataclass(frozen=True)
class PhysicalParams:
    """Constants and control knobs of one experiment.

    Attributes:
        d_zfs: zero-field splitting D (rad/s).
        gamma_e: electron gyromagnetic ratio (rad/(s G)).
        gamma_n: 13C gyromagnetic ratio (rad/(s G)).
        a_zz: longitudinal hyperfine coupling (rad/s).
        a_xx, a_yy: transverse hyperfine couplings (rad/s); only the full
            Hamiltonian uses them.
        b_z: axial magnetic field (G).
        rabi: Rabi frequency of the microwave drive (rad/s).
        omega_drive: carrier frequency of the drive (rad/s).
        dt_f: free-evolution interval (s).
        dt_m: measurement-pulse interval (s).
    """

    d_zfs: float
    gamma_e: float
    gamma_n: float
    a_zz: float
    a_xx: float
    a_yy: float
    b_z: float
    rabi: float
    omega_drive: float
    dt_f: float
    dt_m: float

    def __post_init__(self):
        for name in ("dt_f", "dt_m", "rabi", "b_z"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite non-negative number, got {value!r}")

    @property
    def tau(self) -> float:
        """Duration of one free-evolution plus measurement cycle."""
        return self.dt_f + self.dt_m

    def replace(self, **changes) -> PhysicalParams:
        return dataclasses.replace(self, **changes)

    def retuned(self, **changes) -> PhysicalParams:
        """Like :meth:`replace`, then put the drive back on resonance."""
        p = dataclasses.replace(self, **changes)
        return dataclasses.replace(p, omega_drive=resonance_frequency(p))

    def validity_warnings(self) -> list[str]:
        out = []
        if self.b_z > SECULAR_FIELD_LIMIT_G:
            out.append(f"b_z = {self.b_z:g} G exceeds {SECULAR_FIELD_LIMIT_G:g} G; secular approximation is doubtful")
        if self.rabi > abs(self.a_zz) / SELECTIVITY_RATIO:
            out.append(
                f"rabi = {self.rabi / TWO_PI:.4g} Hz exceeds a_zz/{SELECTIVITY_RATIO:g}; drive is not selective"
            )
        return out

    def warn(self) -> None:
        for msg in self.validity_warnings():
            warnings.warn(msg, stacklevel=2)


def resonance_frequency(p: PhysicalParams) -> float:
    """Level spacing between ``|0,up>`` and ``|-1,up>``."""
    return p.d_zfs - p.gamma_e * p.b_z - p.a_zz / 2.0


def default_params() -> PhysicalParams:
    a_zz = TWO_PI * 130e6
    p = PhysicalParams(
        d_zfs=TWO_PI * 2.87e9,
        gamma_e=TWO_PI * 2.8024e6,
        gamma_n=TWO_PI * 1.0705e3,
        a_zz=a_zz,
        a_xx=a_zz,
        a_yy=a_zz,
        b_z=100.0,
        rabi=TWO_PI * 1e6,
        omega_drive=0.0,
        dt_f=2e-6,
        dt_m=2e-6,
    )
    return p.retuned()


def is_resonant(p: PhysicalParams) -> bool:
    res = resonance_frequency(p)
    return abs(p.omega_drive - res) <= RESONANCE_RTOL * max(abs(res), 1.0)


def _zeeman_and_zfs(p: PhysicalParams, ops: SpinOperators) -> np.ndarray:
    e2 = np.eye(2)
    e3 = np.eye(3)
    return (
        p.d_zfs * kron(ops.s_z @ ops.s_z, e2)
        + p.gamma_e * p.b_z * kron(ops.s_z, e2)
        + p.gamma_n * p.b_z * kron(e3, ops.i_z)
    )


def build_h_free(p: PhysicalParams) -> np.ndarray:
    """Secular Hamiltonian: only the longitudinal hyperfine term survives.

    The result is exactly diagonal, so it is assembled from its diagonal
    rather than from kron products.
    """
    diag = np.empty(6)
    for m_s, e in ELECTRON.items():
        for nuc, m_i in (("up", 0.5), ("down", -0.5)):
            diag[2 * e + NUCLEAR[nuc]] = (
                p.d_zfs * m_s * m_s + p.gamma_e * p.b_z * m_s + p.gamma_n * p.b_z * m_i + p.a_zz * m_s * m_i
            )
    return np.diag(diag).astype(complex)


def build_h_full(p: PhysicalParams) -> np.ndarray:
    """Static Hamiltonian including transverse hyperfine (flip-flop) terms."""
    ops = spin_operators()
    h = (
        _zeeman_and_zfs(p, ops)
        + p.a_xx * kron(ops.s_x, ops.i_x)
        + p.a_yy * kron(ops.s_y, ops.i_y)
        + p.a_zz * kron(ops.s_z, ops.i_z)
    )
    return 0.5 * (h + h.conj().T)


def build_h_drive_rotating(p: PhysicalParams) -> np.ndarray:
    """Resonant drive in the frame rotating with the free Hamiltonian.

    Raises:
        ValueError: if the drive is off resonance, where this closed form
            does not apply.
    """
    if not is_resonant(p):
        raise ValueError(
            "build_h_drive_rotating requires omega_drive == resonance_frequency(p); "
            f"detuning is {(p.omega_drive - resonance_frequency(p)) / TWO_PI:.6g} Hz"
        )
    h = np.zeros((6, 6), dtype=complex)
    h[I_0_UP, I_M1_UP] = p.rabi
    h[I_M1_UP, I_0_UP] = p.rabi
    return h


def build_h_drive_lab(p: PhysicalParams, t: float | np.ndarray, selective: bool = True) -> np.ndarray:
    """Lab-frame drive ``rabi * exp(i w t) |0><-1| + h.c.``.

    ``t`` is measured from the start of the pulse and may be an array, in
    which case a stack of matrices is returned. With ``selective=False`` the
    drive addresses both nuclear manifolds.
    """
    t = np.asarray(t, dtype=float)
    phase = p.rabi * np.exp(1j * p.omega_drive * t)
    h = np.zeros(t.shape + (6, 6), dtype=complex)
    pairs = [(I_0_UP, I_M1_UP)]
    if not selective:
        pairs.append((I_0_DOWN, I_M1_DOWN))
    for a, b in pairs:
        h[..., a, b] = phase
        h[..., b, a] = np.conj(phase)
    return h
