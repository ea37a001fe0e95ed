"""Small dense complex matrix algebra.

Matrices are plain ``numpy`` complex arrays. Everything here is meant for
dimensions up to about 8 (the joint electron-nuclear space is 6), so the
eigensolver is a cyclic Jacobi sweep written directly against numpy rather
than a LAPACK call. Most functions also accept stacks of matrices with shape
``(..., n, n)``, which the lab-frame integrator relies on.
"""

from __future__ import annotations

import numpy as np
from typing import NamedTuple

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-12
RECONSTRUCT_TOL = 1e-11

# relative off-diagonal Frobenius norm at which the Jacobi sweep stops
JACOBI_TOL = 1e-14
JACOBI_ACCEPT = 1e-13
JACOBI_MAX_SWEEPS = 50

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |up><down|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |down><up|


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` into a 2-d complex128 array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a, b) -> np.ndarray:
    """Kronecker product; by convention the electron factor goes first."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def partial_trace(rho, dim_a: int, dim_b: int, keep: str = "B") -> np.ndarray:
    """Reduce a bipartite operator on ``A (x) B`` to one factor.

    ``keep="B"`` traces out the first factor (the electron, in this package),
    ``keep="A"`` traces out the second.
    """
    rho = np.asarray(rho, dtype=complex)
    n = dim_a * dim_b
    if rho.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} operator for dims ({dim_a}, {dim_b}), got {rho.shape}")
    t = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    keep = keep.upper()
    if keep == "B":
        return np.einsum("ijik->jk", t)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def hermiticity_error(h) -> float:
    """Largest entry of ``|h - h^dagger|``."""
    h = np.asarray(h, dtype=complex)
    return float(np.max(np.abs(h - dagger(h)), initial=0.0))


def is_hermitian(h, tol: float = HERMITICITY_TOL) -> bool:
    # tolerance is relative to the largest entry: Hamiltonians here reach 1e10 rad/s
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    return hermiticity_error(h) <= tol * scale


def unitarity_error(u) -> float:
    """Frobenius norm of ``U^dagger U - I``."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[-1]
    return float(np.max(np.linalg.norm(dagger(u) @ u - np.eye(n), axis=(-2, -1))))


def _off_norm(a: np.ndarray) -> np.ndarray:
    # a has the batch axis last: (n, n, batch)
    n = a.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[mask]) ** 2, axis=0))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One complex Jacobi rotation annihilating ``a[p, q]`` in place.

    Arrays carry the batch axis last so row and column slices stay contiguous.
    """
    apq = a[p, q]
    mag = np.abs(apq)
    active = mag > 0.0
    if not active.any():
        return
    safe = np.where(active, mag, 1.0)
    phase = np.where(active, apq / safe, 1.0)
    theta = (a[q, q].real - a[p, p].real) / (2.0 * safe)
    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(active, t, 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    sc = s * np.conj(phase)
    cc = c * np.conj(phase)

    # J = [[c, s], [-s*conj(phase), c*conj(phase)]] on the (p, q) plane
    col_p = a[:, p].copy()
    col_q = a[:, q]
    a[:, p] = c * col_p - sc * col_q
    a[:, q] = s * col_p + cc * col_q
    row_p = a[p].copy()
    row_q = a[q]
    a[p] = c * row_p - np.conj(sc) * row_q
    a[q] = s * row_p + np.conj(cc) * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    vp = v[:, p].copy()
    vq = v[:, q]
    v[:, p] = c * vp - sc * vq
    v[:, q] = s * vp + cc * vq


def hermitian_eig(h, check: bool = True) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix (or a stack of them).

    Cyclic Jacobi: sweep over all (p, q) pairs until the off-diagonal
    Frobenius norm falls below ``JACOBI_TOL`` times the input norm.
    Eigenvalues come back ascending, with the eigenvector columns permuted
    to match.

    Raises:
        ValueError: if ``h`` is not square or not Hermitian within
            ``HERMITICITY_TOL`` (relative to its largest entry).
        RuntimeError: if the sweep fails to converge.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {h.shape}")
    if check:
        scale = np.maximum(1.0, np.max(np.abs(h), axis=(-2, -1)))
        err = np.max(np.abs(h - dagger(h)), axis=(-2, -1))
        if np.any(err > HERMITICITY_TOL * scale):
            raise ValueError(f"matrix is not Hermitian (max |h - h^dagger| = {float(np.max(err)):.3e})")
    batch_shape = h.shape[:-2]
    n = h.shape[-1]
    flat = 0.5 * (h + dagger(h)).reshape(-1, n, n)
    a = np.ascontiguousarray(np.moveaxis(flat, 0, -1))
    v = np.zeros_like(a)
    v[np.arange(n), np.arange(n)] = 1.0
    norm = np.sqrt(np.sum(np.abs(a) ** 2, axis=(0, 1)))
    scale = np.where(norm > 0, norm, 1.0)

    for _ in range(JACOBI_MAX_SWEEPS):
        if np.all(_off_norm(a) <= JACOBI_TOL * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    if np.any(_off_norm(a) > JACOBI_ACCEPT * scale):
        raise RuntimeError("Jacobi eigensolver did not converge")

    w = np.real(np.diagonal(a, axis1=0, axis2=1))  # (batch, n)
    v = np.moveaxis(v, -1, 0)
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return HermitianEig(w.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n)))


def expm_unitary(h, t) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` in rad/s and ``t`` in seconds.

    For a stack of ``h``, ``t`` may be one time per matrix.
    """
    w, v = hermitian_eig(h)
    t = np.asarray(t, dtype=float)[..., None]
    return (v * np.exp(-1j * w * t)[..., None, :]) @ dagger(v)


def expm_unitary_batch(h: np.ndarray, check: bool = False) -> np.ndarray:
    """``exp(-i h_k)`` for a stack of dimensionless Hermitian generators."""
    w, v = hermitian_eig(h, check=check)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def ordered_product(us: np.ndarray) -> np.ndarray:
    """Time-ordered product ``U[k-1] ... U[1] U[0]`` of a stack of matrices.

    Reduces pairwise so the work happens in batched matmuls.
    """
    us = np.asarray(us, dtype=complex)
    if us.ndim != 3:
        raise ValueError("expected a (k, n, n) stack")
    n = us.shape[-1]
    while us.shape[0] > 1:
        if us.shape[0] % 2:
            us = np.concatenate([us, np.eye(n, dtype=complex)[None]], axis=0)
        us = us[1::2] @ us[0::2]
    return us[0]


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w, _ = hermitian_eig(a - b, check=False)
    return 0.5 * float(np.sum(np.abs(w)))
