"""Real 3D algebra on Bloch vectors: rotations, sign matrices, signed SVD.

Vectors and matrices are plain numpy arrays of shape (3,) and (3, 3).
Rotations are 3x3 arrays that pass :func:`is_rotation`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as _ScipyRotation

from .errors import NonUnitary, NotCommuting
from .tolerances import COMMUTE, EXACT

# sigma_1 = X, sigma_2 = Y, sigma_3 = Z
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
IDENTITY2 = np.eye(2, dtype=complex)

# diagonal proper rotations; they sum to the zero matrix
SIGN_MATRICES = (
    np.diag([1.0, 1.0, 1.0]),
    np.diag([1.0, -1.0, -1.0]),
    np.diag([-1.0, 1.0, -1.0]),
    np.diag([-1.0, -1.0, 1.0]),
)


def vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def mat3(x) -> np.ndarray:
    m = np.asarray(x, dtype=float)
    if m.size != 9:
        raise ValueError(f"expected 9 entries, got shape {m.shape}")
    m = m.reshape(3, 3)
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite matrix entries")
    return m


def is_rotation(m, tol: float = EXACT) -> bool:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    return bool(
        np.max(np.abs(m.T @ m - np.eye(3))) <= tol and abs(np.linalg.det(m) - 1.0) <= tol
    )


def as_rotation(m, tol: float = EXACT) -> np.ndarray:
    r = mat3(m)
    if not is_rotation(r, tol):
        raise ValueError("matrix is not a proper rotation")
    return r


def sign_matrix(index: int) -> np.ndarray:
    """Return the sign matrix with 1-based ``index`` in 1..4."""
    if index not in (1, 2, 3, 4):
        raise ValueError(f"sign matrix index must be 1..4, got {index}")
    return SIGN_MATRICES[index - 1].copy()


def rotation_from_unitary(u) -> np.ndarray:
    """SO(3) image of a 2x2 unitary: ``u (n.sigma) u^dag = (R n).sigma``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise NonUnitary(f"expected a 2x2 matrix, got shape {u.shape}")
    if np.max(np.abs(u.conj().T @ u - IDENTITY2)) > EXACT:
        raise NonUnitary("u^dag u differs from the identity")
    # R_ij = Tr(sigma_i u sigma_j u^dag) / 2
    conj = np.einsum("ab,jbc,dc->jad", u, PAULI, u.conj())
    r = 0.5 * np.einsum("iab,jba->ij", PAULI, conj)
    return np.real(r)


def unitary_from_rotation(r) -> np.ndarray:
    """SU(2) lift of a rotation, with the sign fixed so the trace is non-negative."""
    r = as_rotation(r, tol=1e-9)
    x, y, z, w = _ScipyRotation.from_matrix(r).as_quat()
    if w < 0:
        x, y, z, w = -x, -y, -z, -w
    return w * IDENTITY2 - 1j * (x * PAULI[0] + y * PAULI[1] + z * PAULI[2])


@dataclass(frozen=True)
class CanonicalDecomposition:
    """``m = o_left.T @ diag(d) @ o_right`` with proper rotations on both sides."""

    o_left: np.ndarray
    d: np.ndarray
    o_right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.o_left.T @ np.diag(self.d) @ self.o_right


def canonical_decompose(m) -> CanonicalDecomposition:
    """Signed singular value decomposition with proper rotation factors.

    Magnitudes come out ordered ``|d1| >= |d2| >= |d3|``. A negative
    determinant of the raw SVD factors is absorbed into the sign of ``d3``.
    Among the remaining sign-equivalent choices (flipping pairs of signs by a
    sign matrix on either side) the one whose rotations are closest to the
    identity is returned, so already-diagonal inputs keep trivial rotations.
    """
    m = mat3(m)
    u, d, vt = np.linalg.svd(m)
    d = d.copy()
    if np.linalg.det(u) < 0:
        u[:, 2] *= -1
        d[2] *= -1
    if np.linalg.det(vt) < 0:
        vt[2, :] *= -1
        d[2] *= -1
    o_left, o_right = u.T, vt

    best = None
    for b_left, b_right in itertools.product(SIGN_MATRICES, repeat=2):
        left = b_left @ o_left
        right = b_right @ o_right
        score = np.trace(left) + np.trace(right)
        # strict improvement only: ties keep the first candidate in a fixed order
        if best is None or score > best[0] + 1e-9:
            best = (score, left, np.diag(b_left) * np.diag(b_right) * d, right)
    _, o_left, d, o_right = best
    return CanonicalDecomposition(o_left=o_left, d=d, o_right=o_right)


def simultaneous_diagonalizer(a, b) -> np.ndarray:
    """Rotation ``o`` such that ``o a o^T`` and ``o b o^T`` are both diagonal.

    ``a`` and ``b`` must be symmetric and commute.
    """
    a, b = mat3(a), mat3(b)
    if np.max(np.abs(a @ b - b @ a)) > COMMUTE:
        raise NotCommuting("matrices do not commute")
    evals, q = np.linalg.eigh(a)
    scale = max(1.0, float(np.max(np.abs(evals))))
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and abs(evals[stop] - evals[start]) <= 1e-8 * scale:
            stop += 1
        if stop - start > 1:
            block = q[:, start:stop]
            _, sub = np.linalg.eigh(block.T @ b @ block)
            q[:, start:stop] = block @ sub
        start = stop
    o = q.T
    if np.linalg.det(o) < 0:
        o[2, :] *= -1
    return o
