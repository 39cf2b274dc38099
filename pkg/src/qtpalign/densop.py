"""Dense complex-operator oracle.

Everything the Bloch/Fano fast paths compute can be recomputed here from
explicit density matrices. Tensor factors are ordered left to right; for
three-qubit objects the order is (input qubit, Alice qubit, Bob qubit).
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .bloch import IDENTITY2, PAULI
from .errors import DimensionMismatch, NotHermitian, NotUnitTrace
from .tolerances import ORACLE, POSITIVITY

# PAULI_PAIRS[i, j] = sigma_i (x) sigma_j
PAULI_PAIRS = np.einsum("iab,jcd->ijacbd", PAULI, PAULI).reshape(3, 3, 4, 4)


def kron(*factors) -> np.ndarray:
    if not factors:
        raise DimensionMismatch("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def _n_qubits(rho: np.ndarray) -> int:
    n = rho.shape[0]
    if rho.ndim != 2 or rho.shape[1] != n or n not in (2, 4, 8):
        raise DimensionMismatch(f"expected a 2x2, 4x4 or 8x8 matrix, got {rho.shape}")
    return n.bit_length() - 1


def partial_trace(rho, keep) -> np.ndarray:
    """Trace out every qubit not listed in ``keep`` (0 is the leftmost factor)."""
    rho = np.asarray(rho, dtype=complex)
    n = _n_qubits(rho)
    keep = sorted({keep} if isinstance(keep, int) else set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatch(f"subsystem index out of range for {n} qubits: {keep}")
    tensor = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnop"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            col[q] = row[q]
    out = "".join(row[q] for q in keep) + "".join(col[q] for q in keep)
    dim = 2 ** len(keep)
    return np.einsum("".join(row) + "".join(col) + "->" + out, tensor).reshape(dim, dim)


def hermitian_eigenvalues(rho) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending."""
    rho = np.asarray(rho, dtype=complex)
    _n_qubits(rho)
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))


def is_positive(rho, tol: float = POSITIVITY) -> bool:
    return bool(hermitian_eigenvalues(rho)[0] >= -tol)


def bloch_to_density(t) -> np.ndarray:
    t = np.asarray(t, dtype=float).reshape(3)
    return 0.5 * (IDENTITY2 + np.einsum("i,iab->ab", t, PAULI))


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.real(np.einsum("iab,ba->i", PAULI, rho))


def fano_to_density(f) -> np.ndarray:
    """4x4 operator of a two-qubit Fano form (positivity is not required)."""
    r_a = np.asarray(f.r_a, dtype=float)
    r_b = np.asarray(f.r_b, dtype=float)
    corr = np.asarray(f.corr, dtype=float)
    rho = np.eye(4, dtype=complex)
    rho += kron(np.einsum("i,iab->ab", r_a, PAULI), IDENTITY2)
    rho += kron(IDENTITY2, np.einsum("i,iab->ab", r_b, PAULI))
    rho += np.einsum("ij,ijab->ab", corr, PAULI_PAIRS)
    return rho / 4


def fano_components(rho) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Marginal Bloch vectors and correlation matrix of a 4x4 operator."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {rho.shape}")
    r_a = density_to_bloch(partial_trace(rho, 0))
    r_b = density_to_bloch(partial_trace(rho, 1))
    corr = np.real(np.einsum("ijab,ba->ij", PAULI_PAIRS, rho))
    return r_a, r_b, corr


def density_to_fano(rho):
    """Inverse of :func:`fano_to_density` for a Hermitian unit-trace operator."""
    from .states import TwoQubitFano

    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > ORACLE:
        raise NotHermitian("operator is not Hermitian")
    if abs(np.trace(rho) - 1) > ORACLE:
        raise NotUnitTrace(f"trace is {np.trace(rho).real:.3g}, expected 1")
    r_a, r_b, corr = fano_components(rho)
    return TwoQubitFano(r_a=r_a, r_b=r_b, corr=corr)


def choi_of_affine(channel) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) E(|i><j|) of the Bloch map t -> lam t + v.

    ``channel`` needs ``lam`` (3x3) and ``v`` (3,) attributes. The map is CPTP
    iff the result is positive semidefinite (trace preservation is built in).
    """
    lam = np.asarray(channel.lam, dtype=float)
    v = np.asarray(channel.v, dtype=float)
    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e_ij = np.zeros((2, 2), dtype=complex)
            e_ij[i, j] = 1
            choi += np.kron(e_ij, apply_affine_operator(lam, v, e_ij))
    return choi


def apply_affine_operator(lam, v, x) -> np.ndarray:
    """Linear extension of the qubit map t -> lam t + v to any 2x2 operator."""
    lam = np.asarray(lam, dtype=float)
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=complex)
    # x = (tr(x) I + sum_i c_i sigma_i) / 2 with c_i = tr(sigma_i x)
    trace = np.trace(x)
    c = np.einsum("iab,ba->i", PAULI, x)
    out_c = lam @ c + trace * v
    return 0.5 * (trace * IDENTITY2 + np.einsum("i,iab->ab", out_c, PAULI))


def apply_choi(choi, rho) -> np.ndarray:
    """Apply a single-qubit channel given by its Choi matrix."""
    j = np.asarray(choi, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("ij,ikjl->kl", np.asarray(rho, dtype=complex), j)


def apply_local_choi(choi_a, choi_b, rho) -> np.ndarray:
    """Apply ``E_a (x) E_b`` to a two-qubit operator through the Choi matrices."""
    ja = np.asarray(choi_a, dtype=complex).reshape(2, 2, 2, 2)
    jb = np.asarray(choi_b, dtype=complex).reshape(2, 2, 2, 2)
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    out = np.einsum("ijkl,imkn,jolp->monp", r, ja, jb)
    return out.reshape(4, 4)
