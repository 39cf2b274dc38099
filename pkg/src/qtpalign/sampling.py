"""Random generators for states, POVMs, protocols and channels.

All functions take an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from . import densop
from .channels import AffineChannel
from .povm import PovmElement, PovmSet
from .protocol import Protocol
from .states import TwoQubitFano


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def random_ball(rng: np.random.Generator, n: int, radius: float = 1.0) -> np.ndarray:
    """``n`` points uniform in the ball of the given radius."""
    g = rng.standard_normal((n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * rng.random((n, 1)) ** (1 / 3)


def _ginibre(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    return rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))


def random_density(rng: np.random.Generator, dim: int = 4, rank: int | None = None) -> np.ndarray:
    """Random density matrix (Hilbert-Schmidt measure for full rank)."""
    g = _ginibre(rng, dim, rank or dim)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_fano(rng: np.random.Generator, rank: int | None = None) -> TwoQubitFano:
    return densop.density_to_fano(random_density(rng, 4, rank))


def random_povm(rng: np.random.Generator, n_outcomes: int = 4, rank: int | None = None) -> PovmSet:
    """Random POVM ``E_m = S^-1/2 A_m S^-1/2`` with ``S = sum A_m``."""
    blocks = []
    for _ in range(n_outcomes):
        g = _ginibre(rng, 4, rank or 4)
        blocks.append(g @ g.conj().T)
    total = sum(blocks)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v / np.sqrt(w)) @ v.conj().T
    elements = []
    for a in blocks:
        e = inv_sqrt @ a @ inv_sqrt
        weight = np.trace(e).real / 4
        elements.append(PovmElement(weight, densop.density_to_fano(e / (4 * weight))))
    return PovmSet(tuple(elements))


def random_protocol(rng: np.random.Generator, n_outcomes: int | None = None) -> Protocol:
    if n_outcomes is None:
        n_outcomes = int(rng.integers(2, 7))
    rank = int(rng.integers(1, 5))
    return Protocol(
        resource=random_fano(rng, rank),
        povm=random_povm(rng, n_outcomes),
        corrections=tuple(random_rotation(rng) for _ in range(n_outcomes)),
    )


def random_kraus(rng: np.random.Generator, n_kraus: int | None = None) -> np.ndarray:
    """Kraus operators cut from a random isometry ``C^2 -> C^(2k)``."""
    k = n_kraus or int(rng.integers(1, 5))
    q, r = np.linalg.qr(_ginibre(rng, 2 * k, 2))
    # fix the phase freedom so the isometry is Haar distributed
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q.reshape(k, 2, 2)


def random_channel(rng: np.random.Generator, n_kraus: int | None = None) -> AffineChannel:
    return AffineChannel.from_kraus(random_kraus(rng, n_kraus))
