"""One- and two-qubit states in Bloch/Fano form."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import densop
from .bloch import canonical_decompose, mat3, vec3
from .errors import OutOfRange, SingularCorrelation
from .tolerances import EXACT, POSITIVITY


@dataclass(frozen=True, eq=False)
class QubitState:
    t: np.ndarray

    def __post_init__(self):
        t = vec3(self.t)
        if np.linalg.norm(t) > 1 + EXACT:
            raise OutOfRange(f"Bloch vector norm {np.linalg.norm(t):.6g} exceeds 1")
        object.__setattr__(self, "t", t)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.t))

    def density(self) -> np.ndarray:
        return densop.bloch_to_density(self.t)


@dataclass(frozen=True, eq=False)
class TwoQubitFano:
    """Marginal Bloch vectors ``r_a``, ``r_b`` and correlation matrix ``corr``.

    Positivity is not enforced: POVM trial states and scan points are allowed
    to be non-physical. Use :meth:`is_physical` to check.
    """

    r_a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r_b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    corr: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        object.__setattr__(self, "r_a", vec3(self.r_a))
        object.__setattr__(self, "r_b", vec3(self.r_b))
        object.__setattr__(self, "corr", mat3(self.corr))

    def density(self) -> np.ndarray:
        return densop.fano_to_density(self)

    def is_physical(self, tol: float = POSITIVITY) -> bool:
        return densop.is_positive(self.density(), tol)

    def to_dict(self) -> dict:
        return {
            "r_a": self.r_a.tolist(),
            "r_b": self.r_b.tolist(),
            "corr": self.corr.reshape(9).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TwoQubitFano":
        return cls(r_a=data["r_a"], r_b=data["r_b"], corr=data["corr"])

    def allclose(self, other: "TwoQubitFano", atol: float = EXACT) -> bool:
        return bool(
            np.allclose(self.r_a, other.r_a, rtol=0, atol=atol)
            and np.allclose(self.r_b, other.r_b, rtol=0, atol=atol)
            and np.allclose(self.corr, other.corr, rtol=0, atol=atol)
        )


class BellLabel(enum.Enum):
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    @property
    def diagonal(self) -> np.ndarray:
        return np.array(_BELL_DIAGONALS[self], dtype=float)

    @property
    def corr(self) -> np.ndarray:
        return np.diag(self.diagonal)

    @classmethod
    def from_signs(cls, signs) -> "BellLabel":
        """Bell label whose correlation diagonal has the given sign pattern."""
        key = tuple(float(np.sign(x)) for x in signs)
        for label, diag in _BELL_DIAGONALS.items():
            if key == diag:
                return label
        raise ValueError(f"sign pattern {key} is not a Bell pattern (needs an odd number of minus signs)")


_BELL_DIAGONALS = {
    BellLabel.PHI_PLUS: (-1.0, -1.0, -1.0),
    BellLabel.PHI_MINUS: (-1.0, 1.0, 1.0),
    BellLabel.PSI_PLUS: (1.0, -1.0, 1.0),
    BellLabel.PSI_MINUS: (1.0, 1.0, -1.0),
}


def bell_state(label: BellLabel) -> TwoQubitFano:
    return TwoQubitFano(corr=label.corr)


def werner_state(label: BellLabel, p: float) -> TwoQubitFano:
    """``(1 - p)/4 * identity + p * |bell><bell|``, physical for -1/3 <= p <= 1."""
    if not -1 / 3 - EXACT <= p <= 1 + EXACT:
        raise OutOfRange(f"Werner parameter p={p} outside [-1/3, 1]")
    return TwoQubitFano(corr=p * label.corr)


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Correlation diagonal and local rotations with ``corr = o_a.T diag(r_d) o_b``."""

    r_d: np.ndarray
    o_a: np.ndarray
    o_b: np.ndarray
    r_c_a: np.ndarray
    r_c_b: np.ndarray

    def reassemble(self) -> TwoQubitFano:
        return TwoQubitFano(
            r_a=self.o_a.T @ self.r_c_a,
            r_b=self.o_b.T @ self.r_c_b,
            corr=self.o_a.T @ np.diag(self.r_d) @ self.o_b,
        )


def canonicalize(f: TwoQubitFano) -> CanonicalForm:
    dec = canonical_decompose(f.corr)
    return CanonicalForm(
        r_d=dec.d,
        o_a=dec.o_left,
        o_b=dec.o_right,
        r_c_a=dec.o_left @ f.r_a,
        r_c_b=dec.o_right @ f.r_b,
    )


def f_poly(r1: float, r2: float, r3: float) -> float:
    """Tetrahedron polynomial, in product form."""
    return (
        (1 - r1 - r2 - r3)
        * (1 - r1 + r2 + r3)
        * (1 + r1 - r2 + r3)
        * (1 + r1 + r2 - r3)
    )


def f_poly_det_form(r1: float, r2: float, r3: float) -> float:
    """Same polynomial as :func:`f_poly`, written as ``-8 det + (|r|^2 - 1)^2 - 4 |adj r|^2``."""
    det = r1 * r2 * r3
    norm2 = r1 * r1 + r2 * r2 + r3 * r3
    adj2 = (r2 * r3) ** 2 + (r1 * r3) ** 2 + (r1 * r2) ** 2
    return -8 * det + (norm2 - 1) ** 2 - 4 * adj2


def positivity_margins_rb_zero(r_d, r_c_a) -> np.ndarray:
    """Left-minus-right margins of the positivity inequalities for ``r_b = 0``.

    Works on broadcast arrays: ``r_d`` and ``r_c_a`` have a trailing axis of 3.
    Returns margins stacked on a trailing axis:

    0. ``3 - |r_d|^2 - |r_c|^2``
    1. ``-2 det - (|r_d|^2 - 1) - |r_c|^2``
    2. ``f(r_d) - 4 |r_d r_c|^2 - |r_c|^2 (2 (1 - |r_d|^2) - |r_c|^2)``

    The state is positive iff all three are non-negative. The first margin is
    often dropped as redundant; it is not once entries of ``r_d`` exceed 1 in
    magnitude, which happens for POVM states.
    """
    r_d = np.asarray(r_d, dtype=float)
    r_c = np.asarray(r_c_a, dtype=float)
    r1, r2, r3 = r_d[..., 0], r_d[..., 1], r_d[..., 2]
    det = r1 * r2 * r3
    norm2 = np.sum(r_d**2, axis=-1)
    c2 = np.sum(r_c**2, axis=-1)
    trace_margin = 3 - norm2 - c2
    second = -2 * det - (norm2 - 1) - c2
    third = f_poly(r1, r2, r3) - (
        4 * np.sum((r_d * r_c) ** 2, axis=-1) + c2 * (2 * (1 - norm2) - c2)
    )
    return np.stack(np.broadcast_arrays(trace_margin, second, third), axis=-1)


def positivity_rb_zero(r_d, r_c_a, tol: float = EXACT) -> bool:
    """Positivity of the canonical state with diagonal ``r_d``, marginal ``r_c_a``, ``r_b = 0``."""
    r_d = vec3(r_d)
    if np.prod(r_d) == 0:
        raise SingularCorrelation("positivity system assumes det(r_d) != 0")
    return bool(np.all(positivity_margins_rb_zero(r_d, vec3(r_c_a)) >= -tol))
