"""POVMs on Alice's two qubits, stored as weighted two-qubit Fano states.

An element ``E_m`` is represented by its weight ``P_m = Tr(E_m)/4`` and the
state ``omega_m = E_m / (4 P_m)``. The first qubit of ``omega_m`` is the input
qubit, the second is Alice's half of the resource.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bloch import SIGN_MATRICES
from .errors import InvalidPovm
from .states import BellLabel, TwoQubitFano
from .tolerances import MIN_WEIGHT, POSITIVITY


@dataclass(frozen=True, eq=False)
class PovmElement:
    weight: float
    state: TwoQubitFano

    def __post_init__(self):
        w = float(self.weight)
        if not np.isfinite(w) or w < MIN_WEIGHT or w > 1 + 1e-12:
            raise InvalidPovm(f"POVM weight {w} outside (0, 1]")
        object.__setattr__(self, "weight", w)

    @property
    def operator(self) -> np.ndarray:
        return 4 * self.weight * self.state.density()

    def to_dict(self) -> dict:
        return {"weight": self.weight, "state": self.state.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "PovmElement":
        return cls(weight=data["weight"], state=TwoQubitFano.from_dict(data["state"]))


class ClosureResiduals(NamedTuple):
    """Norms of the four completeness conditions of a POVM."""

    weights: float  # |sum P_m - 1|
    alice_marginals: float  # |sum P_m omega^a_m|
    input_marginals: float  # |sum P_m omega^abar_m|
    correlations: float  # |sum P_m w_m| (Frobenius)

    @property
    def max(self) -> float:
        return max(self)


@dataclass(frozen=True, eq=False)
class PovmSet:
    elements: tuple[PovmElement, ...]

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise InvalidPovm("a POVM needs at least one element")
        object.__setattr__(self, "elements", elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, m: int) -> PovmElement:
        return self.elements[m]

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.elements])

    def to_dict(self) -> dict:
        return {"elements": [e.to_dict() for e in self.elements]}

    @classmethod
    def from_dict(cls, data: dict) -> "PovmSet":
        return cls(tuple(PovmElement.from_dict(e) for e in data["elements"]))


def validate_closure(povm: PovmSet) -> ClosureResiduals:
    w = povm.weights
    input_marg = np.array([e.state.r_a for e in povm])
    alice_marg = np.array([e.state.r_b for e in povm])
    corr = np.array([e.state.corr for e in povm])
    return ClosureResiduals(
        weights=abs(w.sum() - 1.0),
        alice_marginals=float(np.linalg.norm(w @ alice_marg)),
        input_marginals=float(np.linalg.norm(w @ input_marg)),
        correlations=float(np.linalg.norm(np.einsum("m,mij->ij", w, corr))),
    )


def bell_povm(reference: BellLabel = BellLabel.PHI_PLUS) -> PovmSet:
    """Bell measurement, ordered so that element m pairs with sign matrix m.

    Element m has correlation ``b_m @ reference.corr``. With the resource in
    the ``reference`` Bell state and corrections ``b_m`` the protocol teleports
    perfectly.
    """
    return PovmSet(
        tuple(
            PovmElement(0.25, TwoQubitFano(corr=b @ reference.corr))
            for b in SIGN_MATRICES
        )
    )


def element_positivity(element: PovmElement, tol: float = POSITIVITY) -> bool:
    return element.state.is_physical(tol)
