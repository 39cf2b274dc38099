"""Teleportation protocols: execution, induced channel, alignment test.

The fast path works entirely on Bloch vectors and Fano data. For outcome m
and input Bloch vector t:

    g_m(t)  = 1 + omega^a_m . r^a + (w_m r^a + omega^abar_m) . t
    P_m     = Pbar_m g_m(t)
    t^b_m   = (A_m t + kappa_m) / g_m(t)
    t_m     = R_m t^b_m

with ``A_m = r^b (omega^abar_m)^T + r^T w_m^T`` and ``kappa_m = r^b + r^T omega^a_m``.
:func:`execute_oracle` recomputes the same records from 8x8 density matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import densop
from .bloch import as_rotation, unitary_from_rotation
from .errors import InvalidProtocol, NegativeProbability, SingularCorrelation
from .povm import PovmSet, validate_closure
from .states import QubitState, TwoQubitFano
from .tolerances import EXACT, ORACLE, POSITIVITY, ZERO_PROBABILITY

NEGATIVE_PROBABILITY = 1e-9


@dataclass(frozen=True, eq=False)
class InducedChannel:
    """Outcome-averaged Bloch map ``t -> c t + v``."""

    c: np.ndarray
    v: np.ndarray

    def apply(self, t) -> np.ndarray:
        return np.asarray(t) @ self.c.T + self.v

    # the same attribute names as channels.AffineChannel, so densop.choi_of_affine accepts it
    @property
    def lam(self) -> np.ndarray:
        return self.c


@dataclass(frozen=True)
class OutcomeRecord:
    m: int
    p: float
    g: float
    t_b: np.ndarray
    t_out: np.ndarray
    # False when p is (numerically) zero: t_b and t_out are then meaningless zeros
    defined: bool = True


@dataclass(frozen=True)
class _Kinematics:
    weights: np.ndarray  # (M,)
    g_const: np.ndarray  # (M,)
    g_lin: np.ndarray  # (M, 3)
    a: np.ndarray  # (M, 3, 3)
    kappa: np.ndarray  # (M, 3)
    rot: np.ndarray  # (M, 3, 3)


@dataclass(frozen=True, eq=False)
class Protocol:
    """Resource state, POVM and one Bob correction rotation per outcome.

    Validity (resource positivity, POVM positivity and closure, rotation
    matrices) is checked once here, never on execution.
    """

    resource: TwoQubitFano
    povm: PovmSet
    corrections: tuple

    def __post_init__(self):
        rots = tuple(np.array(as_rotation(r, tol=1e-9)) for r in self.corrections)
        object.__setattr__(self, "corrections", rots)
        if len(rots) != len(self.povm):
            raise InvalidProtocol(
                f"{len(rots)} corrections for {len(self.povm)} POVM elements"
            )
        if not self.resource.is_physical(POSITIVITY):
            raise InvalidProtocol("resource state is not positive")
        for m, element in enumerate(self.povm):
            if not element.state.is_physical(POSITIVITY):
                raise InvalidProtocol(f"POVM element {m} is not positive")
        residuals = validate_closure(self.povm)
        if residuals.max > EXACT:
            raise InvalidProtocol(f"POVM closure violated: {residuals}")

    @cached_property
    def _kin(self) -> _Kinematics:
        r_a, r_b, corr = self.resource.r_a, self.resource.r_b, self.resource.corr
        om_in = np.array([e.state.r_a for e in self.povm])
        om_al = np.array([e.state.r_b for e in self.povm])
        w = np.array([e.state.corr for e in self.povm])
        a = np.einsum("i,mj->mij", r_b, om_in) + np.einsum("ki,mjk->mij", corr, w)
        return _Kinematics(
            weights=self.povm.weights,
            g_const=1.0 + om_al @ r_a,
            g_lin=w @ r_a + om_in,
            a=a,
            kappa=r_b + om_al @ corr,
            rot=np.array(self.corrections),
        )

    def to_dict(self) -> dict:
        return {
            "resource": self.resource.to_dict(),
            "povm": self.povm.to_dict(),
            "corrections": [r.reshape(9).tolist() for r in self.corrections],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Protocol":
        return cls(
            resource=TwoQubitFano.from_dict(data["resource"]),
            povm=PovmSet.from_dict(data["povm"]),
            corrections=tuple(np.reshape(r, (3, 3)) for r in data["corrections"]),
        )


def outcome_arrays(p: Protocol, t) -> dict[str, np.ndarray]:
    """Vectorized fast path over many inputs.

    ``t`` has shape (n, 3). Returns arrays ``p`` and ``g`` of shape (n, M),
    ``t_b`` and ``t_out`` of shape (n, M, 3) and the boolean mask ``defined``.
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    kin = p._kin
    g = kin.g_const[None, :] + t @ kin.g_lin.T
    prob = kin.weights[None, :] * g
    if np.any(prob < -NEGATIVE_PROBABILITY):
        raise NegativeProbability(f"outcome probability {prob.min():.3g} < 0")
    defined = prob > ZERO_PROBABILITY
    numer = np.einsum("mij,nj->nmi", kin.a, t) + kin.kappa[None, :, :]
    safe_g = np.where(defined, g, 1.0)
    t_b = np.where(defined[..., None], numer / safe_g[..., None], 0.0)
    t_out = np.einsum("mij,nmj->nmi", kin.rot, t_b)
    return {"p": prob, "g": g, "t_b": t_b, "t_out": t_out, "defined": defined}


def _as_bloch(state) -> np.ndarray:
    if isinstance(state, QubitState):
        return state.t
    return QubitState(state).t


def execute(p: Protocol, state) -> list[OutcomeRecord]:
    """Run the protocol on one input (a :class:`QubitState` or a Bloch vector)."""
    t = _as_bloch(state)
    arr = outcome_arrays(p, t[None, :])
    return [
        OutcomeRecord(
            m=m,
            p=float(arr["p"][0, m]),
            g=float(arr["g"][0, m]),
            t_b=arr["t_b"][0, m],
            t_out=arr["t_out"][0, m],
            defined=bool(arr["defined"][0, m]),
        )
        for m in range(len(p.povm))
    ]


def execute_oracle(p: Protocol, state) -> list[OutcomeRecord]:
    """Same as :func:`execute`, computed from explicit 8x8 density operators."""
    t = _as_bloch(state)
    total = densop.kron(densop.bloch_to_density(t), p.resource.density())
    records = []
    for m, (element, rot) in enumerate(zip(p.povm, p.corrections)):
        measured = densop.kron(element.operator, np.eye(2)) @ total
        prob = float(np.real(np.trace(measured)))
        if prob < -NEGATIVE_PROBABILITY:
            raise NegativeProbability(f"outcome probability {prob:.3g} < 0")
        if prob <= ZERO_PROBABILITY:
            zero = np.zeros(3)
            records.append(OutcomeRecord(m, prob, prob / element.weight, zero, zero, False))
            continue
        bob = densop.partial_trace(measured, 2) / prob
        u = unitary_from_rotation(rot)
        out = u @ bob @ u.conj().T
        records.append(
            OutcomeRecord(
                m=m,
                p=prob,
                g=prob / element.weight,
                t_b=densop.density_to_bloch(bob),
                t_out=densop.density_to_bloch(out),
            )
        )
    return records


def induced_channel(p: Protocol) -> InducedChannel:
    kin = p._kin
    c = np.einsum("m,mij,mjk->ik", kin.weights, kin.rot, kin.a)
    v = np.einsum("m,mij,mj->i", kin.weights, kin.rot, kin.kappa)
    return InducedChannel(c=c, v=v)


def is_aligned(p: Protocol, tol: float = ORACLE) -> Optional[list[float]]:
    """Per-outcome shrinking factors ``s_m`` if the protocol aligns, else None.

    Aligned means ``t_m = s_m t`` with ``s_m > 0`` for every input. The test
    checks, per outcome, that ``g_m`` is input independent, that no marginal
    offsets reach Bob, and that ``R_m r^T w_m^T`` is a positive multiple of
    the identity.
    """
    r_b, corr = p.resource.r_b, p.resource.corr
    if np.linalg.norm(r_b) > tol:
        return None
    kin = p._kin
    for m, element in enumerate(p.povm):
        if np.linalg.norm(kin.g_lin[m]) > tol or np.linalg.norm(element.state.r_b) > tol:
            return None
    if abs(np.linalg.det(corr)) <= tol:
        raise SingularCorrelation("resource correlation matrix is singular")
    factors = []
    for m, element in enumerate(p.povm):
        if abs(np.linalg.det(element.state.corr)) <= tol:
            raise SingularCorrelation(f"POVM element {m} has a singular correlation matrix")
        prod = kin.rot[m] @ corr.T @ element.state.corr.T
        s = np.trace(prod) / 3
        if s <= tol or np.max(np.abs(prod - s * np.eye(3))) > tol:
            return None
        factors.append(float(s))
    return factors
