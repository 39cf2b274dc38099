"""Affine one-qubit channels and noise models of aligned deterministic protocols.

A channel acts on Bloch vectors as ``t -> lam @ t + v``. Local channels act on
a two-qubit Fano form as

    r_a  -> lam_a r_a + v_a
    r_b  -> lam_b r_b + v_b
    corr -> lam_a corr lam_b^T + v_a (lam_b r_b)^T + (lam_a r_a) v_b^T + v_a v_b^T
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import densop
from .bloch import SIGN_MATRICES, mat3, vec3
from .errors import NotAligned, OutOfRange, SingularChannel, SingularCorrelation
from .protocol import Protocol, is_aligned
from .states import BellLabel, TwoQubitFano, bell_state
from .tolerances import EXACT, ORACLE, POSITIVITY


@dataclass(frozen=True, eq=False)
class AffineChannel:
    lam: np.ndarray = field(default_factory=lambda: np.eye(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "lam", mat3(self.lam))
        object.__setattr__(self, "v", vec3(self.v))

    def apply(self, t) -> np.ndarray:
        return np.asarray(t, dtype=float) @ self.lam.T + self.v

    def choi(self) -> np.ndarray:
        return densop.choi_of_affine(self)

    def is_cptp(self, tol: float = POSITIVITY) -> bool:
        return densop.is_positive(self.choi(), tol)

    @property
    def is_unital(self) -> bool:
        return bool(np.all(self.v == 0))

    @property
    def is_diagonal(self) -> bool:
        return bool(np.max(np.abs(self.lam - np.diag(np.diag(self.lam)))) <= EXACT)

    def then(self, rot) -> "AffineChannel":
        """This channel followed by the Bloch rotation ``rot``."""
        rot = mat3(rot)
        return AffineChannel(rot @ self.lam, rot @ self.v)

    def allclose(self, other: "AffineChannel", atol: float = ORACLE) -> bool:
        return bool(
            np.allclose(self.lam, other.lam, rtol=0, atol=atol)
            and np.allclose(self.v, other.v, rtol=0, atol=atol)
        )

    @classmethod
    def from_kraus(cls, kraus) -> "AffineChannel":
        """Affine form of the channel ``rho -> sum_k K rho K^dag``."""
        kraus = np.asarray(kraus, dtype=complex)

        def apply(x):
            return np.einsum("kab,bc,kdc->ad", kraus, x, kraus.conj())

        v = densop.density_to_bloch(apply(np.eye(2) / 2))
        lam = np.column_stack(
            [densop.density_to_bloch(apply(s / 2)) for s in densop.PAULI]
        )
        return cls(np.real(lam), np.real(v))


def tetrahedron_cptp(lam_diag, tol: float = EXACT) -> bool:
    """Closed-form CPTP test for a unital channel with diagonal ``lam``."""
    l1, l2, l3 = vec3(lam_diag)
    return bool(
        abs(l1 + l2) <= 1 + l3 + tol and abs(l1 - l2) <= 1 - l3 + tol
    )


def apply_local(ca: AffineChannel, cb: AffineChannel, f: TwoQubitFano) -> TwoQubitFano:
    """Fano form of ``(ca (x) cb)[rho]``."""
    ra = ca.lam @ f.r_a
    rb = cb.lam @ f.r_b
    corr = (
        ca.lam @ f.corr @ cb.lam.T
        + np.outer(ca.v, rb)
        + np.outer(ra, cb.v)
        + np.outer(ca.v, cb.v)
    )
    return TwoQubitFano(r_a=ra + ca.v, r_b=rb + cb.v, corr=corr)


def depolarizing(q: float) -> AffineChannel:
    if not -1 / 3 - EXACT <= q <= 1 + EXACT:
        raise OutOfRange(f"depolarizing parameter {q} outside [-1/3, 1]")
    return AffineChannel(q * np.eye(3), np.zeros(3))


class NoiseResiduals(NamedTuple):
    product: float  # |lam_abar lam_a^2 lam_b - s I|
    translation: float  # |v_abar + s (lam_a lam_b)^-1 r_bell r_c_a|

    def ok(self, tol: float = EXACT) -> bool:
        return self.product < tol and self.translation < tol


def noise_conditions(
    ch_abar: AffineChannel,
    ch_a: AffineChannel,
    ch_b: AffineChannel,
    s: float,
    r_c_a,
    reference: BellLabel = BellLabel.PHI_PLUS,
) -> NoiseResiduals:
    """Residuals of the two conditions under which three local channels acting on
    the perfect protocol give an aligned deterministic protocol with factor ``s``.

    All channel matrices must be diagonal (canonical frame).
    """
    for name, ch in (("abar", ch_abar), ("a", ch_a), ("b", ch_b)):
        if not ch.is_diagonal:
            raise ValueError(f"channel {name} is not diagonal; rotate to the canonical frame first")
    r_c_a = vec3(r_c_a)
    product = ch_abar.lam @ ch_a.lam @ ch_a.lam @ ch_b.lam
    res1 = float(np.linalg.norm(product - s * np.eye(3)))
    ab = np.diag(ch_a.lam @ ch_b.lam)
    if np.any(r_c_a != 0):
        if np.any(ab == 0):
            raise SingularChannel("lam_a lam_b is singular")
        target = -s * (reference.diagonal * r_c_a) / ab
    else:
        target = np.zeros(3)
    res2 = float(np.linalg.norm(ch_abar.v - target))
    return NoiseResiduals(res1, res2)


class WernerClass(enum.Enum):
    CASE_I = "I"
    CASE_II = "II"
    UNCORRELATED_POINT = "uncorrelated"
    INFEASIBLE = "infeasible"

    @property
    def feasible(self) -> bool:
        return self is not WernerClass.INFEASIBLE


@dataclass(frozen=True)
class WernerCase:
    classification: WernerClass
    p: float
    s: float
    p_prime: float  # nan when p == 0
    polynomial: float  # p^8 (p - s)^3 (p + 3 s)

    def csv_row(self) -> list:
        return [self.p, self.s, self.p_prime, self.polynomial, self.classification.value]


WERNER_CSV_HEADER = ["p", "s", "p_prime", "polynomial_value", "case"]


def werner_feasible(p: float, s: float, tol: float = EXACT) -> WernerCase:
    """Classify a deterministic aligned protocol with Werner resource ``p``.

    The POVM states are Werner states with parameter ``s / p``. Feasible
    points split into a positive branch ``s <= p <= 1`` (which contains the
    uncorrelated-noise point ``p = sqrt(s)``) and, for ``s <= 1/9``, a negative
    branch ``-1/3 <= p <= -3 s``.
    """
    poly = p**8 * (p - s) ** 3 * (p + 3 * s)
    p_prime = s / p if p != 0 else float("nan")
    in_window = 0 < s <= 1 + tol and -1 / 3 - tol <= p <= 1 + tol
    if not in_window or p == 0:
        cls = WernerClass.INFEASIBLE
    elif abs(p - np.sqrt(s)) < tol:
        cls = WernerClass.UNCORRELATED_POINT
    # sign of the polynomial from its linear factors, with a tolerance at the roots
    elif p > 0 and p - s >= -tol:
        cls = WernerClass.CASE_I
    elif p < 0 and p + 3 * s <= tol:
        cls = WernerClass.CASE_II
    else:
        cls = WernerClass.INFEASIBLE
    return WernerCase(cls, float(p), float(s), float(p_prime), float(poly))


@dataclass(frozen=True, eq=False)
class NoiseDecomposition:
    """Local channels whose action on the perfect protocol gives a given protocol.

    The resource is ``(a (x) b)[bell]`` and POVM state m is
    ``(sign_m . abar (x) a)[bell]``, with ``bell`` the ``reference`` state.

    The resource is always reproduced. The POVM states are reproduced only
    when Alice's marginal is zero: otherwise the translation of ``a`` leaves
    an Alice marginal on them that the aligned POVM does not have.
    """

    abar: AffineChannel
    a: AffineChannel
    b: AffineChannel
    reference: BellLabel
    s: float
    sign_indices: tuple  # 1-based sign matrix per POVM element

    def resource(self) -> TwoQubitFano:
        return apply_local(self.a, self.b, bell_state(self.reference))

    def povm_states(self) -> list[TwoQubitFano]:
        bell = bell_state(self.reference)
        return [
            apply_local(self.abar.then(SIGN_MATRICES[k - 1]), self.a, bell)
            for k in self.sign_indices
        ]


def _candidate_lams(d: np.ndarray, s: float):
    """Diagonal (lam_abar, lam_a, lam_b) solving lam_a lam_b = d, lam_abar lam_a^2 lam_b = s.

    Fixed order: the all-equal solution (only when d = sqrt(s)), then
    lam_a = lam_b = signs * sqrt(d) over the 8 sign patterns, then noise on
    Bob's and the input line only.
    """
    if np.max(np.abs(d - np.sqrt(s))) <= ORACLE:
        q = s**0.25
        yield np.full(3, q), np.full(3, q), np.full(3, q)
    root = np.sqrt(d)
    for signs in itertools.product((1.0, -1.0), repeat=3):
        x = np.array(signs) * root
        yield s / (d * x), x, x
    yield s / d, np.ones(3), d


def decompose_perfect_plus_noise(p: Protocol) -> Optional[NoiseDecomposition]:
    """Find CPTP diagonal channels turning the perfect protocol into ``p``.

    ``p`` must be an aligned deterministic protocol in the canonical frame:
    diagonal resource correlation, four outcomes of weight 1/4 with equal
    factor, POVM correlations equal to sign matrices times ``s r_d^-1``.
    Returns None when no candidate channel triple is CPTP.
    """
    try:
        factors = is_aligned(p)
    except SingularCorrelation as exc:
        raise NotAligned(str(exc)) from exc
    if factors is None:
        raise NotAligned("protocol does not align")
    s = factors[0]
    if len(factors) != 4 or max(abs(f - s) for f in factors) > ORACLE:
        raise NotAligned("factors are not equal across four outcomes")
    if np.max(np.abs(p.povm.weights - 0.25)) > ORACLE:
        raise NotAligned("outcome weights are not 1/4")
    corr = p.resource.corr
    r_d = np.diag(corr).copy()
    if np.max(np.abs(corr - np.diag(r_d))) > EXACT:
        raise NotAligned("resource correlation is not diagonal (not in the canonical frame)")
    r_c = p.resource.r_a
    w_d = s / r_d
    omega_c = -w_d * r_c
    sign_indices = []
    for m, element in enumerate(p.povm):
        for k, b in enumerate(SIGN_MATRICES, start=1):
            if np.max(np.abs(element.state.corr - b @ np.diag(w_d))) <= ORACLE and np.allclose(
                element.state.r_a, b @ omega_c, rtol=0, atol=ORACLE
            ):
                sign_indices.append(k)
                break
        else:
            raise NotAligned(f"POVM element {m} is not a sign-rotated canonical state")

    if np.prod(r_d) >= 0:
        return None
    reference = BellLabel.from_signs(r_d)
    d = np.abs(r_d)
    for lam_abar, lam_a, lam_b in _candidate_lams(d, s):
        v_abar = -s * reference.diagonal * r_c / (lam_a * lam_b)
        abar = AffineChannel(np.diag(lam_abar), v_abar)
        a = AffineChannel(np.diag(lam_a), r_c)
        b = AffineChannel(np.diag(lam_b), np.zeros(3))
        if abar.is_cptp() and a.is_cptp() and b.is_cptp():
            return NoiseDecomposition(abar, a, b, reference, s, tuple(sign_indices))
    return None
