"""Aligned teleportation protocols: feasibility, construction, region scans.

Everything is parametrized in the canonical frame of the resource: a diagonal
correlation ``r_d = (r1, r2, r3)`` and Alice's marginal ``r_c_a``; Bob's
marginal is zero. An aligned protocol with factors ``s_m`` then has POVM
correlations ``o_m^T (s_m r_d^-1)`` and input marginals ``-s_m o_m^T r_d^-1 r_c_a``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bloch import SIGN_MATRICES, as_rotation, vec3
from .errors import ClosureViolation, Infeasible, OutOfRange, SingularCorrelation
from .povm import PovmElement, PovmSet
from .protocol import Protocol, is_aligned
from .states import TwoQubitFano
from .tolerances import EXACT, ORACLE

MARGIN_NAMES = (
    "margin_a5a",
    "margin_a5b",
    "margin_a5c",
    "margin_a5d",
    "margin_a1_rho",
    "margin_a1_omega",
)


@dataclass(frozen=True, eq=False)
class AlignedOutcome:
    weight: float
    factor: float
    rot: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if not 0 < self.factor <= 1 + EXACT:
            raise OutOfRange(f"alignment factor {self.factor} outside (0, 1]")
        object.__setattr__(self, "rot", as_rotation(self.rot))


@dataclass(frozen=True, eq=False)
class AlignedSpec:
    r_d: np.ndarray
    r_c_a: np.ndarray
    outcomes: tuple
    o_b: np.ndarray = field(default_factory=lambda: np.eye(3))
    # the output does not depend on o_a; built protocols use the identity
    o_a: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        r_d = vec3(self.r_d)
        if np.prod(r_d) == 0:
            raise SingularCorrelation("aligned protocols need det(r_d) != 0")
        object.__setattr__(self, "r_d", r_d)
        object.__setattr__(self, "r_c_a", vec3(self.r_c_a))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "o_b", as_rotation(self.o_b))
        object.__setattr__(self, "o_a", as_rotation(self.o_a))

    def closure_residual(self) -> float:
        """Norm of ``sum_m P_m s_m o_m^T``, zero for a complete POVM."""
        total = sum(o.weight * o.factor * o.rot.T for o in self.outcomes)
        return float(np.linalg.norm(total))


@dataclass(frozen=True)
class FeasibilityReport:
    """Positivity margins of the resource and POVM states (left minus right).

    ``margins`` holds the four inequalities of the aligned-protocol system as
    usually printed; ``trace_margins`` holds the trace inequality
    ``3 - |corr|^2 >= |marginal|^2`` for the resource and for the POVM state
    (the latter multiplied by ``det(r_d)^2``). That inequality is not implied by
    the other two once POVM correlations exceed 1 in magnitude, so it is part
    of ``ok``.
    """

    ok: bool
    margins: tuple
    trace_margins: tuple

    @property
    def all_margins(self) -> tuple:
        return tuple(self.margins) + tuple(self.trace_margins)


def feasibility_margins(r_d, r_c_a, s) -> np.ndarray:
    """Margins for broadcast ``r_d`` (trailing axis 3); columns follow MARGIN_NAMES."""
    r_d = np.asarray(r_d, dtype=float)
    rc = vec3(r_c_a)
    r1, r2, r3 = r_d[..., 0], r_d[..., 1], r_d[..., 2]
    det = r1 * r2 * r3
    norm2 = r1 * r1 + r2 * r2 + r3 * r3
    # adjugate diagonal: det * r_d^-1
    adj = np.stack([r2 * r3, r1 * r3, r1 * r2], axis=-1)
    adj2 = np.sum(adj * adj, axis=-1)
    c2 = float(rc @ rc)
    rd_rc2 = np.sum((r_d * rc) ** 2, axis=-1)
    adj_rc2 = np.sum((adj * rc) ** 2, axis=-1)
    adj2_rc2 = np.sum((adj * adj * rc) ** 2, axis=-1)
    f = (1 - r1 - r2 - r3) * (1 - r1 + r2 + r3) * (1 + r1 - r2 + r3) * (1 + r1 + r2 - r3)
    q = s * s * adj2 - det * det

    a5a = -2 * det - (norm2 - 1) - c2
    a5b = f - (4 * rd_rc2 + c2 * (2 * (1 - norm2) - c2))
    a5c = -2 * s**3 * det - q - s * s * adj_rc2
    a5d = (
        -8 * s**3 * det**3
        + q * q
        - 4 * s**4 * det * det * norm2
        - (4 * s**4 * adj2_rc2 - s * s * adj_rc2 * (2 * q + s * s * adj_rc2))
    )
    a1_rho = 3 - norm2 - c2
    a1_omega = 3 * det * det - s * s * adj2 - s * s * adj_rc2
    return np.stack(np.broadcast_arrays(a5a, a5b, a5c, a5d, a1_rho, a1_omega), axis=-1)


def _feasible(margins: np.ndarray, det: np.ndarray) -> np.ndarray:
    return (det != 0) & np.all(margins >= -EXACT, axis=-1)


def feasibility(r_d, r_c_a, s: float) -> FeasibilityReport:
    """Can resource ``(r_d, r_c_a)`` and POVM states with factor ``s`` all be positive?"""
    r_d = vec3(r_d)
    if np.prod(r_d) == 0:
        raise SingularCorrelation("feasibility assumes det(r_d) != 0")
    if not 0 < s <= 1 + EXACT:
        raise OutOfRange(f"alignment factor {s} outside (0, 1]")
    m = feasibility_margins(r_d, r_c_a, s)
    return FeasibilityReport(
        ok=bool(_feasible(m, np.prod(r_d))),
        margins=tuple(float(x) for x in m[:4]),
        trace_margins=tuple(float(x) for x in m[4:]),
    )


def build_aligned(spec: AlignedSpec) -> Protocol:
    """Resource, POVM and corrections realizing ``t_m = s_m t`` for every outcome."""
    weights = np.array([o.weight for o in spec.outcomes])
    if abs(weights.sum() - 1) > EXACT:
        raise ClosureViolation(f"outcome weights sum to {weights.sum()!r}")
    residual = spec.closure_residual()
    if residual > EXACT:
        raise ClosureViolation(f"sum of P_m s_m o_m^T has norm {residual:.3g}")
    for m, o in enumerate(spec.outcomes):
        report = feasibility(spec.r_d, spec.r_c_a, o.factor)
        if not report.ok:
            raise Infeasible(f"outcome {m}: margins {report.all_margins}")

    inv = 1.0 / spec.r_d
    resource = TwoQubitFano(
        r_a=spec.o_a.T @ spec.r_c_a,
        corr=spec.o_a.T @ np.diag(spec.r_d) @ spec.o_b,
    )
    elements = []
    corrections = []
    for o in spec.outcomes:
        state = TwoQubitFano(
            r_a=o.rot.T @ (-o.factor * inv * spec.r_c_a),
            corr=o.rot.T @ np.diag(o.factor * inv) @ spec.o_a,
        )
        elements.append(PovmElement(o.weight, state))
        corrections.append(o.rot @ spec.o_b)
    return Protocol(resource, PovmSet(tuple(elements)), tuple(corrections))


def dqtp_spec(r_d, r_c_a, s: float, o_b=None) -> AlignedSpec:
    outcomes = tuple(AlignedOutcome(0.25, s, b) for b in SIGN_MATRICES)
    return AlignedSpec(
        r_d=r_d, r_c_a=r_c_a, outcomes=outcomes, o_b=np.eye(3) if o_b is None else o_b
    )


def build_dqtp(r_d, r_c_a, s: float, o_b=None) -> Protocol:
    """Deterministic aligned protocol: four outcomes, sign-matrix rotations, equal factor ``s``."""
    return build_aligned(dqtp_spec(r_d, r_c_a, s, o_b))


def det_rd_sign(spec: AlignedSpec) -> float:
    return float(np.prod(spec.r_d))


def fidelity_target(outcomes: Sequence) -> float:
    """Average fidelity ``(1 + sum_m P_m s_m) / 2`` of an aligned protocol."""
    total = 0.0
    for o in outcomes:
        if isinstance(o, AlignedOutcome):
            total += o.weight * o.factor
        else:
            weight, factor = o
            total += weight * factor
    return 0.5 * (1.0 + total)


def is_perfect(p: Protocol, tol: float = ORACLE) -> bool:
    """True when every outcome returns the input state exactly."""
    try:
        factors = is_aligned(p, tol)
    except SingularCorrelation:
        return False
    return factors is not None and all(abs(s - 1) <= tol for s in factors)


def rca_from_spherical(norm: float, theta: float, phi: float) -> np.ndarray:
    return norm * np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


@dataclass(frozen=True)
class GridSpec:
    min: float = -1.0
    max: float = 1.0
    steps: int = 101

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("grid needs at least 2 steps per axis")
        if not self.min < self.max:
            raise ValueError("grid min must be below max")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True, eq=False)
class ScanResult:
    """Grid nodes in lexicographic (r1, r2, r3) order with their margins."""

    nodes: np.ndarray  # (N, 3)
    margins: np.ndarray  # (N, 6), columns follow MARGIN_NAMES
    feasible: np.ndarray  # (N,) bool
    total_nodes: int

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_feasible(self) -> int:
        return int(self.feasible.sum())


def _scan_slab(r1: float, axis: np.ndarray, r_c_a, s: float):
    r2, r3 = np.meshgrid(axis, axis, indexing="ij")
    nodes = np.stack([np.full_like(r2, r1), r2, r3], axis=-1).reshape(-1, 3)
    margins = feasibility_margins(nodes, r_c_a, s)
    feasible = _feasible(margins, np.prod(nodes, axis=1))
    return nodes, margins, feasible


def scan_region(
    s: float,
    r_c_a,
    grid: GridSpec = GridSpec(),
    emit_all: bool = False,
    workers: Optional[int] = None,
) -> ScanResult:
    """Evaluate feasibility on a cubic grid of correlation diagonals.

    Only feasible nodes are kept unless ``emit_all``. Slabs of constant r1 are
    independent; ``workers`` (default: ``QTPALIGN_THREADS`` or 1) threads
    process them and results are concatenated in grid order.
    """
    if not 0 < s <= 1 + EXACT:
        raise OutOfRange(f"alignment factor {s} outside (0, 1]")
    r_c_a = vec3(r_c_a)
    axis = grid.axis
    if workers is None:
        workers = max(1, int(os.environ.get("QTPALIGN_THREADS", "1") or 1))

    def run(r1):
        nodes, margins, feasible = _scan_slab(r1, axis, r_c_a, s)
        if not emit_all:
            nodes, margins, feasible = nodes[feasible], margins[feasible], feasible[feasible]
        return nodes, margins, feasible

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            slabs = list(pool.map(run, axis))
    else:
        slabs = [run(r1) for r1 in axis]
    return ScanResult(
        nodes=np.concatenate([x[0] for x in slabs]),
        margins=np.concatenate([x[1] for x in slabs]),
        feasible=np.concatenate([x[2] for x in slabs]),
        total_nodes=grid.steps**3,
    )
