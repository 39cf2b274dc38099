"""Differential suites: fast paths against the dense-operator oracle.

Each suite draws its own random stream from ``SeedSequence(seed)``, so a rerun
with the same seed and size is bit-identical. ``sabotage`` perturbs every fast
result by 1e-6 before comparison; the harness must then report failures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import densop, sampling
from .aligned import feasibility_margins
from .channels import apply_local, werner_feasible
from .metrics import (
    FIDELITY,
    Lebedev,
    avg_fidelity_closed,
    fidelity_deviation_closed,
    sphere_average,
)
from .protocol import execute, execute_oracle, induced_channel, outcome_arrays
from .states import BellLabel, TwoQubitFano, positivity_margins_rb_zero
from .tolerances import EXACT, ORACLE, POSITIVITY

SABOTAGE_OFFSET = 1e-6


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    worst: float  # largest deviation, or number of disagreements for decision suites
    tol: float
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" skipped={self.skipped}" if self.skipped else ""
        return f"{status} {self.name}: cases={self.cases} worst={self.worst:.3g} tol={self.tol:g}{extra}"


def _noise(sabotage: bool) -> float:
    return SABOTAGE_OFFSET if sabotage else 0.0


def suite_execute(rng, n: int, sabotage: bool = False, inputs: int = 10) -> SuiteResult:
    """Fast outcome records vs. 8x8 density-matrix evaluation."""
    worst = 0.0
    for _ in range(n):
        p = sampling.random_protocol(rng)
        for t in sampling.random_ball(rng, inputs):
            for fast, slow in zip(execute(p, t), execute_oracle(p, t)):
                worst = max(worst, abs(fast.p + _noise(sabotage) - slow.p))
                if fast.defined and slow.defined:
                    worst = max(worst, float(np.max(np.abs(fast.t_out - slow.t_out))))
    return SuiteResult("execute_vs_oracle", n * inputs, worst, ORACLE)


def suite_induced_channel(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Outcome-averaged output equals ``C t + v``."""
    worst = 0.0
    for _ in range(n):
        p = sampling.random_protocol(rng)
        t = sampling.random_ball(rng, 100)
        arr = outcome_arrays(p, t)
        mean = np.sum(arr["p"][..., None] * arr["t_out"], axis=1)
        dev = np.max(np.abs(mean - induced_channel(p).apply(t))) + _noise(sabotage)
        worst = max(worst, float(dev))
    return SuiteResult("induced_channel", n, worst, EXACT)


def suite_apply_local(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Local affine action on Fano data vs. Choi-matrix application."""
    worst = 0.0
    for _ in range(n):
        ca, cb = sampling.random_channel(rng), sampling.random_channel(rng)
        f = sampling.random_fano(rng)
        fast = apply_local(ca, cb, f).density()
        slow = densop.apply_local_choi(ca.choi(), cb.choi(), f.density())
        worst = max(worst, float(np.max(np.abs(fast - slow))) + _noise(sabotage))
    return SuiteResult("apply_local_vs_choi", n, worst, EXACT)


def _diag_state(r_d, r_c) -> np.ndarray:
    return TwoQubitFano(r_a=r_c, corr=np.diag(r_d)).density()


def suite_positivity(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Closed-form positivity (zero Bob marginal) vs. eigenvalues."""
    r_d = rng.uniform(-1, 1, (n, 3))
    r_c = sampling.random_ball(rng, n)
    margins = positivity_margins_rb_zero(r_d, r_c)
    bad = skipped = 0
    for k in range(n):
        low = densop.hermitian_eigenvalues(_diag_state(r_d[k], r_c[k]))[0]
        if abs(low) <= POSITIVITY:
            skipped += 1
            continue
        closed = bool(np.all(margins[k] >= 0)) != sabotage
        bad += closed != (low > 0)
    return SuiteResult("positivity_closed_form", n - skipped, bad, 0, skipped)


def suite_feasibility(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Aligned-protocol feasibility vs. eigenvalues of resource and POVM state."""
    r_d = rng.uniform(-1, 1, (n, 3))
    r_c = sampling.random_ball(rng, n, 0.3)
    s = rng.uniform(0.05, 1.0, n)
    bad = skipped = 0
    for k in range(n):
        margins = feasibility_margins(r_d[k], r_c[k], s[k])
        w = s[k] / r_d[k]
        low = min(
            densop.hermitian_eigenvalues(_diag_state(r_d[k], r_c[k]))[0],
            densop.hermitian_eigenvalues(_diag_state(w, -w * r_c[k]))[0],
        )
        if abs(low) <= POSITIVITY:
            skipped += 1
            continue
        closed = bool(np.all(margins >= 0)) != sabotage
        bad += closed != (low > 0)
    return SuiteResult("feasibility_closed_form", n - skipped, bad, 0, skipped)


def suite_fidelity_quadrature(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Closed-form average fidelity and its deviation vs. exact spherical quadrature."""
    worst = 0.0
    rule = Lebedev(26)
    for _ in range(n):
        p = sampling.random_protocol(rng)
        ch = induced_channel(p)
        q = sphere_average(p, FIDELITY, rule)
        worst = max(
            worst,
            abs(avg_fidelity_closed(ch) + _noise(sabotage) - q.mean),
            abs(fidelity_deviation_closed(ch) - q.std_dev),
        )
    return SuiteResult("fidelity_closed_vs_quadrature", n, worst, ORACLE)


def suite_werner(rng, n: int, sabotage: bool = False) -> SuiteResult:
    """Werner classification vs. eigenvalues of the resource and POVM Werner states."""
    bad = skipped = 0
    p_vals = rng.uniform(-0.4, 1.05, n)
    s_vals = rng.uniform(1e-3, 1.0, n)
    corr = BellLabel.PHI_PLUS.corr
    for p, s in zip(p_vals, s_vals):
        lows = [densop.hermitian_eigenvalues(TwoQubitFano(corr=x * corr).density())[0] for x in (p, s / p)]
        low = min(lows)
        if abs(low) <= POSITIVITY:
            skipped += 1
            continue
        closed = werner_feasible(p, s).classification.feasible != sabotage
        bad += closed != (low > 0)
    return SuiteResult("werner_classification", n - skipped, bad, 0, skipped)


SUITES: dict[str, Callable] = {
    "execute": suite_execute,
    "induced_channel": suite_induced_channel,
    "apply_local": suite_apply_local,
    "positivity": suite_positivity,
    "feasibility": suite_feasibility,
    "fidelity": suite_fidelity_quadrature,
    "werner": suite_werner,
}

# cases per suite at size 1
_SCALE = {
    "execute": 1,
    "induced_channel": 1,
    "apply_local": 1,
    "positivity": 10,
    "feasibility": 10,
    "fidelity": 1,
    "werner": 10,
}


def run_all(seed: int = 0, n: int = 100, sabotage: bool = False) -> list[SuiteResult]:
    streams = np.random.SeedSequence(seed).spawn(len(SUITES))
    results = []
    for (name, suite), stream in zip(SUITES.items(), streams):
        rng = np.random.default_rng(stream)
        results.append(suite(rng, n * _SCALE[name], sabotage=sabotage))
    return results
