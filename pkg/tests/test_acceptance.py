"""Acceptance criteria, one check per criterion, each printing a PASS/FAIL line.

Run with pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np

from qtpalign import densop
from qtpalign.aligned import GridSpec, build_dqtp, feasibility, fidelity_target, rca_from_spherical, scan_region
from qtpalign.bloch import SIGN_MATRICES
from qtpalign.channels import WernerClass, apply_local, decompose_perfect_plus_noise, depolarizing, werner_feasible
from qtpalign.metrics import (
    FIDELITY,
    TRACE,
    Lebedev,
    MonteCarlo,
    avg_fidelity_closed,
    fidelity_deviation_closed,
    sphere_average,
    trace_fidelity_gap,
)
from qtpalign.povm import bell_povm
from qtpalign.protocol import Protocol, execute, execute_oracle, induced_channel
from qtpalign.sampling import random_ball, random_channel, random_fano, random_protocol
from qtpalign.states import BellLabel, TwoQubitFano, bell_state, positivity_rb_zero

BAND = 1e-10
LINES = []


def report(key, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    line = f"{status} criterion {key}: {detail} [{elapsed:.2f}s / limit {limit:g}s]"
    LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def min_eig(f):
    return densop.hermitian_eigenvalues(f.density())[0]


def test_1_perfect_protocol():
    start = time.perf_counter()
    p = Protocol(bell_state(BellLabel.PSI_MINUS), bell_povm(BellLabel.PSI_MINUS), SIGN_MATRICES)
    fbar = avg_fidelity_closed(induced_channel(p))
    dbar_t = sphere_average(p, TRACE, Lebedev(74)).mean
    worst = 0.0
    for t in random_ball(np.random.default_rng(1), 100):
        for r in execute(p, t):
            worst = max(worst, np.max(np.abs(r.t_out - t)))
    ok = fbar == 1.0 and dbar_t < 1e-12 and worst < 1e-12
    report("1", ok, f"<F>={float(fbar)!r} <D_T>={dbar_t:.2e} max|t_m - t|={worst:.2e}", time.perf_counter() - start, 1)


def test_2_aligned_dqtp_family():
    start = time.perf_counter()
    worst_f = worst_dev = worst_d = 0.0
    for s in (0.1, 1 / 9, 0.5, 0.8, 1.0):
        p = build_dqtp(np.sqrt(s) * BellLabel.PHI_PLUS.diagonal, np.zeros(3), s)
        ch = induced_channel(p)
        worst_f = max(worst_f, abs(avg_fidelity_closed(ch) - (1 + s) / 2))
        worst_dev = max(worst_dev, fidelity_deviation_closed(ch))
        worst_d = max(worst_d, abs(sphere_average(p, TRACE, Lebedev(74)).mean - (1 - s) / 2))
    ok = worst_f < 1e-12 and worst_dev < 1e-12 and worst_d < 1e-10
    detail = f"|<F>-(1+s)/2|={worst_f:.1e} dF={worst_dev:.1e} |<D_T>-(1-s)/2|={worst_d:.1e}"
    report("2", ok, detail, time.perf_counter() - start, 5)


def test_3_trace_fidelity_inequality():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    violations, low = 0, np.inf
    for k in range(1000):
        gap = trace_fidelity_gap(random_protocol(rng), MonteCarlo(10_000, seed=k))
        violations += gap.mean < -3 * gap.mc_error
        low = min(low, gap.mean / max(gap.mc_error, 1e-300))
    detail = f"violations={violations}/1000, min gap/mc_error={low:.2f}"
    report("3", violations == 0, detail, time.perf_counter() - start, 120)


def test_4_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_exec = 0.0
    for _ in range(1000):
        p = random_protocol(rng)
        for t in random_ball(rng, 10):
            for a, b in zip(execute(p, t), execute_oracle(p, t)):
                worst_exec = max(worst_exec, abs(a.p - b.p))
                if a.defined and b.defined:
                    worst_exec = max(worst_exec, np.max(np.abs(a.t_out - b.t_out)))
    worst_local = 0.0
    for _ in range(1000):
        ca, cb, f = random_channel(rng), random_channel(rng), random_fano(rng)
        fast = apply_local(ca, cb, f).density()
        slow = densop.apply_local_choi(ca.choi(), cb.choi(), f.density())
        worst_local = max(worst_local, np.max(np.abs(fast - slow)))
    ok = worst_exec < 1e-10 and worst_local < 1e-12
    report("4", ok, f"execute {worst_exec:.1e}, apply_local {worst_local:.1e}", time.perf_counter() - start, 120)


def test_5_positivity_differential():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    n = 10_000
    bad_rho = skipped_rho = 0
    r_d = rng.uniform(-1, 1, (n, 3))
    r_c = random_ball(rng, n)
    for k in range(n):
        low = min_eig(TwoQubitFano(r_a=r_c[k], corr=np.diag(r_d[k])))
        if abs(low) <= BAND:
            skipped_rho += 1
            continue
        bad_rho += positivity_rb_zero(r_d[k], r_c[k]) != (low > 0)
    bad_feas = skipped_feas = 0
    r_d = rng.uniform(-1, 1, (n, 3))
    r_c = random_ball(rng, n, 0.5)
    s = rng.uniform(1e-3, 1, n)
    for k in range(n):
        w = s[k] / r_d[k]
        low = min(
            min_eig(TwoQubitFano(r_a=r_c[k], corr=np.diag(r_d[k]))),
            min_eig(TwoQubitFano(r_a=-w * r_c[k], corr=np.diag(w))),
        )
        if abs(low) <= BAND:
            skipped_feas += 1
            continue
        bad_feas += feasibility(r_d[k], r_c[k], s[k]).ok != (low > 0)
    detail = (
        f"positivity disagreements={bad_rho} (band-skipped {skipped_rho}), "
        f"feasibility disagreements={bad_feas} (band-skipped {skipped_feas})"
    )
    report("5", bad_rho == 0 and bad_feas == 0, detail, time.perf_counter() - start, 60)


GRID = GridSpec(-1.0, 1.0, 101)
_SCANS = {}


def scan(s, norm, theta, phi):
    key = (s, norm, theta, phi)
    if key not in _SCANS:
        start = time.perf_counter()
        result = scan_region(s, rca_from_spherical(norm, theta, phi), GRID)
        _SCANS[key] = (result, time.perf_counter() - start)
    return _SCANS[key]


def scan_time():
    return sum(t for _, t in _SCANS.values())


def node_set(result):
    return {tuple(np.round(n, 9)) for n in result.nodes}


def test_6a_nested_regions():
    sets = [scan(0.8, norm, 0.0, 0.0)[0] for norm in (0.0, 0.05, 0.1)]
    counts = [r.n_feasible for r in sets]
    a, b, c = (node_set(r) for r in sets)
    ok = all(counts) and counts[0] > counts[1] > counts[2] and c <= b <= a
    report("6a", ok, f"s=0.8 feasible nodes for |r_c| = 0, 0.05, 0.1: {counts}, nested={c <= b <= a}", scan_time(), 300)


def test_6b_empty_region():
    result, _ = scan(0.8, 0.2, 0.0, 0.0)
    report("6b", result.n_feasible == 0, f"s=0.8 |r_c|=0.2 feasible nodes: {result.n_feasible}", scan_time(), 300)


def test_6c_tiny_region():
    result, _ = scan(0.7, 0.2, np.pi / 2, np.pi / 2)
    frac = result.n_feasible / result.total_nodes
    ok = result.n_feasible > 0 and frac < 0.01
    detail = f"s=0.7 |r_c|=0.2 theta=phi=pi/2 feasible nodes: {result.n_feasible} ({100 * frac:.3f}% of grid)"
    report("6c", ok, detail, scan_time(), 300)


def test_6d_negative_determinant():
    for args in ((0.8, 0.0, 0.0, 0.0), (0.7, 0.1, np.pi / 2, np.pi / 2), (0.3, 0.0, 0.0, 0.0), (0.5, 0.1, 1.0, 2.0)):
        scan(*args)
    nodes = np.concatenate([r.nodes for r, _ in _SCANS.values()])
    exceptions = int(np.sum(np.prod(nodes, axis=1) >= 0))
    ok = exceptions == 0 and len(nodes) > 0
    report("6d", ok, f"feasible nodes over {len(_SCANS)} scans: {len(nodes)}, det >= 0: {exceptions}", scan_time(), 300)


def werner_oracle_min(p, s):
    corr = BellLabel.PHI_PLUS.corr
    return min(min_eig(TwoQubitFano(corr=x * corr)) for x in (p, s / p))


def test_7_werner_classification():
    start = time.perf_counter()
    ps = np.linspace(-1 / 3, 1, 200)
    ss = np.linspace(0.005, 1, 200)
    mismatches = skipped = window = 0
    for p in ps:
        for s in ss:
            case = werner_feasible(p, s)
            low = werner_oracle_min(p, s)
            if abs(low) > BAND:
                mismatches += case.classification.feasible != (low > 0)
            else:
                skipped += 1
            in_window = s <= 1 / 9 and -1 / 3 <= p <= -3 * s
            window += (case.classification is WernerClass.CASE_II) != in_window
            if case.classification is WernerClass.UNCORRELATED_POINT:
                window += abs(p - np.sqrt(s)) >= 1e-12
    locus = sum(werner_feasible(np.sqrt(s), s).classification is not WernerClass.UNCORRELATED_POINT for s in ss)
    ceiling = max(fidelity_target([(0.25, s)] * 4) for s in ss if np.sqrt(s) <= 1 / 3)
    ok = mismatches == 0 and window == 0 and locus == 0 and ceiling <= 5 / 9 + 1e-12
    detail = (
        f"oracle mismatches={mismatches} (band-skipped {skipped}), case-II/locus errors={window + locus}, "
        f"max alpha for separable resource={ceiling:.12f}"
    )
    report("7", ok, detail, time.perf_counter() - start, 60)


def test_8_noise_decomposition():
    start = time.perf_counter()
    worst_ch = worst_state = 0.0
    for s in (0.2, 0.5, 0.9):
        p = build_dqtp(np.sqrt(s) * BellLabel.PHI_PLUS.diagonal, np.zeros(3), s)
        dec = decompose_perfect_plus_noise(p)
        target = depolarizing(s**0.25)
        for ch in (dec.abar, dec.a, dec.b):
            worst_ch = max(worst_ch, np.max(np.abs(ch.lam - target.lam)), np.max(np.abs(ch.v)))
        states = [(dec.resource(), p.resource)] + [(a, e.state) for a, e in zip(dec.povm_states(), p.povm)]
        for a, b in states:
            worst_state = max(worst_state, np.max(np.abs(a.density() - b.density())))
    ok = worst_ch < 1e-10 and worst_state < 1e-10
    report("8", ok, f"channel deviation {worst_ch:.1e}, state deviation {worst_state:.1e}", time.perf_counter() - start, 1)


def test_9_monte_carlo_consistency():
    start = time.perf_counter()
    p = random_protocol(np.random.default_rng(9))
    closed = avg_fidelity_closed(induced_channel(p))
    within = 0
    for seed in range(100):
        est = sphere_average(p, FIDELITY, MonteCarlo(100_000, seed=seed))
        within += abs(est.mean - closed) < 4 * est.mc_error
    report("9", within >= 99, f"runs within 4 mc_error: {within}/100", time.perf_counter() - start, 60)


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
