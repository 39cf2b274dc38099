"""Trace distance, fidelity and their averages over pure input states."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate

from .errors import NegativeVariance
from .protocol import InducedChannel, Protocol, outcome_arrays
from .states import QubitState

TRACE = "trace"
FIDELITY = "fidelity"
METRICS = (TRACE, FIDELITY)

THREADS_ENV = "QTPALIGN_THREADS"


def _bloch(x) -> np.ndarray:
    return x.t if isinstance(x, QubitState) else np.asarray(x, dtype=float)


def trace_distance(a, b):
    return 0.5 * np.linalg.norm(_bloch(a) - _bloch(b), axis=-1)


# 1 - |t|^2 below this is rounding noise of a unit vector; sqrt would amplify it to ~1e-8
PURE_ROUNDING = 1e-14


def _mixedness(t) -> np.ndarray:
    m = 1.0 - np.sum(t * t, axis=-1)
    return np.where(m < PURE_ROUNDING, 0.0, m)


def fidelity(a, b):
    """Uhlmann fidelity of two qubit states from their Bloch vectors."""
    ta, tb = _bloch(a), _bloch(b)
    mixed_a = np.sqrt(_mixedness(ta))
    mixed_b = np.sqrt(_mixedness(tb))
    return 0.5 * (1.0 + np.sum(ta * tb, axis=-1) + mixed_a * mixed_b)


def dbar_values(p: Protocol, t, metric: str) -> np.ndarray:
    """Outcome-weighted distance ``sum_m P_m D(t, t_m)`` for each row of ``t``."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    arr = outcome_arrays(p, t)
    if metric == TRACE:
        d = trace_distance(t[:, None, :], arr["t_out"])
    elif metric == FIDELITY:
        d = fidelity(t[:, None, :], arr["t_out"])
    else:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    # undefined outcomes carry zero probability, but their t_out is a placeholder
    return np.sum(np.where(arr["defined"], arr["p"] * d, 0.0), axis=1)


def dbar(p: Protocol, t, metric: str = TRACE) -> float:
    return float(dbar_values(p, _bloch(t), metric)[0])


def avg_fidelity_closed(ch: InducedChannel) -> float:
    return 0.5 * (1.0 + np.trace(ch.c) / 3.0)


def fidelity_deviation_closed(ch: InducedChannel) -> float:
    """Standard deviation of the outcome-averaged fidelity over pure inputs.

    The variance ``(1/4){[tr C^2 + (tr C)^2 + tr C C^T]/15 - (tr C / 3)^2} + |v|^2/12``
    equals ``|S|^2/30 + |v|^2/12`` with ``S`` the traceless symmetric part of
    ``C``. The second form is returned because it is exactly zero for ``C``
    proportional to the identity; the first is kept as a consistency check.
    """
    c, v = ch.c, ch.v
    tr = np.trace(c)
    var = 0.25 * ((np.trace(c @ c) + tr**2 + np.trace(c @ c.T)) / 15.0 - (tr / 3.0) ** 2)
    var += float(v @ v) / 12.0
    if var < -1e-12:
        raise NegativeVariance(f"fidelity variance {var:.3g} < 0")
    sym = 0.5 * (c + c.T) - (tr / 3.0) * np.eye(3)
    return float(np.sqrt(np.sum(sym * sym) / 30.0 + float(v @ v) / 12.0))


# ---------------------------------------------------------------------------
# samplers over the unit sphere


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 100_000
    seed: int = 0
    # fixed chunking keeps results independent of the thread count
    chunk: int = 1 << 16


@dataclass(frozen=True)
class Lebedev:
    order: int = 26


Sampler = Union[MonteCarlo, Lebedev]


@dataclass(frozen=True)
class SphereAverage:
    mean: float
    std_dev: float
    mc_error: float
    samples: int


def uniform_sphere(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


_LEBEDEV_DEGREE = {6: 3, 26: 7, 74: 13}


def lebedev_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights (summing to 1) of a Lebedev rule with 6, 26 or 74 nodes.

    The rules integrate spherical polynomials exactly up to degree 3, 7 and 13.
    """
    if order not in _LEBEDEV_DEGREE:
        raise ValueError(f"Lebedev order must be one of {sorted(_LEBEDEV_DEGREE)}")
    x, w = integrate.lebedev_rule(_LEBEDEV_DEGREE[order])
    return x.T, w / w.sum()


def _moments(values: np.ndarray) -> tuple[int, float, float]:
    n = values.size
    mean = float(values.mean())
    return n, mean, float(np.sum((values - mean) ** 2))


def _merge(a, b):
    na, ma, qa = a
    nb, mb, qb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, qa + qb + delta * delta * na * nb / n


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def integrate_sphere(f, sampler: Sampler) -> SphereAverage:
    """Mean and standard deviation of ``f`` over uniformly distributed unit vectors.

    ``f`` maps an (n, 3) array of unit vectors to n values.
    """
    if isinstance(sampler, Lebedev):
        pts, w = lebedev_rule(sampler.order)
        vals = f(pts)
        mean = float(w @ vals)
        var = float(w @ (vals - mean) ** 2)
        return SphereAverage(mean, float(np.sqrt(max(var, 0.0))), 0.0, len(pts))
    if not isinstance(sampler, MonteCarlo):
        raise TypeError(f"unknown sampler {sampler!r}")
    if sampler.n < 2:
        raise ValueError("Monte Carlo needs at least 2 samples")

    sizes = [sampler.chunk] * (sampler.n // sampler.chunk)
    if sampler.n % sampler.chunk:
        sizes.append(sampler.n % sampler.chunk)
    streams = np.random.SeedSequence(sampler.seed).spawn(len(sizes))

    def run(k: int):
        rng = np.random.default_rng(streams[k])
        return _moments(np.asarray(f(uniform_sphere(rng, sizes[k])), dtype=float))

    threads = _threads()
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    n, mean, m2 = total
    std = float(np.sqrt(m2 / (n - 1)))
    return SphereAverage(mean, std, float(std / np.sqrt(n)), n)


def sphere_average(p: Protocol, metric: str, sampler: Sampler) -> SphereAverage:
    """Average of ``dbar(p, t, metric)`` over pure inputs; ``std_dev`` is its deviation."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    return integrate_sphere(lambda t: dbar_values(p, t, metric), sampler)


def trace_fidelity_gap(p: Protocol, sampler: Sampler) -> SphereAverage:
    """Estimate of ``<Dbar_T> - (1 - <Fbar>)``.

    Both averages are taken over the same sample points, so the estimate is the
    mean of ``Dbar_T(t) - 1 + Fbar(t)``. That integrand is non-negative for every
    pure input and vanishes identically for aligned protocols.
    """

    def gap(t):
        return dbar_values(p, t, TRACE) - 1.0 + dbar_values(p, t, FIDELITY)

    return integrate_sphere(gap, sampler)
