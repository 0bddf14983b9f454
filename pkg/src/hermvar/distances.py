"""Empirical distribution distances, coupled L2 error estimation, and
log-log rate fitting.

The total-variation distance itself is not estimable from samples without
density assumptions; the Kolmogorov-Smirnov statistic (a lower bound, since
d_K <= d_TV) and the order-1 Wasserstein distance serve as proxies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .fgn import Seed, aggregate_matrix, as_hurst, sample_fgn_chunks
from .hermite import hermite_eval
from .variations import Regime, RegimeSpec


@dataclass
class SampleSet:
    """A batch of statistic values plus the metadata that produced it."""

    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError("SampleSet must be nonempty")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("SampleSet entries must be finite")


@dataclass
class RateFit:
    """Ordinary least squares on (log n, log y) with residual diagnostics."""

    slope: float
    intercept: float
    r2: float
    stderr_slope: float
    points: list[tuple[float, float]]

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "stderr_slope": self.stderr_slope,
        }


def ks_distance(s: SampleSet, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a reference CDF.

    sup over the sorted sample of |F_emp - cdf|, taking both one-sided gaps
    at each point; value in [0, 1].
    """
    x = np.sort(s.values)
    m = x.size
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except TypeError:
        f = np.array([cdf(v) for v in x], dtype=float)
    grid = np.arange(1, m + 1) / m
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / m))
    return float(max(d_plus, d_minus, 0.0))


def ks_distance_two_sample(s: SampleSet, t: SampleSet) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_s - F_t|."""
    xs = np.sort(s.values)
    xt = np.sort(t.values)
    grid = np.concatenate([xs, xt])
    f_s = np.searchsorted(xs, grid, side="right") / xs.size
    f_t = np.searchsorted(xt, grid, side="right") / xt.size
    return float(np.max(np.abs(f_s - f_t)))


def wasserstein1(s: SampleSet, t: SampleSet) -> float:
    """Order-1 Wasserstein distance via the quantile coupling of equal-size samples."""
    if s.values.size != t.values.size:
        raise ValueError(
            f"size mismatch: {s.values.size} vs {t.values.size} (quantile coupling needs equal sizes)"
        )
    return float(np.mean(np.abs(np.sort(s.values) - np.sort(t.values))))


def coupled_l2(q: int, h, n: int, N: int, batch: int, seed: Seed, method: str = "auto"):
    """Monte Carlo estimate (mean, se) of E|S_n - S_N|^2 by coupling.

    One fine path at resolution N is aggregated to n so both statistics are
    computed from the same underlying fBm.  Unbiased; deterministic given the
    seed; supercritical regime only.
    """
    h = as_hurst(h)
    spec = RegimeSpec.classify(q, h)
    if spec.regime is not Regime.SUPERCRITICAL:
        raise ValueError(
            f"coupled estimation requires the supercritical regime, got {spec.regime.value}"
        )
    if n < 1 or N % n != 0:
        raise ValueError(f"n must divide N: got n={n}, N={N}")
    if batch < 1:
        raise ValueError(f"batch must be >= 1, got {batch}")
    H = h.value
    m = N // n
    expo = q * (1.0 - H) - 1.0
    d2 = np.empty(batch)
    i = 0
    for xi in sample_fgn_chunks(h, N, batch, seed, method):
        c = xi.shape[1]
        s_fine = float(N) ** expo * hermite_eval(q, xi).sum(axis=0)
        coarse = aggregate_matrix(xi, h, m)
        s_coarse = float(n) ** expo * hermite_eval(q, coarse).sum(axis=0)
        d2[i : i + c] = (s_coarse - s_fine) ** 2
        i += c
    mean = float(np.mean(d2))
    se = float(np.std(d2, ddof=1) / math.sqrt(batch)) if batch > 1 else 0.0
    return mean, se


def rate_fit(points) -> RateFit:
    """Least-squares slope/intercept of log y against log n over >= 3 points."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError(f"rate fit needs at least 3 points, got {len(pts)}")
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(n <= 0):
        raise ValueError("abscissas must be positive")
    if np.any(y <= 0):
        raise ValueError("rate fit needs y > 0 (log-log regression)")
    ln, ly = np.log(n), np.log(y)
    res = linregress(ln, ly)
    return RateFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        r2=float(res.rvalue) ** 2,
        stderr_slope=float(res.stderr),
        points=list(zip(ln.tolist(), ly.tolist())),
    )
