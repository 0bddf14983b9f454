"""Critical-regime quantities at H = 1 - 1/(2q): exact Var(S_n), the exact
1 - A_{q-1}(n) term, the per-path Malliavin energy q^{-1}||DS_n||^2, and the
Monte Carlo Berry-type bound 2 sqrt(E(1 - q^{-1}||DS_n||^2)^2).

The per-path scalar uses the reduction of the order-(q-1) integral of an
indicator power to n^{-(q-1)H} H_{q-1}(xi), so that

    q^{-1}||DS_n||^2 = (q / (sigma^2 n log n)) sum_{k,l} H_{q-1}(xi_k) H_{q-1}(xi_l) rho(k-l).

Its expectation equals Var(S_n) (chaos identity), which the tests pin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import matmul_toeplitz

from .fgn import FgnPath, Hurst, Seed, rho, sample_fgn_chunks
from .hermite import check_order, hermite_eval
from .variations import sigma_critical


@dataclass(frozen=True)
class CriticalSpec:
    """Order q with the Hurst index pinned to the threshold 1 - 1/(2q)."""

    q: int
    h: Hurst = field(init=False)
    sigma2: float = field(init=False)

    def __post_init__(self):
        check_order(self.q)
        object.__setattr__(self, "h", Hurst(1.0 - 1.0 / (2 * self.q)))
        object.__setattr__(self, "sigma2", sigma_critical(self.q) ** 2)


@dataclass
class BoundEstimate:
    """Monte Carlo estimate of the Berry-type total-variation bound at one n."""

    n: int
    mean_sq: float
    se: float
    tv_bound: float
    batch: int
    seed: Seed

    def to_json(self, q: int | None = None) -> dict:
        out = {
            "n": self.n,
            "batch": self.batch,
            "seed": self.seed.value,
            "stream": self.seed.stream_id,
            "mean_sq": self.mean_sq,
            "se": self.se,
            "tv_bound": self.tv_bound,
        }
        if q is not None:
            out = {"q": q, **out}
        return out


def _lag_sums(spec: CriticalSpec, n: int) -> tuple[float, float]:
    """(sum_{|r|<n} rho^q, sum_{|r|<n} |r| rho^q)."""
    r = np.arange(1, n)
    rq = rho(spec.h, r) ** spec.q
    return 1.0 + 2.0 * float(np.sum(rq)), 2.0 * float(np.sum(r * rq))


def variance_sn(spec: CriticalSpec, n: int) -> float:
    """Exact Var(S_n) = q!/(sigma^2 n log n) sum_{k,l<n} rho^q(k-l), O(n) via lags.

    Tends to 1 as n grows, at logarithmic speed.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    plain, weighted = _lag_sums(spec, n)
    lag_sum = n * plain - weighted
    return math.factorial(spec.q) * lag_sum / (spec.sigma2 * n * math.log(n))


def one_minus_a_top(spec: CriticalSpec, n: int) -> float:
    """1 - A_{q-1}(n), the deterministic top-order deficit, by its lag display.

    1 - q!/(sigma^2 log n) sum_{|r|<n} rho^q + q!/(sigma^2 n log n) sum |r| rho^q;
    algebraically identical to 1 - variance_sn and O(1/log n).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    plain, weighted = _lag_sums(spec, n)
    fac = math.factorial(spec.q)
    return (
        1.0
        - fac * plain / (spec.sigma2 * math.log(n))
        + fac * weighted / (spec.sigma2 * n * math.log(n))
    )


def _ds_batch(spec: CriticalSpec, xi: np.ndarray) -> np.ndarray:
    """q^{-1}||DS_n||^2 per column of an (n, batch) increment matrix."""
    n = xi.shape[0]
    w = hermite_eval(spec.q - 1, xi)
    if w.ndim == 1:
        w = w[:, None]
    col = rho(spec.h, np.arange(n))
    tw = matmul_toeplitz((col, col), w)
    quad = np.sum(w * tw, axis=0)
    return spec.q * quad / (spec.sigma2 * n * math.log(n))


def ds_norm_sq(spec: CriticalSpec, path: FgnPath) -> float:
    """Per-path Malliavin energy q^{-1}||DS_n||^2 (no positivity clamp).

    Toeplitz quadratic form in H_{q-1}(xi); the path's Hurst index must match
    the critical spec exactly.
    """
    if path.h.value != spec.h.value:
        raise ValueError(
            f"Hurst mismatch: spec is critical at H={spec.h.value}, path has H={path.h.value}"
        )
    if path.n < 2:
        raise ValueError(f"path resolution must be >= 2, got {path.n}")
    return float(_ds_batch(spec, path.xi[:, None])[0])


def berry_estimate(
    spec: CriticalSpec,
    n: int,
    batch: int,
    seed: Seed,
    antithetic: bool = False,
    xi_batch: np.ndarray | None = None,
) -> BoundEstimate:
    """Monte Carlo Berry-type bound: tv_bound = 2 sqrt(mean of (1 - q^{-1}||DS_n||^2)^2).

    Deterministic given the seed.  ``antithetic`` pairs each path with its
    negation (batch must be even; the seed stream is unchanged).  ``xi_batch``
    is a test hook: an (n, batch) increment matrix that bypasses sampling.
    """
    if xi_batch is not None:
        vals = _ds_batch(spec, np.asarray(xi_batch, dtype=float))
        n = int(xi_batch.shape[0])
        batch = int(xi_batch.shape[1])
    else:
        if batch < 100:
            raise ValueError(f"batch must be >= 100, got {batch}")
        if n < 2:
            raise ValueError(f"n must be >= 2, got {n}")
        if antithetic and batch % 2 != 0:
            raise ValueError(f"antithetic pairing needs an even batch, got {batch}")
        draw = batch // 2 if antithetic else batch
        parts = []
        for xi in sample_fgn_chunks(spec.h, n, draw, seed):
            parts.append(_ds_batch(spec, xi))
            if antithetic:
                parts.append(_ds_batch(spec, -xi))
        vals = np.concatenate(parts)
    t = (1.0 - vals) ** 2
    mean_sq = float(np.mean(t))
    se = float(np.std(t, ddof=1) / math.sqrt(t.size)) if t.size > 1 else 0.0
    return BoundEstimate(
        n=n,
        mean_sq=mean_sq,
        se=se,
        tv_bound=2.0 * math.sqrt(max(mean_sq, 0.0)),
        batch=batch,
        seed=seed,
    )
