"""Probabilists' Hermite polynomials H_q and vectorized transforms.

H_0 = 1, H_1 = x, H_{k+1}(x) = x H_k(x) - k H_{k-1}(x).  The recurrence is
numerically stable where the Rodrigues-type definition is not; the two agree
analytically.  H_q of a standard normal has mean 0 and variance q!.
"""

from __future__ import annotations

import numpy as np

from .fgn import FgnPath

# Orders above this grow coefficients catastrophically at desk scale.
MAX_ORDER = 16


def check_order(q: int) -> int:
    """Validate a Hermite variation order: integer with 2 <= q <= MAX_ORDER."""
    if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
        raise ValueError(f"order must be an integer, got {q!r}")
    if not (2 <= q <= MAX_ORDER):
        raise ValueError(f"order must satisfy 2 <= q <= {MAX_ORDER}, got {q}")
    return int(q)


def hermite_eval(q: int, x):
    """Evaluate H_q(x) by the three-term recurrence.

    q >= 0; scalar or array x.  Exact up to floating round-off.
    """
    if not isinstance(q, (int, np.integer)) or isinstance(q, bool) or q < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {q!r}")
    xa = np.asarray(x, dtype=float)
    if q == 0:
        out = np.ones_like(xa)
    elif q == 1:
        out = xa.copy()
    else:
        prev = np.ones_like(xa)
        cur = xa.copy()
        for k in range(1, q):
            prev, cur = cur, xa * cur - k * prev
        out = cur
    return float(out) if np.ndim(x) == 0 else out


def hermite_transform(q: int, path: FgnPath) -> np.ndarray:
    """Element-wise H_q over path.xi (same length as the path)."""
    check_order(q)
    return hermite_eval(q, path.xi)
