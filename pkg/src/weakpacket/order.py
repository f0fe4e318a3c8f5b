"""Model-order selection from the rho-function and the singular values of Rx.

The rho-function at order p is the last column of Rx^-1 (normalized here
by its last element, so it reads as the reversed prediction-error filter).
An order is admissible once that profile shows two positive maxima
separated by a value that is negative or close to zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .corrmat import COND_LIMIT, _correlations_checked
from .signals import as_series

#: Separating minimum counts as "about zero" below this fraction of the max.
DEFAULT_DELTA = 0.05
#: Per-window re-selection stays within this distance of the global order.
WINDOW_CLAMP = 4


@dataclass(frozen=True)
class OrderCandidate:
    p: int
    rho_col: Optional[NDArray[np.float64]]
    singular_values: NDArray[np.float64]
    cond_estimate: float

    @property
    def invertible(self) -> bool:
        return self.rho_col is not None


@dataclass(frozen=True)
class OrderScan:
    candidates: tuple[OrderCandidate, ...]

    @property
    def max_invertible_order(self) -> Optional[int]:
        ps = [c.p for c in self.candidates if c.invertible]
        return max(ps) if ps else None

    @property
    def p_lo(self) -> int:
        return self.candidates[0].p


@dataclass(frozen=True)
class OrderSelection:
    p_opt_min: int
    p_opt_max: int
    p_opt: int
    rationale: dict = field(default_factory=dict)


def scan_orders(window, p_range: Sequence[int], cond_limit: float = COND_LIMIT) -> OrderScan:
    """Correlation pair, rho column and singular values for every p in range."""
    x = as_series(window)
    p_lo, p_hi = int(p_range[0]), int(p_range[1])
    if p_lo < 1 or p_hi < p_lo:
        raise ValueError(f"bad order range [{p_lo}, {p_hi}]")
    if 2 * p_hi >= x.size:
        raise ValueError(f"p_hi={p_hi} needs 2*p_hi < N={x.size}")
    out = []
    for p in range(p_lo, p_hi + 1):
        cp = _correlations_checked(x, p, cond_limit)
        out.append(OrderCandidate(p, cp.rho_col, cp.singular_values, cp.cond_estimate))
    return OrderScan(tuple(out))


def scan_windows(windows, p_range: Sequence[int], cond_limit: float = COND_LIMIT) -> list[OrderScan]:
    """scan_orders for a stack of equal-length windows, batched per order.

    Same contract as calling scan_orders on each row; the Gram matrices
    and eigendecompositions of all windows are computed together.
    """
    W = np.ascontiguousarray(windows, dtype=float)
    n_win, N = W.shape
    p_lo, p_hi = int(p_range[0]), int(p_range[1])
    if p_lo < 1 or p_hi < p_lo or 2 * p_hi >= N:
        raise ValueError(f"bad order range [{p_lo}, {p_hi}] for N={N}")
    per_window = [[] for _ in range(n_win)]
    st = W.strides
    for p in range(p_lo, p_hi + 1):
        m = N - p
        S0 = np.lib.stride_tricks.as_strided(W, shape=(n_win, p, m), strides=(st[0], st[1], st[1]),
                                             writeable=False)
        R = S0 @ S0.transpose(0, 2, 1) / m
        R = 0.5 * (R + R.transpose(0, 2, 1))
        ev, vec = np.linalg.eigh(R)
        for k in range(n_win):
            e = ev[k]
            cond = float(e[-1] / e[0]) if e[0] > 0 and e[-1] > 0 else np.inf
            rho = None
            if cond <= cond_limit:
                # last column of the inverse
                rho = (vec[k] / e) @ vec[k][-1]
            per_window[k].append(OrderCandidate(p, rho, np.sort(np.abs(e))[::-1], cond))
    return [OrderScan(tuple(c)) for c in per_window]


def rho_profile(rho) -> NDArray[np.float64]:
    """rho normalized by its last element, then 3-point median smoothed.

    Endpoints are kept unsmoothed so the last element stays at 1.
    """
    r = np.asarray(rho, dtype=float) / rho[-1]
    s = r.copy()
    if r.size < 3:
        return s
    a, b, c = r[:-2], r[1:-1], r[2:]
    s[1:-1] = np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))
    return s


def _local_maxima(s: NDArray) -> list[int]:
    """Strict maxima of a profile, counting a flat top as one maximum.

    Median smoothing leaves peaks as runs of equal values; a run counts
    when the samples on both sides (where present) are strictly lower.
    The reported index is the middle of the run (rounded down).
    """
    n = s.size
    if n == 1:
        return [0]
    starts = np.r_[0, np.flatnonzero(np.diff(s) != 0) + 1]
    ends = np.r_[starts[1:], n] - 1
    vals = s[starts]
    left = np.r_[-np.inf, vals[:-1]]
    right = np.r_[vals[1:], -np.inf]
    keep = (vals > left) & (vals > right)
    if starts.size == 1:
        keep[:] = False  # constant profile
    return ((starts[keep] + ends[keep]) // 2).tolist()


def two_maxima_pattern(rho, delta: float = DEFAULT_DELTA) -> Optional[tuple[int, int]]:
    """Find two positive maxima separated by a dip at or below delta*max.

    A maximum is "positive" when it clears the about-zero band, i.e. is
    larger than ``delta`` times the global maximum. Returns the pair of
    indices (first, second) with the second one nearest to the last
    element, or None.
    """
    if rho is None or not rho[-1] > 0:
        return None
    s = rho_profile(rho)
    top = s.max()
    if top <= 0:
        return None
    band = delta * top
    peaks = [i for i in _local_maxima(s) if s[i] > band]
    best = None
    for j in range(len(peaks) - 1):
        i0, i1 = peaks[j], peaks[j + 1]
        if s[i0:i1 + 1].min() <= band:
            best = (i0, i1)
    return best


def svd_dip(singular_values) -> int:
    """Index k (1-based count of leading values) of the largest s_k/s_{k+1}."""
    sv = np.asarray(singular_values, dtype=float)
    tiny = np.finfo(float).tiny
    ratios = np.log(np.maximum(sv[:-1], tiny)) - np.log(np.maximum(sv[1:], tiny))
    return int(np.argmax(ratios)) + 1


def select_order(scan: OrderScan, delta: float = DEFAULT_DELTA) -> OrderSelection:
    """Minimum and maximum admissible orders from the scan.

    p_opt_min is the smallest order showing the two-maxima pattern;
    p_opt_max is the largest order whose second maximum sits within one
    position of the biggest SVD dip (p_opt_min when none does). p_opt is
    the minimum.
    """
    valid = [c for c in scan.candidates if c.invertible]
    if not valid:
        raise ValueError("no candidate order has an invertible correlation matrix")
    patterned = []
    aligned = []
    for c in valid:
        pat = two_maxima_pattern(c.rho_col, delta)
        if pat is None:
            continue
        patterned.append(c.p)
        # positions are 1-based counts from the start of the profile
        dip = svd_dip(c.singular_values)
        if abs((pat[1] + 1) - dip) <= 1:
            aligned.append(c.p)
    if not patterned:
        p = scan.p_lo
        return OrderSelection(p, p, p, {"rule": "fallback", "reason": "single-maximum profile",
                                       "max_invertible_order": scan.max_invertible_order})
    p_min = patterned[0]
    p_max = aligned[-1] if aligned and aligned[-1] >= p_min else p_min
    return OrderSelection(p_min, p_max, p_min, {
        "rule": "two-maxima",
        "delta": delta,
        "patterned_orders": patterned,
        "svd_aligned_orders": aligned,
        "max_invertible_order": scan.max_invertible_order,
    })


def global_order(record, p_range: Sequence[int] = (4, 32), delta: float = DEFAULT_DELTA) -> OrderSelection:
    """First stage: one averaged order for the whole record."""
    x = as_series(record)
    hi = min(int(p_range[1]), (x.size - 1) // 2)
    return select_order(scan_orders(x, (int(p_range[0]), hi)), delta)


def _window_range(N: int, p_global: int, clamp: int) -> tuple[int, int]:
    lo = max(1, p_global - clamp)
    hi = min(p_global + clamp, (N - 1) // 2)
    return lo, hi


def _pick_from_scan(scan: OrderScan, p_global: int, lo: int, hi: int, delta: float) -> int:
    if not any(c.invertible for c in scan.candidates):
        return min(max(p_global, lo), hi)
    sel = select_order(scan, delta)
    if sel.rationale["rule"] == "fallback":
        return min(max(p_global, lo), hi)
    return sel.p_opt


def window_order(window, p_global: int, clamp: int = WINDOW_CLAMP, delta: float = DEFAULT_DELTA) -> int:
    """Second stage: re-select within +-clamp of the global order on one window.

    Falls back to the global order (clipped to the window) when no order
    in the clamp shows the two-maxima pattern.
    """
    x = as_series(window)
    lo, hi = _window_range(x.size, p_global, clamp)
    if hi < lo:
        return max(1, min(p_global, (x.size - 1) // 2))
    return _pick_from_scan(scan_orders(x, (lo, hi)), p_global, lo, hi, delta)


def window_orders(windows, p_global: int, clamp: int = WINDOW_CLAMP, delta: float = DEFAULT_DELTA) -> list[int]:
    """window_order for every row of a stack of equal-length windows."""
    W = np.asarray(windows, dtype=float)
    lo, hi = _window_range(W.shape[1], p_global, clamp)
    if hi < lo:
        return [max(1, min(p_global, (W.shape[1] - 1) // 2))] * W.shape[0]
    return [_pick_from_scan(s, p_global, lo, hi, delta) for s in scan_windows(W, (lo, hi))]
