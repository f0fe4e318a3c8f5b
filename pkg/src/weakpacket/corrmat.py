"""Shifted Hankel data matrices and the correlation-matrix pair."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import as_strided
from numpy.typing import NDArray

from .signals import as_series

#: Correlation matrices above this condition number are not inverted.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class DataMatrices:
    S0: NDArray[np.float64]
    S1: NDArray[np.float64]

    @property
    def p(self) -> int:
        return self.S0.shape[0]

    @property
    def N(self) -> int:
        return self.S0.shape[0] + self.S0.shape[1]


@dataclass(frozen=True)
class CorrelationPair:
    Rx: NDArray[np.float64]
    Rxp: NDArray[np.float64]
    RxInv: Optional[NDArray[np.float64]]
    rho_col: Optional[NDArray[np.float64]]
    cond_estimate: float
    singular_values: Optional[NDArray[np.float64]] = None

    @property
    def p(self) -> int:
        return self.Rx.shape[0]

    @property
    def invertible(self) -> bool:
        return self.RxInv is not None


def build_data_matrices(window, p: int) -> DataMatrices:
    """S0[i, k] = x[i+k] and S1[i, k] = x[i+k+1] for k < N - p.

    Both are read-only strided views into the window's samples.
    """
    x = as_series(window)
    N = x.size
    if p < 1:
        raise ValueError(f"order must be >= 1, got {p}")
    if 2 * p >= N:
        raise ValueError(f"order p={p} needs 2p < N (N={N})")
    return _data_matrices(x, p)


def _data_matrices(x: NDArray[np.float64], p: int) -> DataMatrices:
    m = x.size - p
    # rows 0..p-1 are S0, rows 1..p are S1
    H = as_strided(x, shape=(p + 1, m), strides=(x.strides[0], x.strides[0]), writeable=False)
    return DataMatrices(H[:p], H[1:])


def estimate_correlations(dm: DataMatrices, cond_limit: float = COND_LIMIT) -> CorrelationPair:
    """Rx = S0 S0^T / (N-p), Rx' = S1 S1^T / (N-p), plus the inverse of Rx.

    Rx is factored once by a symmetric eigendecomposition, which yields the
    condition number and the inverse together. Near-singular Rx is reported
    (``RxInv`` and ``rho_col`` left as None) rather than regularized; order
    scanning depends on seeing it.
    """
    m = dm.S0.shape[1]
    Rx = dm.S0 @ dm.S0.T / m
    Rxp = dm.S1 @ dm.S1.T / m
    Rx = 0.5 * (Rx + Rx.T)
    Rxp = 0.5 * (Rxp + Rxp.T)
    ev, vec = np.linalg.eigh(Rx)
    if ev[-1] <= 0 or ev[0] <= 0:
        cond = np.inf
    else:
        cond = float(ev[-1] / ev[0])
    inv = rho = None
    if cond <= cond_limit:
        inv = (vec / ev) @ vec.T
        inv = 0.5 * (inv + inv.T)
        rho = inv[:, -1].copy()
    return CorrelationPair(Rx, Rxp, inv, rho, cond, np.sort(np.abs(ev))[::-1])


def correlations(window, p: int, cond_limit: float = COND_LIMIT) -> CorrelationPair:
    return estimate_correlations(build_data_matrices(window, p), cond_limit)


def _correlations_checked(x: NDArray[np.float64], p: int, cond_limit: float = COND_LIMIT) -> CorrelationPair:
    # x already validated by the caller; order bounds still enforced
    if p < 1 or 2 * p >= x.size:
        raise ValueError(f"order p={p} needs 1 <= p and 2p < N (N={x.size})")
    return estimate_correlations(_data_matrices(x, p), cond_limit)


def averaged_r0_r1(cp: CorrelationPair) -> tuple[float, float]:
    """Diagonal and first-superdiagonal averages of Rx.

    r1 includes the wrap-around element Rx[p-1, 0], so for p == 1 it
    reduces to Rx[0, 0].
    """
    R = cp.Rx
    p = R.shape[0]
    r0 = np.trace(R) / p
    r1 = (np.trace(R, offset=1) + R[p - 1, 0]) / p
    return float(r0), float(r1)
