"""Linear-prediction models extracted from the correlation pair.

Sign convention throughout: the characteristic polynomial is
``z**p + a[0] z**(p-1) + ... + a[p-1]`` so that ``a[i-1]`` is a_i in
``x_n = -sum_i a_i x_{n-i} + xi_n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .corrmat import CorrelationPair

#: Symmetric-system condition number above which lstsq replaces solve.
SYMMETRIC_COND_LIMIT = 1e10


class ModelError(ValueError):
    """Raised when a model cannot be formed from the correlation pair."""


@dataclass(frozen=True)
class ARModel:
    p: int
    a: NDArray[np.float64]
    sigma2_xi: float
    valid: bool = True
    symmetric: bool = False
    flags: tuple[str, ...] = field(default=())

    @property
    def operator(self) -> "FrobeniusOperator":
        return FrobeniusOperator(self.a)

    @property
    def polynomial(self) -> NDArray[np.float64]:
        """Coefficients [1, a_1, ..., a_p], highest power first."""
        return np.r_[1.0, self.a]

    def roots(self) -> NDArray[np.complex128]:
        return char_roots(self.operator)


@dataclass(frozen=True)
class FrobeniusOperator:
    """Companion (shift) operator of the LP model.

    Row i < p-1 of the matrix is the unit vector e_{i+1}; the last row is
    ``[-a_p, ..., -a_1]``.
    """
    coeffs: NDArray[np.float64]

    @property
    def p(self) -> int:
        return len(self.coeffs)

    def matrix(self) -> NDArray[np.float64]:
        p = self.p
        K = np.eye(p, k=1)
        K[-1, :] = -np.asarray(self.coeffs)[::-1]
        return K

    def apply(self, v):
        """K @ v without forming K."""
        v = np.asarray(v)
        out = np.empty_like(v, dtype=np.result_type(v, float))
        out[:-1] = v[1:]
        out[-1] = -np.dot(np.asarray(self.coeffs)[::-1], v)
        return out

    def apply_transpose(self, v):
        """K.T @ v; used to form rows h^T K^m."""
        v = np.asarray(v)
        out = np.zeros_like(v, dtype=np.result_type(v, float))
        out[1:] = v[:-1]
        out -= v[-1] * np.asarray(self.coeffs)[::-1]
        return out


def char_roots(op: FrobeniusOperator) -> NDArray[np.complex128]:
    """Eigenvalues of the companion matrix, i.e. characteristic roots."""
    if op.p == 0:
        return np.empty(0, dtype=complex)
    return np.linalg.eigvals(op.matrix()).astype(complex)


def estimate_lp(cp: CorrelationPair) -> ARModel:
    """LP coefficients and noise dispersion from the last column of Rx^-1.

    a_i = rho[p-1-i] / rho[p-1] for i < p, a_p = 0, sigma2 = 1 / rho[p-1].
    A non-positive rho[p-1] yields a model with ``valid=False``.
    """
    if cp.rho_col is None:
        raise ModelError(f"Rx is not invertible at p={cp.p} (cond={cp.cond_estimate:.3g})")
    rho = cp.rho_col
    p = rho.size
    last = rho[-1]
    if not last > 0:
        return ARModel(p, np.zeros(p), np.nan, valid=False, flags=("rho_last_nonpositive",))
    a = np.zeros(p)
    a[: p - 1] = rho[p - 2::-1] / last if p > 1 else []
    return ARModel(p, a, float(1.0 / last))


def normal_equation_residual(cp: CorrelationPair, model: ARModel) -> float:
    """Relative residual of Rx [a_{p-1}, ..., a_1, 1]^T = [0, ..., 0, sigma2]^T."""
    p = model.p
    b = np.r_[model.a[p - 2::-1] if p > 1 else [], 1.0]
    target = np.zeros(p)
    target[-1] = model.sigma2_xi
    lhs = cp.Rx @ b
    scale = max(np.abs(cp.Rx).max() * np.abs(b).max(), abs(model.sigma2_xi))
    return float(np.abs(lhs - target).max() / scale)


def estimate_lp_symmetric(cp: CorrelationPair, lag_source: str = "data") -> ARModel:
    """Self-reciprocal LP polynomial for an even order p.

    Solves for the free coefficients a_1..a_{p/2} of
    ``z**p + a_1 z**(p-1) + ... + a_1 z + 1`` (a_{p-i} = a_i, a_p = 1).
    Each pair of rows k and p-k of the prediction normal equations is
    folded together. Correlations against the sample p steps ahead are
    not in Rx: ``lag_source="data"`` reads them from Rx' (which holds
    them exactly), ``"extrapolated"`` predicts them with the unconstrained
    predictor Rx^-1 e_{p-1}, using Rx alone.
    """
    p = cp.p
    if p % 2:
        raise ModelError(f"symmetric estimator needs even p, got {p}")
    if p < 2:
        raise ModelError("symmetric estimator needs p >= 2")
    if cp.rho_col is None:
        raise ModelError(f"Rx is not invertible at p={p} (cond={cp.cond_estimate:.3g})")
    r = cp.Rx
    rho = cp.rho_col
    q = p // 2
    if not rho[-1] > 0:
        flags = ["rho_last_nonpositive"]
    else:
        flags = []
    b = rho[:-1] / rho[-1]  # b[i] multiplies lag i+1 in the extrapolation

    if lag_source == "data":
        def lag_p(k):
            # Rx'[i, j] pairs samples i+1 and j+1
            return cp.Rxp[k - 1, p - 1]
    elif lag_source == "extrapolated":
        def lag_p(k):
            return -np.dot(b, r[k, 1:p])
    else:
        raise ValueError(f"unknown lag_source {lag_source!r}")

    M = np.zeros((q, q))
    rhs = np.zeros(q)
    for k in range(1, q):
        for i in range(1, q):
            M[k - 1, i - 1] = r[k, i] + r[k, p - i] + r[p - k, i] + r[p - k, p - i]
        M[k - 1, q - 1] = r[k, q] + r[p - k, q]
        rhs[k - 1] = -lag_p(k) - lag_p(p - k) - r[0, k] - r[0, p - k]
    for i in range(1, q):
        M[q - 1, i - 1] = r[q, i] + r[i, q] + r[p - i, q] + r[q, p - i]
    M[q - 1, q - 1] = 2 * r[q, q]
    rhs[q - 1] = -2 * lag_p(q) - r[q, 0] - r[0, q]

    cond = np.linalg.cond(M)
    if np.isfinite(cond) and cond <= SYMMETRIC_COND_LIMIT:
        free = np.linalg.solve(M, rhs)
    else:
        free = np.linalg.lstsq(M, rhs, rcond=None)[0]
        flags.append("symmetric_system_ill_conditioned")
    a = np.empty(p)
    a[:q] = free
    a[q:p - 1] = free[q - 2::-1] if q > 1 else []
    a[p - 1] = 1.0
    sigma2 = float(1.0 / rho[-1]) if rho[-1] > 0 else np.nan
    return ARModel(p, a, sigma2, valid=rho[-1] > 0, symmetric=True, flags=tuple(flags))
