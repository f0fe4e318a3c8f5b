"""Forming-filter amplitude spectra and time-frequency peak tracking."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .armodel import ARModel, ModelError, estimate_lp, estimate_lp_symmetric
from .corrmat import correlations
from .detect import DetectorConfig, SegmentSet
from .signals import as_series

DEFAULT_GRID = 1024
#: Peaks below this fraction of a window's maximum are not tracked.
PEAK_FRACTION = 0.5


@dataclass(frozen=True)
class FormingFilter:
    h: NDArray[np.float64]
    model: ARModel
    residual: float
    rank: int
    flags: tuple[str, ...] = ()

    @property
    def p(self) -> int:
        return self.model.p


@dataclass(frozen=True)
class SpectrumEstimate:
    freqs: NDArray[np.float64]
    amplitude: NDArray[np.float64]
    flags: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def amplitude_db(self) -> NDArray[np.float64]:
        with np.errstate(divide="ignore"):
            return 20 * np.log10(self.amplitude)

    @property
    def one_sided(self) -> NDArray[np.float64]:
        """Amplitude of a real sinusoid: conjugate pair folded onto f > 0."""
        out = 2 * self.amplitude
        edge = (self.freqs <= 0) | (self.freqs >= 0.5)
        out[edge] = self.amplitude[edge]
        return out

    def peaks(self, fraction: float = 0.0) -> list[tuple[float, float]]:
        """Local maxima (interior and edge) at or above fraction*max."""
        A = self.amplitude
        idx = local_maxima(A)
        floor = fraction * A.max()
        return [(float(self.freqs[i]), float(A[i])) for i in idx if A[i] >= floor]


@dataclass(frozen=True)
class Spectrogram:
    times: NDArray[np.int64]
    peaks: tuple[tuple[tuple[float, float], ...], ...]

    def points(self) -> NDArray[np.float64]:
        """(time, frequency, amplitude) rows, one per peak."""
        rows = [(t, f, a) for t, pk in zip(self.times, self.peaks) for f, a in pk]
        return np.array(rows, dtype=float).reshape(-1, 3)


def local_maxima(a) -> NDArray[np.int64]:
    a = np.asarray(a)
    if a.size < 2:
        return np.arange(a.size)
    left = np.r_[-np.inf, a[:-1]]
    right = np.r_[a[1:], -np.inf]
    return np.flatnonzero((a > left) & (a >= right))


def trace_powers(model: ARModel, count: int) -> NDArray[np.float64]:
    """v_n = tr(K^n) = sum of n-th powers of the roots, n = 0..count.

    Newton's identities on the polynomial coefficients; no eigensolve.
    """
    a = np.asarray(model.a, dtype=float)
    p = a.size
    v = np.zeros(count + 1)
    v[0] = p
    for n in range(1, count + 1):
        m = min(n - 1, p)
        acc = np.dot(a[:m], v[n - 1:n - 1 - m:-1]) if m else 0.0
        if n <= p:
            acc += n * a[n - 1]
        v[n] = -acc
    return v


def power_matrix(model: ARModel, n_cols: int) -> NDArray[np.float64]:
    """V[i, k] = v_{i+k}, shape (p, n_cols)."""
    p = model.p
    v = trace_powers(model, p + n_cols - 2)
    return np.lib.stride_tricks.sliding_window_view(v, n_cols)[:p].copy()


def build_forming_filter(segment, model: ARModel, rcond: Optional[float] = None) -> FormingFilter:
    """Least-squares pulse response h with x^T = h^T V.

    Uses x_0..x_{N-p} against the p x (N-p+1) matrix of trace powers.
    ``rcond`` follows numpy's lstsq default (max-dim * eps) when None.
    """
    x = as_series(segment)
    p = model.p
    N = x.size
    if N <= p:
        raise ValueError(f"segment length {N} must exceed order {p}")
    n_cols = N - p + 1
    V = power_matrix(model, n_cols)
    target = x[:n_cols]
    h, _, rank, _ = np.linalg.lstsq(V.T, target, rcond=rcond)
    norm = np.linalg.norm(target)
    resid = float(np.linalg.norm(target - h @ V) / norm) if norm > 0 else 0.0
    flags = ("rank_deficient",) if rank < p else ()
    return FormingFilter(h, model, resid, int(rank), flags)


def filter_operator(ff: FormingFilter) -> NDArray[np.float64]:
    """Rows h^T K^m for m = 0..p-1."""
    op = ff.model.operator
    p = ff.p
    L = np.empty((p, p))
    row = np.asarray(ff.h, dtype=float)
    for m in range(p):
        L[m] = row
        row = op.apply_transpose(row)
    return L


def steering(freqs, p: int) -> NDArray[np.complex128]:
    """Unit-norm columns e(f) = p^-1/2 exp(2 pi j f k), k = 0..p-1."""
    k = np.arange(p)[:, None]
    return np.exp(2j * np.pi * k * np.asarray(freqs)[None, :]) / np.sqrt(p)


def amplitude_spectrum(ff: FormingFilter, grid_size: int = DEFAULT_GRID) -> SpectrumEstimate:
    """A(f) = 1 / |L(h)^-1 e(f)| on a uniform grid over [0, 0.5]."""
    freqs = np.linspace(0.0, 0.5, grid_size)
    L = filter_operator(ff)
    E = steering(freqs, ff.p)
    flags = list(ff.flags)
    cond = np.linalg.cond(L)
    if np.isfinite(cond) and cond < 1.0 / np.finfo(float).eps:
        y = np.linalg.solve(L, E)
    else:
        y = np.linalg.lstsq(L, E, rcond=None)[0]
        flags.append("operator_singular")
    norm = np.linalg.norm(y, axis=0)
    with np.errstate(divide="ignore"):
        A = 1.0 / norm
    return SpectrumEstimate(freqs, A, tuple(flags), {"cond_L": float(cond)})


def fit_model(x, p: int, symmetric: bool = False) -> ARModel:
    cp = correlations(x, p)
    if symmetric and p % 2 == 0:
        return estimate_lp_symmetric(cp)
    return estimate_lp(cp)


def segment_spectrum(x, p: int, symmetric: bool = False, grid_size: int = DEFAULT_GRID) -> SpectrumEstimate:
    model = fit_model(x, p, symmetric)
    ff = build_forming_filter(x, model)
    spec = amplitude_spectrum(ff, grid_size)
    spec.meta.update(estimator="symmetric" if model.symmetric else "unconstrained", p=p,
                     residual=ff.residual, rank=ff.rank)
    return spec


def localized_analysis(record, segments: SegmentSet, p: int, symmetric: bool = False,
                       grid_size: int = DEFAULT_GRID) -> list[SpectrumEstimate]:
    """HOAR spectrum of every located segment.

    Segments shorter than 2p + 1 samples are skipped; their index is listed
    in the ``skipped`` entry of the first returned estimate's metadata.
    """
    x = as_series(record)
    out = []
    skipped = []
    for k, seg in enumerate(segments):
        data = x[seg.start:seg.end]
        if data.size <= 2 * p:
            skipped.append(k)
            continue
        try:
            spec = segment_spectrum(data, p, symmetric, grid_size)
        except ModelError:
            skipped.append(k)
            continue
        spec.meta.update(segment=k, start=seg.start, end=seg.end)
        out.append(spec)
    if out and skipped:
        out[0].meta["skipped"] = skipped
    return out


def track_peaks(record, cfg: DetectorConfig, p: int, symmetric: bool = True,
                fraction: float = PEAK_FRACTION, grid_size: int = DEFAULT_GRID) -> Spectrogram:
    """Spectral peaks of every sliding window above ``fraction`` of its max."""
    x = as_series(record)
    N = cfg.window_len
    offsets = np.arange(0, x.size - N + 1, cfg.step)
    peaks = []
    for off in offsets:
        try:
            spec = segment_spectrum(x[off:off + N], p, symmetric, grid_size)
        except (ModelError, ValueError):
            peaks.append(())
            continue
        peaks.append(tuple(spec.peaks(fraction)))
    return Spectrogram(offsets + N // 2, tuple(peaks))


def peak_excess_db(spec: SpectrumEstimate, f_true: float, tol: float) -> tuple[float, float]:
    """(peak frequency, dB excess of the peak over the largest other maximum).

    The peak is the largest local maximum within ``tol`` of ``f_true``.
    """
    idx = local_maxima(spec.amplitude)
    near = [i for i in idx if abs(spec.freqs[i] - f_true) <= tol]
    if not near:
        return np.nan, -np.inf
    best = max(near, key=lambda i: spec.amplitude[i])
    others = [spec.amplitude[i] for i in idx if i != best]
    if not others:
        return float(spec.freqs[best]), np.inf
    return float(spec.freqs[best]), float(20 * np.log10(spec.amplitude[best] / max(others)))


def follow_trajectory(sg: Spectrogram, t_lo: float, t_hi: float, f_start: Optional[float] = None,
                      max_jump: float = 0.05) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Chain peaks by nearest-frequency continuation inside [t_lo, t_hi].

    The first window uses the peak nearest ``f_start`` (or its strongest
    peak); windows whose nearest peak jumps by more than ``max_jump`` are
    left out of the chain.
    """
    ts, fs = [], []
    prev = f_start
    for t, pk in zip(sg.times, sg.peaks):
        if not (t_lo <= t <= t_hi) or not pk:
            continue
        if prev is None:
            f = max(pk, key=lambda z: z[1])[0]
        else:
            f = min(pk, key=lambda z: abs(z[0] - prev))[0]
            if abs(f - prev) > max_jump:
                continue
        ts.append(t)
        fs.append(f)
        prev = f
    return np.array(ts, dtype=float), np.array(fs, dtype=float)
