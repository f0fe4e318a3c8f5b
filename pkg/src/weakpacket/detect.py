"""Sliding-window detection statistics G, J, JG and segmentation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import NDArray

from .armodel import ARModel, ModelError, estimate_lp
from .corrmat import averaged_r0_r1, correlations
from .order import global_order, window_orders
from .signals import as_series

#: Shortest window the method is expected to locate a packet with.
MIN_WINDOW = 48


@dataclass(frozen=True)
class DetectorConfig:
    window_len: int = 64
    hop: Optional[int] = None  # defaults to window_len // 8
    order_policy: Union[int, str] = "auto"
    epsilon_frac: float = 0.2
    g_min: float = 0.0
    order_range: tuple[int, int] = (4, 32)

    def __post_init__(self):
        if self.window_len < 3:
            raise ValueError("window_len must be >= 3")
        if self.hop is not None and self.hop < 1:
            raise ValueError("hop must be >= 1")
        if not 0 < self.epsilon_frac < 1:
            raise ValueError("epsilon_frac must lie in (0, 1)")
        if self.g_min < 0:
            raise ValueError("g_min must be >= 0")
        if isinstance(self.order_policy, str):
            if self.order_policy != "auto":
                raise ValueError(f"order_policy must be an int or 'auto', got {self.order_policy!r}")
        elif self.order_policy < 1:
            raise ValueError("fixed order must be >= 1")
        if self.window_len < MIN_WINDOW:
            warnings.warn(f"window_len={self.window_len} is below {MIN_WINDOW}; location is unreliable",
                          stacklevel=2)

    @property
    def step(self) -> int:
        return self.hop if self.hop is not None else max(1, self.window_len // 8)


@dataclass(frozen=True)
class WindowStats:
    J: float
    G: float
    JG: float
    J_raw: float
    r0: float
    r1: float
    model: ARModel


@dataclass
class DetectionTrace:
    offsets: NDArray[np.int64]
    window_len: int
    p: NDArray[np.int64]
    sigma2_xi: NDArray[np.float64]
    J: NDArray[np.float64]
    G: NDArray[np.float64]
    JG: NDArray[np.float64]
    J_raw: NDArray[np.float64]
    record_length: int
    p_global: Optional[int] = None

    @property
    def centers(self) -> NDArray[np.int64]:
        return self.offsets + self.window_len // 2

    def __len__(self) -> int:
        return len(self.offsets)


@dataclass(frozen=True)
class Segment:
    start: int
    end: int  # exclusive
    peak_JG: float

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SegmentSet:
    segments: tuple[Segment, ...]
    threshold_used: float
    record_length: int = 0

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def intervals(self) -> list[tuple[int, int]]:
        return [(s.start, s.end) for s in self.segments]


def statistics_from_model(r0: float, r1: float, model: ARModel) -> tuple[float, float, float, float]:
    """(J, G, JG, J_raw) from averaged correlations and an LP model.

    J uses the noise-corrected power r0 - sigma2; J_raw keeps r0.
    """
    a1 = model.a[0]
    G = r0 - model.sigma2_xi
    J = G * (1 + a1 * a1) - 2 * r1 * a1
    J_raw = r0 * (1 + a1 * a1) - 2 * r1 * a1
    return J, G, J * G, J_raw


def window_stats(window, p: int) -> Optional[WindowStats]:
    """Detection statistics for one window, or None when the model is invalid."""
    cp = correlations(window, p)
    try:
        model = estimate_lp(cp)
    except ModelError:
        return None
    if not model.valid:
        return None
    r0, r1 = averaged_r0_r1(cp)
    J, G, JG, J_raw = statistics_from_model(r0, r1, model)
    return WindowStats(J, G, JG, J_raw, r0, r1, model)


def correlation_lags(cp) -> NDArray[np.float64]:
    """Toeplitz lags r_0..r_{p-1}: averages of the diagonals of Rx."""
    R = cp.Rx
    p = R.shape[0]
    return np.array([np.mean(np.diagonal(R, k)) for k in range(p)])


def w00(model: ARModel, lags) -> float:
    """Leading diagonal element of the Fisher-information augmentation.

    Diagnostic only; the full augmentation matrix is not computed.
    """
    a = np.asarray(model.a, dtype=float)
    r = np.asarray(lags, dtype=float)
    p = a.size
    if r.size < max(p, 3):
        raise ValueError("need lags up to max(p-1, 2)")
    a1 = a[0]
    t1 = a1 * a1 * r[0]
    t2 = 4 * a1 * sum(a[i - 1] * r[i - 1] for i in range(1, p + 1))
    idx = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    t3 = a @ r[idx] @ a
    t4 = -2 * sum(a[i - 1] * r[i - 2] for i in range(2, p + 1))
    return float(t1 + t2 + t3 + t4 - 2 * r[2])


def run_detector(record, cfg: DetectorConfig) -> DetectionTrace:
    """Evaluate window_stats on windows at offsets 0, hop, 2*hop, ...

    With ``order_policy="auto"`` one global order is chosen for the whole
    record, then refined per window within a small clamp around it.
    """
    x = as_series(record)
    N = cfg.window_len
    if x.size < N:
        raise ValueError(f"record length {x.size} shorter than window {N}")
    offsets = np.arange(0, x.size - N + 1, cfg.step)
    p_max_window = (N - 1) // 2
    p_global = None
    if cfg.order_policy == "auto":
        try:
            p_global = global_order(x, cfg.order_range).p_opt
        except ValueError:
            p_global = cfg.order_range[0]
        p_global = min(p_global, p_max_window)
    n = offsets.size
    out = {k: np.full(n, np.nan) for k in ("sigma2_xi", "J", "G", "JG", "J_raw")}
    if cfg.order_policy == "auto":
        windows = np.lib.stride_tricks.sliding_window_view(x, N)[offsets]
        ps = np.array(window_orders(windows, p_global), dtype=np.int64)
    else:
        ps = np.full(n, min(int(cfg.order_policy), p_max_window), dtype=np.int64)
    for k, off in enumerate(offsets):
        st = window_stats(x[off:off + N], int(ps[k]))
        if st is None:
            continue
        out["sigma2_xi"][k] = st.model.sigma2_xi
        out["J"][k], out["G"][k], out["JG"][k], out["J_raw"][k] = st.J, st.G, st.JG, st.J_raw
    return DetectionTrace(offsets, N, ps, record_length=x.size, p_global=p_global, **out)


def segment(trace: DetectionTrace, cfg: DetectorConfig) -> SegmentSet:
    """Merge runs of windows with JG >= eps*max(JG) and G > g_min.

    Each run covers the union of its windows' sample extents; runs whose
    extents overlap are merged so segments stay disjoint. A window with
    absent statistics is bridged when both neighbours pass.
    """
    JG = trace.JG
    ok = ~np.isnan(JG)
    if not ok.any():
        return SegmentSet((), np.nan, trace.record_length)
    top = np.max(JG[ok])
    if top <= 0:
        return SegmentSet((), float(cfg.epsilon_frac * top), trace.record_length)
    thr = cfg.epsilon_frac * top
    with np.errstate(invalid="ignore"):
        above = ok & (JG >= thr) & (trace.G > cfg.g_min)
    for k in np.flatnonzero(~ok):
        if 0 < k < len(above) - 1 and above[k - 1] and above[k + 1]:
            above[k] = True
    intervals = []
    N = trace.window_len
    k = 0
    while k < len(above):
        if not above[k]:
            k += 1
            continue
        j = k
        while j + 1 < len(above) and above[j + 1]:
            j += 1
        peak = float(np.nanmax(JG[k:j + 1]))
        intervals.append([int(trace.offsets[k]), int(trace.offsets[j]) + N, peak])
        k = j + 1
    merged = []
    for iv in intervals:
        if merged and iv[0] < merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv[1])
            merged[-1][2] = max(merged[-1][2], iv[2])
        else:
            merged.append(iv)
    return SegmentSet(tuple(Segment(*m) for m in merged), float(thr), trace.record_length)


def calibrate_g_min(noise_trace: DetectionTrace, k: float = 3.0, statistic: str = "JG") -> float:
    """Power gate from a noise-only pass.

    ``statistic="JG"``: k * std(JG). ``statistic="G"``: mean(G) + k * std(G),
    which has the units of G itself.
    """
    if statistic not in ("JG", "G"):
        raise ValueError(f"statistic must be 'JG' or 'G', got {statistic!r}")
    v = getattr(noise_trace, statistic)
    v = v[~np.isnan(v)]
    if v.size == 0:
        return 0.0
    if statistic == "JG":
        return float(k * v.std())
    return float(max(0.0, v.mean() + k * v.std()))


def detect(record, cfg: DetectorConfig) -> tuple[DetectionTrace, SegmentSet]:
    trace = run_detector(record, cfg)
    return trace, segment(trace, cfg)
