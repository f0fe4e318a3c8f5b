"""Synthetic test signals: enveloped wave packets, chirps and calibrated noise.

All frequencies are relative (cycles/sample) on the open interval (0, 0.5).
Records are plain 1-D float64 numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import maximum_filter1d
from scipy.signal import lfilter
from scipy.signal.windows import tukey

Envelope = Literal["rectangular", "raised-cosine"]
ChirpLaw = Literal["linear", "quadratic"]

#: Fraction of each packet edge tapered by the raised-cosine envelope.
TAPER_FRACTION = 0.1
#: Samples above this fraction of the envelope maximum count toward the SNR.
SNR_MASK_LEVEL = 0.1
#: Width of the running-max window used as the signal envelope.
ENVELOPE_WIDTH = 5


def as_series(x, min_length: int = 2) -> NDArray[np.float64]:
    """Validate and convert to a finite 1-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"time series must be 1-D, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"time series needs at least {min_length} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("time series contains non-finite samples")
    return arr


def _check_frequency(f: float, name: str = "frequency") -> None:
    if not 0.0 < f < 0.5:
        raise ValueError(f"{name} must lie in (0, 0.5) cycles/sample, got {f}")


@dataclass(frozen=True)
class PacketSpec:
    fill_frequency: float
    start: int
    duration: int
    envelope: Envelope = "raised-cosine"
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        _check_frequency(self.fill_frequency, "fill_frequency")
        if self.start < 0 or self.duration < 1:
            raise ValueError("packet needs start >= 0 and duration >= 1")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.envelope not in ("rectangular", "raised-cosine"):
            raise ValueError(f"unknown envelope {self.envelope!r}")

    @property
    def stop(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class ChirpSpec:
    f_start: float
    f_end: float
    start: int
    duration: int
    amplitude: float = 1.0
    law: ChirpLaw = "linear"
    phase: float = 0.0

    def __post_init__(self):
        if self.f_start == self.f_end:
            raise ValueError("chirp needs f_start != f_end")
        # both laws are monotone between the endpoints
        _check_frequency(self.f_start, "f_start")
        _check_frequency(self.f_end, "f_end")
        if self.start < 0 or self.duration < 2:
            raise ValueError("chirp needs start >= 0 and duration >= 2")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.law not in ("linear", "quadratic"):
            raise ValueError(f"unknown chirp law {self.law!r}")

    @property
    def stop(self) -> int:
        return self.start + self.duration

    def instantaneous_frequency(self, t):
        """Frequency law at local time ``t`` (samples since ``start``)."""
        u = np.asarray(t, dtype=float) / self.duration
        if self.law == "linear":
            return self.f_start + (self.f_end - self.f_start) * u
        return self.f_start + (self.f_end - self.f_start) * u**2

    def phase_at(self, t):
        """Closed-form integral of the frequency law, in radians."""
        t = np.asarray(t, dtype=float)
        df = self.f_end - self.f_start
        if self.law == "linear":
            cycles = self.f_start * t + df * t**2 / (2 * self.duration)
        else:
            cycles = self.f_start * t + df * t**3 / (3 * self.duration**2)
        return self.phase + 2 * np.pi * cycles


def packet_envelope(spec: PacketSpec) -> NDArray[np.float64]:
    if spec.envelope == "rectangular" or spec.duration < 3:
        return np.ones(spec.duration)
    # a tukey window with alpha=2*frac tapers frac of the length on each side
    return tukey(spec.duration, alpha=2 * TAPER_FRACTION)


def gen_packets(specs: Sequence[PacketSpec], record_length: int) -> NDArray[np.float64]:
    """Sum of enveloped sinusoids, zero outside the packet supports.

    The sinusoid phase is referenced to the packet start, so a rectangular
    packet holds ``amplitude * cos(2*pi*f*n + phase)`` for local index n.
    Overlapping packets simply add.
    """
    if not specs:
        raise ValueError("need at least one packet spec")
    x = np.zeros(record_length)
    for spec in specs:
        if spec.stop > record_length:
            raise ValueError(f"packet [{spec.start}, {spec.stop}) exceeds record length {record_length}")
        n = np.arange(spec.duration)
        carrier = np.cos(2 * np.pi * spec.fill_frequency * n + spec.phase)
        x[spec.start:spec.stop] += spec.amplitude * packet_envelope(spec) * carrier
    return x


def gen_chirp(spec: ChirpSpec, record_length: int) -> NDArray[np.float64]:
    """Phase-continuous chirp inside ``[start, start + duration)``."""
    if spec.stop > record_length:
        raise ValueError(f"chirp [{spec.start}, {spec.stop}) exceeds record length {record_length}")
    x = np.zeros(record_length)
    t = np.arange(spec.duration)
    x[spec.start:spec.stop] = spec.amplitude * np.cos(spec.phase_at(t))
    return x


def signal_mask(signal, level: float = SNR_MASK_LEVEL) -> NDArray[np.bool_]:
    """Samples where the running-max envelope exceeds ``level`` of its peak."""
    env = maximum_filter1d(np.abs(np.asarray(signal, dtype=float)), size=ENVELOPE_WIDTH, mode="constant")
    peak = env.max() if env.size else 0.0
    if peak <= 0:
        return np.zeros(env.shape, dtype=bool)
    return env > level * peak


def measure_snr(signal, noise, mask=None) -> float:
    """Masked SNR in dB: signal vs noise power over the active samples."""
    signal = np.asarray(signal, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if mask is None:
        mask = signal_mask(signal)
    if not mask.any():
        raise ValueError("signal is identically zero; SNR undefined")
    ps = np.mean(signal[mask] ** 2)
    pn = np.mean(noise[mask] ** 2)
    return float(10 * np.log10(ps / pn))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream: same seed, same samples on every platform."""
    return np.random.Generator(np.random.Philox(seed))


def noise_samples(length: int, seed: int, kind: str = "white", ar_coeffs: Sequence[float] = (0.8,)) -> NDArray[np.float64]:
    """Unit-variance-innovation noise, either white or AR-filtered.

    ``ar_coeffs`` are the feedback coefficients c_k in
    ``w[n] = sum_k c_k w[n-k] + e[n]``.
    """
    rng = make_rng(seed)
    if kind == "white":
        return rng.standard_normal(length)
    if kind == "ar":
        burn = 256
        e = rng.standard_normal(length + burn)
        w = lfilter([1.0], np.r_[1.0, -np.asarray(ar_coeffs, dtype=float)], e)
        return w[burn:]
    raise ValueError(f"unknown noise kind {kind!r}")


def add_noise(signal, snr_db: float, kind: str = "white", seed: int = 0,
              ar_coeffs: Sequence[float] = (0.8,)) -> NDArray[np.float64]:
    """Return ``signal + noise`` with the noise scaled to hit ``snr_db``.

    The realized noise is rescaled so the masked SNR (see ``signal_mask``)
    equals the target exactly; ``snr_db = inf`` returns a copy of the input.
    """
    x = as_series(signal, min_length=1)
    if np.isposinf(snr_db):
        return x.copy()
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db}")
    mask = signal_mask(x)
    if not mask.any():
        raise ValueError("signal is identically zero; SNR undefined")
    w = noise_samples(x.size, seed, kind, ar_coeffs)
    ps = np.mean(x[mask] ** 2)
    pn = np.mean(w[mask] ** 2)
    scale = np.sqrt(ps / (pn * 10 ** (snr_db / 10)))
    return x + scale * w


KAYMARPLE_FREQS = (0.1, 0.2, 0.21)
KAYMARPLE_AMPLITUDES = (0.1, 1.0, 1.0)
KAYMARPLE_PHASES = (0.0, 1.3, 2.6)


def gen_kaymarple_like(seed: int = 0, noise_amplitude: float = 0.1, ar_coeff: float = 0.8,
                       length: int = 64) -> NDArray[np.float64]:
    """64-sample test record: three sinusoids plus AR(1)-coloured noise.

    Stands in for the classic three-sinusoid benchmark record; the noise is
    a first-order AR surrogate rather than the original band-pass process.
    """
    n = np.arange(length)
    x = np.zeros(length)
    for f, amp, ph in zip(KAYMARPLE_FREQS, KAYMARPLE_AMPLITUDES, KAYMARPLE_PHASES):
        x += amp * np.cos(2 * np.pi * f * n + ph)
    if noise_amplitude:
        x += noise_amplitude * noise_samples(length, seed, "ar", (ar_coeff,))
    return x
