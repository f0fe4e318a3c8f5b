"""Named scenarios (presets fig3..fig8).

Fill frequencies, window lengths, orders and SNRs are fixed per preset.
Packet durations, spacings and the chirp layout are chosen defaults.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .signals import ChirpSpec, PacketSpec, add_noise, gen_chirp, gen_packets

FILL_FREQUENCIES = (0.018, 0.27, 0.47)


def packet_layout(scale: int = 1) -> tuple[int, list[PacketSpec]]:
    """Three equal-amplitude packets; ``scale`` stretches the whole layout."""
    starts = (96, 512, 928)
    duration = 224
    record_length = 1280
    specs = [PacketSpec(f, s * scale, duration * scale, phase=0.5 * k)
             for k, (f, s) in enumerate(zip(FILL_FREQUENCIES, starts))]
    return record_length * scale, specs


def chirp_layout() -> tuple[int, list[ChirpSpec]]:
    """One linear and one quadratic chirp, well separated in time."""
    return 2400, [
        ChirpSpec(0.05, 0.45, 200, 800, law="linear"),
        ChirpSpec(0.10, 0.40, 1300, 800, law="quadratic"),
    ]


@dataclass(frozen=True)
class Scenario:
    name: str
    snr_db: float
    window: int
    hop: int
    order: Optional[int]  # HOAR order for spectra; None when not used
    kind: str  # "packets" or "chirps"
    scale: int = 1
    seed: int = 1
    notes: str = ""

    def clean(self) -> np.ndarray:
        return clean_signal(self.kind, self.scale)

    def supports(self) -> list[tuple[int, int]]:
        if self.kind == "packets":
            _, specs = packet_layout(self.scale)
        else:
            _, specs = chirp_layout()
        return [(s.start, s.stop) for s in specs]

    def specs(self):
        if self.kind == "packets":
            return packet_layout(self.scale)[1]
        return chirp_layout()[1]

    def record(self, seed: Optional[int] = None, snr_db: Optional[float] = None) -> np.ndarray:
        seed = self.seed if seed is None else seed
        snr = self.snr_db if snr_db is None else snr_db
        return add_noise(self.clean(), snr, "white", seed)

    def to_dict(self) -> dict:
        return asdict(self)


def clean_signal(kind: str, scale: int = 1) -> np.ndarray:
    if kind == "packets":
        n, specs = packet_layout(scale)
        return gen_packets(specs, n)
    if kind == "chirps":
        n, specs = chirp_layout()
        return sum(gen_chirp(s, n) for s in specs)
    raise ValueError(f"unknown scenario kind {kind!r}")


PRESETS = {
    "fig3": Scenario("fig3", -10.0, 64, 8, None, "packets"),
    "fig4": Scenario("fig4", -20.0, 256, 32, None, "packets", scale=4),
    "fig5": Scenario("fig5", -10.0, 200, 25, None, "chirps"),
    "fig6": Scenario("fig6", -10.0, 64, 8, 16, "packets"),
    "fig7": Scenario("fig7", -20.0, 256, 32, 24, "packets", scale=4),
    "fig8": Scenario("fig8", -10.0, 200, 25, 16, "chirps"),
}


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
