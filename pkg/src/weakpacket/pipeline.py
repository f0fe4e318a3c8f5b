"""End-to-end run: order selection, detection, localized spectra, files."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .detect import DetectorConfig, DetectionTrace, SegmentSet, detect
from .files import config_hash, read_signal, write_csv, write_json, write_signal
from .order import OrderScan, OrderSelection, scan_orders, select_order
from .scenarios import get_preset
from .signals import as_series, measure_snr, signal_mask
from .spectrum import DEFAULT_GRID, SpectrumEstimate, Spectrogram, localized_analysis, track_peaks


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce one run, given the seed."""
    output_dir: str = "out"
    preset: Optional[str] = None
    input: Optional[str] = None
    snr_db: Optional[float] = None
    seed: int = 1
    window: Optional[int] = None
    hop: Optional[int] = None
    order_policy: Union[int, str] = "auto"
    order_range: tuple[int, int] = (4, 32)
    epsilon_frac: float = 0.2
    g_min: float = 0.0
    spectrum_order: Optional[int] = None
    symmetric: bool = True
    grid: int = DEFAULT_GRID
    track: Optional[bool] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["order_range"] = list(self.order_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        if "order_range" in d:
            d["order_range"] = tuple(d["order_range"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def resolved(self) -> "PipelineConfig":
        """Fill window/hop/order/SNR defaults from the preset."""
        if self.preset is None:
            return replace(self, window=self.window or 64,
                           spectrum_order=self.spectrum_order or 16,
                           track=bool(self.track))
        sc = get_preset(self.preset)
        return replace(
            self,
            snr_db=sc.snr_db if self.snr_db is None else self.snr_db,
            window=self.window or sc.window,
            hop=self.hop or sc.hop,
            spectrum_order=self.spectrum_order or sc.order or 16,
            track=(sc.kind == "chirps") if self.track is None else self.track,
        )

    def detector(self) -> DetectorConfig:
        return DetectorConfig(self.window, self.hop, self.order_policy, self.epsilon_frac,
                              self.g_min, tuple(self.order_range))


@dataclass
class PipelineResult:
    config: PipelineConfig
    record: np.ndarray
    selection: Optional[OrderSelection]
    trace: DetectionTrace
    segments: SegmentSet
    spectra: list[SpectrumEstimate]
    spectrogram: Optional[Spectrogram] = None
    files: list[str] = field(default_factory=list)
    measured_snr_db: Optional[float] = None


def load_record(cfg: PipelineConfig) -> tuple[np.ndarray, Optional[float]]:
    if cfg.input is not None:
        return as_series(read_signal(cfg.input)), None
    if cfg.preset is None:
        raise ValueError("need either an input file or a preset")
    sc = get_preset(cfg.preset)
    clean = sc.clean()
    x = sc.record(seed=cfg.seed, snr_db=cfg.snr_db)
    snr = measure_snr(clean, x - clean, signal_mask(clean)) if np.isfinite(cfg.snr_db) else None
    return x, snr


def analyse(record, cfg: PipelineConfig) -> PipelineResult:
    """Run the whole chain in memory (no files)."""
    cfg = cfg.resolved()
    x = as_series(record)
    dcfg = cfg.detector()
    selection = None
    if cfg.order_policy == "auto":
        hi = min(cfg.order_range[1], (x.size - 1) // 2)
        try:
            selection = select_order(scan_orders(x, (cfg.order_range[0], hi)))
        except ValueError:
            selection = None
    trace, segs = detect(x, dcfg)
    spectra = localized_analysis(x, segs, cfg.spectrum_order, cfg.symmetric, cfg.grid)
    sg = track_peaks(x, dcfg, cfg.spectrum_order, cfg.symmetric, grid_size=cfg.grid) if cfg.track else None
    return PipelineResult(cfg, x, selection, trace, segs, spectra, sg)


def trace_rows(trace: DetectionTrace):
    for k in range(len(trace)):
        yield (trace.centers[k], trace.p[k], trace.sigma2_xi[k], trace.J[k], trace.G[k], trace.JG[k])


TRACE_HEADER = ["center", "p", "sigma2_xi", "J", "G", "JG"]
SEGMENT_HEADER = ["start", "end", "peak_JG"]
SPECTRUM_HEADER = ["f", "A_linear", "A_db"]
TRACK_HEADER = ["center", "f_peak", "A_peak"]


def write_trace(out: Path, trace: DetectionTrace, segs: SegmentSet) -> list[Path]:
    return [
        write_csv(out / "trace.csv", TRACE_HEADER, trace_rows(trace)),
        write_csv(out / "segments.csv", SEGMENT_HEADER, ((s.start, s.end, s.peak_JG) for s in segs)),
    ]


def write_spectra(out: Path, spectra: list[SpectrumEstimate]) -> list[Path]:
    paths = []
    for k, sp in enumerate(spectra):
        name = f"spectrum_seg{sp.meta.get('segment', k)}.csv"
        paths.append(write_csv(out / name, SPECTRUM_HEADER, zip(sp.freqs, sp.amplitude, sp.amplitude_db)))
    return paths


def write_spectrogram(out: Path, sg: Spectrogram) -> Path:
    return write_csv(out / "spectrogram.csv", TRACK_HEADER, sg.points())


def scan_rows(scan: OrderScan):
    width = max(c.p for c in scan.candidates)
    for c in scan.candidates:
        rho = list(c.rho_col) if c.rho_col is not None else []
        sv = list(c.singular_values)
        yield [c.p] + rho + [None] * (width - len(rho)) + sv + [None] * (width - len(sv)) + [c.cond_estimate]


def scan_header(scan: OrderScan) -> list[str]:
    width = max(c.p for c in scan.candidates)
    return ["p"] + [f"rho_{i}" for i in range(width)] + [f"s_{i}" for i in range(width)] + ["cond"]


def selection_dict(sel: OrderSelection) -> dict:
    return {"p_opt_min": sel.p_opt_min, "p_opt_max": sel.p_opt_max, "p_opt": sel.p_opt,
            "rationale": sel.rationale}


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Generate or load the record, analyse it and write the artifact directory."""
    cfg = cfg.resolved()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    x, snr = load_record(cfg)
    res = analyse(x, cfg)
    res.measured_snr_db = snr
    files = [write_signal(out / "signal.csv", x)]
    files += write_trace(out, res.trace, res.segments)
    files += write_spectra(out, res.spectra)
    if res.spectrogram is not None:
        files.append(write_spectrogram(out, res.spectrogram))
    summary = {
        "p_global": res.trace.p_global,
        "order_selection": selection_dict(res.selection) if res.selection else None,
        "segments": [[s.start, s.end] for s in res.segments],
        "threshold_used": res.segments.threshold_used,
        "spectra": [{k: v for k, v in sp.meta.items()} | {"flags": list(sp.flags)} for sp in res.spectra],
        "measured_snr_db": snr,
    }
    files.append(write_json(out / "summary.json", summary))
    write_manifest(out, cfg.to_dict(), [cfg.input] if cfg.input else [], files)
    res.files = [str(f) for f in files]
    return res


def write_manifest(out: Path, config: dict, inputs: list, files: list) -> Path:
    names = sorted({Path(f).name for f in files} | {"manifest.json"})
    return write_json(out / "manifest.json", {
        "tool": "weakpacket",
        "version": __version__,
        "inputs": [str(i) for i in inputs],
        "config": config,
        "config_hash": config_hash(config),
        "artifacts": names,
    })
