"""Command-line front end: ``weakpacket <command> [options]``.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage error.
Every command writes a manifest.json next to its outputs.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .armodel import ModelError
from .detect import Segment, SegmentSet, detect
from .files import read_segments, read_signal, write_csv, write_json, write_signal
from .order import scan_orders, select_order
from .pipeline import (PipelineConfig, run_pipeline, scan_header, scan_rows, selection_dict,
                       write_manifest, write_spectra, write_spectrogram, write_trace)
from .scenarios import PRESETS, get_preset
from .signals import as_series, measure_snr, signal_mask
from .spectrum import DEFAULT_GRID, localized_analysis, track_peaks


class UsageError(Exception):
    pass


def _order_arg(s: str):
    if s == "auto":
        return "auto"
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"order must be an integer or 'auto', got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("order must be >= 1")
    return v


def _add_io(sp, need_input=True):
    if need_input:
        sp.add_argument("--input", required=True, help="signal CSV with an 'x' column")
    sp.add_argument("--output-dir", required=True)


def _add_detector(sp):
    sp.add_argument("--window", type=int, default=64)
    sp.add_argument("--hop", type=int, default=None, help="default: window // 8")
    sp.add_argument("--order", type=_order_arg, default="auto", help="integer or 'auto'")
    sp.add_argument("--order-range", type=int, nargs=2, default=(4, 32), metavar=("LO", "HI"))
    sp.add_argument("--epsilon", type=float, default=0.2, help="threshold fraction of max JG")


def _add_spectral(sp, default_order=16):
    sp.add_argument("--symmetric", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--grid", type=int, default=DEFAULT_GRID)
    if default_order is not None:
        sp.add_argument("--spectrum-order", type=int, default=default_order)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weakpacket", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="synthesize a preset record")
    _add_io(sp, need_input=False)
    sp.add_argument("--preset", required=True, choices=sorted(PRESETS))
    sp.add_argument("--snr", type=float, default=None, help="masked SNR in dB (default: preset)")
    sp.add_argument("--seed", type=int, default=1)

    sp = sub.add_parser("order", help="order scan and selection")
    _add_io(sp)
    sp.add_argument("--order-range", type=int, nargs=2, default=(4, 32), metavar=("LO", "HI"))

    sp = sub.add_parser("detect", help="sliding-window statistics and segments")
    _add_io(sp)
    _add_detector(sp)

    sp = sub.add_parser("spectrum", help="amplitude spectra of segments")
    _add_io(sp)
    sp.add_argument("--segments", default=None, help="segments CSV; detection is run when absent")
    _add_detector(sp)
    _add_spectral(sp)

    sp = sub.add_parser("track", help="per-window spectral peaks")
    _add_io(sp)
    _add_detector(sp)
    _add_spectral(sp)
    sp.add_argument("--fraction", type=float, default=0.5)

    sp = sub.add_parser("pipeline", help="generate or load, detect, analyse")
    sp.add_argument("--output-dir", required=True)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--input")
    src.add_argument("--config", help="PipelineConfig JSON")
    sp.add_argument("--snr", type=float, default=None)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--window", type=int, default=None)
    sp.add_argument("--hop", type=int, default=None)
    sp.add_argument("--order", type=_order_arg, default="auto")
    sp.add_argument("--order-range", type=int, nargs=2, default=(4, 32), metavar=("LO", "HI"))
    sp.add_argument("--epsilon", type=float, default=0.2)
    _add_spectral(sp, default_order=None)
    sp.add_argument("--spectrum-order", type=int, default=None, help="default: preset order or 16")
    sp.add_argument("--track", action=argparse.BooleanOptionalAction, default=None)
    return ap


def _detector_cfg(args):
    from .detect import DetectorConfig
    try:
        return DetectorConfig(args.window, args.hop, args.order, args.epsilon,
                              order_range=tuple(args.order_range))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_of(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k != "func"}
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = list(v)
    return d


def cmd_gen(args) -> list[Path]:
    out = Path(args.output_dir)
    sc = get_preset(args.preset)
    snr = sc.snr_db if args.snr is None else args.snr
    clean = sc.clean()
    x = sc.record(seed=args.seed, snr_db=snr)
    measured = measure_snr(clean, x - clean, signal_mask(clean)) if np.isfinite(snr) else None
    files = [write_signal(out / "signal.csv", x)]
    files.append(write_json(out / "signal.json", {
        "preset": sc.to_dict(),
        "snr_db": snr,
        "seed": args.seed,
        "record_length": int(x.size),
        "supports": sc.supports(),
        "components": [vars(s) for s in sc.specs()],
        "measured_snr_db": measured,
    }))
    return files


def cmd_order(args) -> list[Path]:
    out = Path(args.output_dir)
    x = as_series(read_signal(args.input))
    lo, hi = args.order_range
    hi = min(hi, (x.size - 1) // 2)
    if lo < 1 or hi < lo:
        raise UsageError(f"order range ({lo}, {args.order_range[1]}) is empty for N={x.size}")
    scan = scan_orders(x, (lo, hi))
    sel = select_order(scan)
    return [
        write_csv(out / "order_scan.csv", scan_header(scan), scan_rows(scan)),
        write_json(out / "order_selection.json", selection_dict(sel)),
    ]


def cmd_detect(args) -> list[Path]:
    x = as_series(read_signal(args.input))
    trace, segs = detect(x, _detector_cfg(args))
    return write_trace(Path(args.output_dir), trace, segs)


def cmd_spectrum(args) -> list[Path]:
    out = Path(args.output_dir)
    x = as_series(read_signal(args.input))
    files = []
    if args.segments:
        segs = SegmentSet(tuple(Segment(s, e, np.nan) for s, e in read_segments(args.segments)),
                          np.nan, x.size)
    else:
        trace, segs = detect(x, _detector_cfg(args))
        files += write_trace(out, trace, segs)
    spectra = localized_analysis(x, segs, args.spectrum_order, args.symmetric, args.grid)
    if not spectra:
        raise RuntimeError("no segment long enough for a spectrum at this order")
    return files + write_spectra(out, spectra)


def cmd_track(args) -> list[Path]:
    x = as_series(read_signal(args.input))
    sg = track_peaks(x, _detector_cfg(args), args.spectrum_order, args.symmetric, args.fraction, args.grid)
    return [write_spectrogram(Path(args.output_dir), sg)]


def cmd_pipeline(args) -> list[Path]:
    if args.config:
        try:
            cfg = PipelineConfig.from_json(args.config)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from None
        cfg = PipelineConfig.from_dict(cfg.to_dict() | {"output_dir": args.output_dir})
    else:
        cfg = PipelineConfig(
            output_dir=args.output_dir, preset=args.preset, input=args.input, snr_db=args.snr,
            seed=args.seed, window=args.window, hop=args.hop, order_policy=args.order,
            order_range=tuple(args.order_range), epsilon_frac=args.epsilon,
            spectrum_order=args.spectrum_order, symmetric=args.symmetric, grid=args.grid,
            track=args.track)
    try:
        cfg.resolved().detector()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    run_pipeline(cfg)
    return []  # run_pipeline writes its own manifest


COMMANDS = {"gen": cmd_gen, "order": cmd_order, "detect": cmd_detect, "spectrum": cmd_spectrum,
            "track": cmd_track, "pipeline": cmd_pipeline}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)  # exits with 2 on bad usage
    try:
        files = COMMANDS[args.command](args)
        if args.command != "pipeline":
            inputs = [p for p in (getattr(args, "input", None), getattr(args, "segments", None)) if p]
            write_manifest(Path(args.output_dir), _config_of(args), inputs, files)
    except UsageError as exc:
        ap.error(str(exc))
    except (OSError, ValueError, RuntimeError, ModelError, np.linalg.LinAlgError) as exc:
        print(f"weakpacket {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
