"""Sweep-rate recovery on the linear chirp of the fig8 preset, across SNR.

    python3 scripts/chirp_tracking.py --seeds 10 --snr -10 0 10 20
"""
import argparse

import numpy as np

from weakpacket.detect import DetectorConfig
from weakpacket.scenarios import get_preset
from weakpacket.spectrum import follow_trajectory, track_peaks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--snr", type=float, nargs="+", default=[-10, 0, 10, 20])
    args = ap.parse_args()
    sc = get_preset("fig8")
    chirp = sc.specs()[0]
    cfg = DetectorConfig(sc.window, sc.hop, order_policy=sc.order)
    true_rate = (chirp.f_end - chirp.f_start) / chirp.duration
    lo, hi = chirp.start + sc.window // 2, chirp.stop - sc.window // 2
    print("snr_db,median_rate_error,max_rate_error")
    for snr in args.snr:
        errs = []
        for seed in range(1, args.seeds + 1):
            sg = track_peaks(sc.record(seed=seed, snr_db=snr), cfg, sc.order, symmetric=True)
            t, f = follow_trajectory(sg, lo, hi, f_start=chirp.instantaneous_frequency(lo - chirp.start))
            slope = np.polyfit(t, f, 1)[0] if t.size >= 3 else np.nan
            errs.append(abs(slope - true_rate) / true_rate)
        print(f"{snr},{np.nanmedian(errs):.3f},{np.nanmax(errs):.3f}")


if __name__ == "__main__":
    main()
