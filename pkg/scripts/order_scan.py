"""Order selection on the Kay-Marple-like surrogate and on whole fig3 records.

    python3 scripts/order_scan.py --seeds 20
"""
import argparse
from collections import Counter

from weakpacket.order import global_order, scan_orders, select_order
from weakpacket.scenarios import get_preset
from weakpacket.signals import gen_kaymarple_like


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--noise", type=float, default=0.1, help="surrogate noise amplitude")
    args = ap.parse_args()
    print("surrogate seed,p_opt_min,p_opt_max,max_invertible_order")
    for seed in range(args.seeds):
        x = gen_kaymarple_like(seed=seed, noise_amplitude=args.noise)
        sel = select_order(scan_orders(x, (8, 31)))
        print(f"{seed},{sel.p_opt_min},{sel.p_opt_max},{sel.rationale['max_invertible_order']}")
    sc = get_preset("fig3")
    counts = Counter(global_order(sc.record(seed=s)).p_opt for s in range(1, args.seeds + 1))
    print("fig3 whole-record p_opt histogram:", dict(sorted(counts.items())))


if __name__ == "__main__":
    main()
