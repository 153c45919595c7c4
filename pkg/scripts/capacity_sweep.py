"""Ergodic capacity against the mutual information of Silver codes.

    python3 scripts/capacity_sweep.py --trials 2000 --seed 1
"""

import argparse

import numpy as np

from silverforge.channel import Prng, db_to_linear
from silverforge.info import ergodic_capacity_mc, stbc_mutual_info_mc
from silverforge.silver import assemble_generator, build_silver
from silverforge.sim import CSV_HEADER

CONFIGS = [(2, 1), (2, 2), (4, 1), (4, 2), (4, 4), (8, 2), (8, 8)]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--snr-db", type=float, nargs="+", default=list(np.arange(0.0, 31.0, 5.0)))
    args = p.parse_args(argv)
    print(CSV_HEADER)
    print("nt,nr,snr_db,capacity,mi,gap")
    for nt, nr in CONFIGS:
        code = build_silver(nt, nr)
        G = assemble_generator(code)
        for i, snr_db in enumerate(args.snr_db):
            rng = Prng(args.seed).substream(nt, nr, i)
            snr = float(db_to_linear(snr_db))
            cap = ergodic_capacity_mc(nt, nr, snr, args.trials, rng).mean
            mi = stbc_mutual_info_mc(G, nt, nr, code.T, snr, args.trials, rng).mean
            print(f"{nt},{nr},{snr_db:g},{cap:.6f},{mi:.6f},{cap - mi:.6f}")


if __name__ == "__main__":
    main()
