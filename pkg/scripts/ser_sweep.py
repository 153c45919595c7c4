"""SER versus SNR for Silver codes; writes one CSV per configuration.

    python3 scripts/ser_sweep.py --out results/ --seed 1
"""

import argparse
import pathlib
import sys

from silverforge.sim import SimulationConfig, run_ser_sweep, ser_csv

CONFIGS = [(2, 2, [4.0, 8.0, 12.0, 16.0]), (4, 2, [2.0, 6.0, 10.0, 14.0]), (4, 4, [2.0, 6.0, 10.0])]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--target-errors", type=int, default=100)
    p.add_argument("--max-trials", type=int, default=200_000)
    args = p.parse_args(argv)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for nt, nr, grid in CONFIGS:
        cfg = SimulationConfig(nt=nt, nr=nr, snr_db=grid, target_errors=args.target_errors,
                               max_trials=args.max_trials, seed=args.seed)
        pts = run_ser_sweep(cfg, progress=lambda pt: print(
            f"{nt}x{nr} {pt.snr_db:g} dB: SER {pt.ser:.3e} ({pt.symbol_errors} errors, {pt.trials} blocks, "
            f"{pt.wall_time:.1f} s)", file=sys.stderr))
        path = out / f"ser_{nt}x{nr}.csv"
        path.write_text(ser_csv(pts, timing=True))
        print(path)


if __name__ == "__main__":
    main()
