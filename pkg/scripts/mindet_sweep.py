"""Minimum determinant of the rate-1 codes and the layer-phase sweep.

    python3 scripts/mindet_sweep.py
"""

import argparse

from silverforge.channel import Constellation
from silverforge.group_code import build_rate1_4group, min_determinant, rotation_pair
from silverforge.sim import PHASE_GRID, phase_sweep


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--phases", type=float, nargs="+", default=list(PHASE_GRID))
    p.add_argument("--four-antennas", action="store_true",
                   help="also sweep the two-layer 4-antenna code (3^16 differences, slow)")
    args = p.parse_args(argv)
    cons = Constellation("QAM", 4)
    for nt in (2, 4, 8):
        code = build_rate1_4group(nt.bit_length() - 1)
        rot = rotation_pair(nt)
        line = f"rate-1 n_t={nt}: factorized {min_determinant(code, rot, cons):.6g}"
        if nt <= 4:
            line += f", exhaustive {min_determinant(code, rot, cons, 'exhaustive'):.6g}"
        print(line)
    sizes = [2] + ([4] if args.four_antennas else [])
    for nt in sizes:
        kw = {"limit": 3 ** 16} if nt == 4 else {}
        print(f"two-layer n_t={nt}")
        print("phase_deg,min_det")
        for ph, v in phase_sweep(nt, cons, args.phases, **kw).items():
            print(f"{ph:g},{v:.6g}")


if __name__ == "__main__":
    main()
