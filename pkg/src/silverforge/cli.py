"""
Command-line entry point.

Exit status: 0 on success, 1 when a check fails, 2 on configuration errors.
"""

import argparse
import sys

from .channel import Constellation, Prng, db_to_linear, sample_channel, transmit
from .decoder import BRUTE_FORCE_LIMIT, brute_force_ml, decode
from .errors import ConfigInvalid, RankDeficient, SearchTooLarge, SilverforgeError, UnsupportedSize
from .frames import build_frame, verify_frame
from .group_code import build_rate1_4group, rotate_code, rotation_pair
from .info import ergodic_capacity_mc, stbc_mutual_info_mc
from .linalg import format_matrix
from .silver import (assemble_generator, build_silver, hr_pair_census,
                     self_interference_trace_check)
from .sim import (CSV_HEADER, SimulationConfig, code_from_text, load_config, run_mindet,
                  run_ser_sweep, run_verification, ser_csv)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _float_list(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _emit(text, path=None):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_code(code, with_layers=False):
    parts = []
    for i, w in enumerate(code.weights):
        label = f" {code.labels[i]}" if code.labels else ""
        parts.append(f"# A{i + 1}{label}\n" + format_matrix(w))
    for gi, g in enumerate(code.groups):
        parts.append(f"group {gi + 1}: " + " ".join(str(i) for i in g) + "\n")
    if with_layers:
        for layer in range(code.n_layers):
            idx = [i for i, t in enumerate(code.layer_tags) if t == layer]
            parts.append(f"# layer {layer}: " + " ".join(map(str, idx)) + "\n")
    return "".join(parts)


# -- subcommands -------------------------------------------------------------------

def cmd_frame(args):
    f = build_frame(args.a)
    out = []
    for i, F in enumerate(f.matrices, 1):
        out.append(f"# F{i}\n" + format_matrix(F))
    rep = verify_frame(f)
    out.append(f"# max deviation {rep.max_deviation:.3e}\n")
    _emit("".join(out), args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_build(args):
    a = int(args.nt).bit_length() - 1
    if 2 ** a != args.nt:
        raise UnsupportedSize(f"n_t must be a power of two, got {args.nt}")
    code = build_rate1_4group(a)
    if args.rotated:
        code = rotate_code(code, rotation_pair(args.nt))
    _emit(_dump_code(code), args.output)
    return EXIT_OK


def cmd_silver(args):
    code = build_silver(args.nt, args.nr, args.phase)
    G = assemble_generator(code)
    zero, total = hr_pair_census(code)
    trace = self_interference_trace_check(code)
    dev = G.gram_deviation()
    lossless = args.nr >= args.nt and dev <= 1e-9
    lines = [_dump_code(code, with_layers=True), "# generator (normalized)\n", format_matrix(G.G)]
    lines.append(f"# census: {zero} of {total} weight pairs are Hurwitz-Radon orthogonal\n")
    lines.append(f"# max |tr(A_i A_j^H + A_j A_i^H)| = {trace:.3e}\n")
    lines.append(f"# max |G^T G - I| = {dev:.3e}\n")
    lines.append(f"# information lossless: {lossless}\n")
    _emit("".join(lines), args.output)
    return EXIT_OK if trace <= 1e-9 and dev <= 1e-9 else EXIT_FAIL


def cmd_decode_selftest(args):
    if args.seed is None:
        raise ConfigInvalid("seed", "--seed is required")
    code = build_silver(args.nt, args.nr) if args.code == "silver" else build_silver(args.nt, 1)
    cons = Constellation("QAM", args.M)
    use_bf = cons.pam_size ** len(code.weights) <= BRUTE_FORCE_LIMIT
    rows = [CSV_HEADER, "trial,metric_bf,metric_sd,metric_cond,nodes_sd,nodes_cond"]
    ok = True
    root = Prng(args.seed)
    snr = float(db_to_linear(args.snr_db))
    for t in range(args.trials):
        r = root.substream(t)
        ch = sample_channel(code.n_t, args.nr, r, snr=snr)
        s = cons.sample(len(code.weights), r)
        Y = transmit(code.encode(s), ch, r)
        try:
            sd = decode(Y, ch, code, cons, "sphere")
            cd = decode(Y, ch, code, cons, "conditional")
        except RankDeficient:
            rows.append(f"{t},nan,nan,nan,0,0")
            continue
        bf_metric = float("nan")
        if use_bf:
            bf = brute_force_ml(Y, ch, code, cons)
            bf_metric = bf.metric
            ok &= abs(bf.metric - sd.metric) <= 1e-9 and abs(bf.metric - cd.metric) <= 1e-9
        ok &= abs(sd.metric - cd.metric) <= 1e-9
        rows.append(f"{t},{bf_metric!r},{sd.metric!r},{cd.metric!r},{sd.nodes_visited},{cd.nodes_visited}")
    rows.append(f"# verdict: {'PASS' if ok else 'FAIL'}" + ("" if use_bf else " (brute force skipped)"))
    _emit("\n".join(rows) + "\n", args.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_capacity(args):
    if args.seed is None:
        raise ConfigInvalid("seed", "--seed is required")
    if args.trials < 1:
        raise ConfigInvalid("trials", "must be positive")
    G = None
    if args.code == "silver":
        G = assemble_generator(build_silver(args.nt, args.nr))
    rows = [CSV_HEADER, "snr_db,capacity,cap_stderr,mi,mi_stderr"]
    for i, snr_db in enumerate(args.snr_db):
        snr = float(db_to_linear(snr_db))
        rng = Prng(args.seed).substream(i)
        cap = ergodic_capacity_mc(args.nt, args.nr, snr, args.trials, rng)
        if G is not None:
            mi = stbc_mutual_info_mc(G, args.nt, args.nr, args.nt, snr, args.trials, rng)
            rows.append(f"{snr_db!r},{cap.mean!r},{cap.std_error!r},{mi.mean!r},{mi.std_error!r}")
        else:
            rows.append(f"{snr_db!r},{cap.mean!r},{cap.std_error!r},,")
    _emit("\n".join(rows) + "\n", args.output)
    return EXIT_OK


def _config_from_args(args):
    overrides = {k: getattr(args, k) for k in ("nt", "nr", "M", "snr_db", "trials", "target_errors",
                                                "seed", "phase_deg", "code", "output")}
    if args.config:
        return load_config(args.config, **overrides)
    return SimulationConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_ser(args):
    cfg = _config_from_args(args)
    cfg.require_seed()

    def progress(pt):
        print(f"snr {pt.snr_db:g} dB: {pt.symbol_errors}/{pt.symbols_sent} errors, "
              f"{pt.wall_time:.1f} s", file=sys.stderr)

    points = run_ser_sweep(cfg, progress=progress if args.verbose else None)
    _emit(ser_csv(points, timing=args.timing), cfg.output)
    return EXIT_OK


def cmd_mindet(args):
    cfg = SimulationConfig(nt=args.nt, nr=2, M=args.M)
    sweep = True if args.sweep else None
    try:
        rep = run_mindet(cfg, sweep=sweep, limit=args.limit)
    except SearchTooLarge as exc:
        raise ConfigInvalid("limit", f"{exc}; raise --limit") from None
    _emit(rep.render(), args.output)
    return EXIT_OK if rep.paths_agree and rep.factorized > 0 else EXIT_FAIL


def cmd_verify(args):
    cfg = SimulationConfig(nt=args.nt, nr=args.nr, phase_deg=args.phase_deg)
    code = None
    if args.weights:
        try:
            with open(args.weights) as fh:
                code = code_from_text(fh.read())
        except OSError as exc:
            raise ConfigInvalid("weights", str(exc)) from None
        except ValueError as exc:
            raise ConfigInvalid("weights", str(exc)) from None
    rep = run_verification(cfg, code=code, r_trials=args.r_trials)
    _emit(rep.render(), args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser ------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="silverforge", description=__doc__.strip().splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        return sp

    sp = common(sub.add_parser("frame", help="dump the anticommuting frame"))
    sp.add_argument("--a", type=int, required=True)
    sp.set_defaults(func=cmd_frame)

    sp = common(sub.add_parser("build", help="dump the rate-1, 4-group code"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--rotated", action="store_true", help="apply the W^T V rotation")
    sp.set_defaults(func=cmd_build)

    sp = common(sub.add_parser("silver", help="dump a Silver code with its generator and checks"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--nr", type=int, required=True)
    sp.add_argument("--phase", type=float, default=None, help="even-layer phase in degrees")
    sp.set_defaults(func=cmd_silver)

    sp = common(sub.add_parser("decode-selftest", help="compare the three decoders"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--nr", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--snr-db", type=float, default=10.0)
    sp.add_argument("--M", type=int, default=4)
    sp.add_argument("--code", choices=("silver", "rate1"), default="silver")
    sp.set_defaults(func=cmd_decode_selftest)

    sp = common(sub.add_parser("capacity", help="ergodic capacity and code mutual information"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--nr", type=int, required=True)
    sp.add_argument("--code", choices=("silver", "none"), default="silver")
    sp.add_argument("--snr-db", type=_float_list, required=True)
    sp.add_argument("--trials", type=int, default=10000)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("ser", help="symbol error rate sweep")
    sp.add_argument("--config", help="JSON file with SimulationConfig fields")
    sp.add_argument("--nt", type=int)
    sp.add_argument("--nr", type=int)
    sp.add_argument("--code", choices=("silver", "rate1"))
    sp.add_argument("--M", type=int)
    sp.add_argument("--snr-db", dest="snr_db", type=_float_list)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--target-errors", dest="target_errors", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--phase-deg", dest="phase_deg", type=float)
    sp.add_argument("--output", "-o")
    sp.add_argument("--timing", action="store_true", help="add a wall_time column")
    sp.add_argument("--verbose", "-v", action="store_true")
    sp.set_defaults(func=cmd_ser)

    sp = common(sub.add_parser("mindet", help="minimum determinant and phase sweep"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--M", type=int, default=4)
    sp.add_argument("--sweep", action="store_true", help="force the phase sweep")
    sp.add_argument("--limit", type=int, default=None, help="largest search size allowed")
    sp.set_defaults(func=cmd_mindet)

    sp = common(sub.add_parser("verify", help="run the verification bundle"))
    sp.add_argument("--nt", type=int, required=True)
    sp.add_argument("--nr", type=int, required=True)
    sp.add_argument("--phase-deg", dest="phase_deg", type=float)
    sp.add_argument("--weights", help="verify a weight file instead of the built code")
    sp.add_argument("--r-trials", dest="r_trials", type=int, default=20)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigInvalid, UnsupportedSize) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SilverforgeError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
