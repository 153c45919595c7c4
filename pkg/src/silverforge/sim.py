"""
Experiment drivers: SER sweeps, the verification bundle and coding-gain
reports.  Every random draw comes from ``Prng(seed).substream(point, trial,
attempt)`` so results do not depend on execution order.
"""

import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .channel import Constellation, Prng, db_to_linear, sample_channel, transmit
from .decoder import decode, r_structure_report
from .errors import ConfigInvalid, RankDeficient, SilverforgeError
from .frames import build_frame, verify_frame
from .group_code import (LinearDispersionCode, build_rate1_4group, exhaustive_min_determinant,
                         min_determinant, rotation_pair, verify_g_group)
from .info import expansion_I1
from .linalg import read_matrices
from .silver import (assemble_generator, build_silver, hr_pair_census,
                     self_interference_trace_check, trace_column_gap)

__all__ = [
    "CSV_HEADER",
    "SimulationConfig",
    "SerPoint",
    "CheckResult",
    "VerificationReport",
    "MindetReport",
    "build_code",
    "run_ser_sweep",
    "ser_csv",
    "run_verification",
    "run_mindet",
    "load_config",
]

CSV_HEADER = "# silverforge v1"
CODES = ("silver", "rate1", "none")
PHASE_GRID = tuple(range(0, 91, 15))
MAX_RESAMPLES = 100


@dataclass
class SimulationConfig:
    nt: int = 2
    nr: int = 2
    code: str = "silver"
    M: int = 4
    snr_db: list = field(default_factory=lambda: [10.0])
    trials: int = 1000
    target_errors: int = None
    max_trials: int = 1_000_000
    seed: int = None
    phase_deg: float = None
    decoder: str = "conditional"
    output: str = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.nt not in (2, 4, 8, 16):
            raise ConfigInvalid("nt", f"must be one of 2, 4, 8, 16, got {self.nt!r}")
        if not isinstance(self.nr, (int, np.integer)) or self.nr < 1:
            raise ConfigInvalid("nr", f"must be a positive integer, got {self.nr!r}")
        if self.code not in CODES:
            raise ConfigInvalid("code", f"must be one of {', '.join(CODES)}, got {self.code!r}")
        if not isinstance(self.M, (int, np.integer)) or self.M < 4 or math.isqrt(self.M) ** 2 != self.M:
            raise ConfigInvalid("M", f"QAM size must be a perfect square >= 4, got {self.M!r}")
        try:
            self.snr_db = [float(v) for v in self.snr_db]
        except (TypeError, ValueError):
            raise ConfigInvalid("snr_db", f"must be a list of numbers, got {self.snr_db!r}") from None
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 0:
            raise ConfigInvalid("trials", f"must be a non-negative integer, got {self.trials!r}")
        if self.target_errors is not None and self.target_errors < 100:
            raise ConfigInvalid("target_errors", f"must be at least 100, got {self.target_errors}")
        if self.max_trials < 1:
            raise ConfigInvalid("max_trials", "must be positive")
        if self.seed is not None and not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigInvalid("seed", f"must fit in 64 bits, got {self.seed}")
        if self.decoder not in ("conditional", "sphere", "brute"):
            raise ConfigInvalid("decoder", f"unknown decoder {self.decoder!r}")

    @property
    def constellation(self):
        return Constellation("QAM", int(self.M))

    def require_seed(self):
        if self.seed is None:
            raise ConfigInvalid("seed", "a seed is required for Monte-Carlo runs")
        return int(self.seed)


def load_config(path, **overrides):
    """Read a JSON config; keys are :class:`SimulationConfig` field names."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid("config", str(exc)) from None
    known = {f.name for f in fields(SimulationConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown config key")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return SimulationConfig(**data)


def build_code(cfg):
    if cfg.code == "silver":
        return build_silver(cfg.nt, cfg.nr, cfg.phase_deg)
    if cfg.code == "rate1":
        return build_silver(cfg.nt, 1)
    raise ConfigInvalid("code", "no code selected")


# -- SER ---------------------------------------------------------------------------

@dataclass
class SerPoint:
    snr_db: float
    symbol_errors: int
    symbols_sent: int
    ser: float
    wall_time: float = 0.0
    trials: int = 0
    resampled: int = 0


def count_symbol_errors(sent, decided, n_t):
    """Complex-symbol errors; complex symbol ``m`` of a layer is
    ``y[m] + j y[n_t + m]``."""
    s = np.asarray(sent).reshape(-1, 2 * n_t)
    d = np.asarray(decided).reshape(-1, 2 * n_t)
    wrong = (s != d)
    return int(np.count_nonzero(wrong[:, :n_t] | wrong[:, n_t:]))


def run_ser_sweep(cfg, progress=None):
    """SER per SNR point.  Stops after ``cfg.trials`` blocks, or, when
    ``target_errors`` is set, once that many symbol errors have been seen
    (capped at ``max_trials`` blocks)."""
    seed = cfg.require_seed()
    if cfg.code == "none":
        raise ConfigInvalid("code", "SER needs a code")
    code = build_code(cfg)
    cons = cfg.constellation
    root = Prng(seed)
    points = []
    for p_idx, snr_db in enumerate(cfg.snr_db):
        t0 = time.perf_counter()
        snr = float(db_to_linear(snr_db))
        errors = sent = resampled = 0
        trial = 0
        while True:
            if cfg.target_errors is None:
                if trial >= cfg.trials:
                    break
            elif errors >= cfg.target_errors or trial >= cfg.max_trials:
                break
            s, d, extra = _simulate(code, cfg.nr, cons, snr, root.substream(p_idx, trial), cfg.decoder)
            errors += count_symbol_errors(s, d, code.n_t)
            sent += code.k
            resampled += extra
            trial += 1
        if trial == 0:
            continue
        pt = SerPoint(snr_db=float(snr_db), symbol_errors=errors, symbols_sent=sent,
                      ser=errors / sent, wall_time=time.perf_counter() - t0, trials=trial,
                      resampled=resampled)
        points.append(pt)
        if progress is not None:
            progress(pt)
    return points


def _simulate(code, n_r, cons, snr, rng, method):
    for attempt in range(MAX_RESAMPLES):
        r = rng.substream(attempt)
        ch = sample_channel(code.n_t, n_r, r, snr=snr)
        s = cons.sample(len(code.weights), r)
        Y = transmit(code.encode(s), ch, r)
        try:
            res = decode(Y, ch, code, cons, method)
        except RankDeficient:
            continue
        return s, res.symbols, attempt
    raise RankDeficient("channel stayed rank deficient after repeated resampling")


def ser_csv(points, timing=False):
    """CSV text; ``wall_time`` is left out unless ``timing`` so repeated runs
    produce identical bytes."""
    out = io.StringIO()
    cols = ["snr_db", "symbol_errors", "symbols_sent", "ser"] + (["wall_time"] if timing else [])
    out.write(CSV_HEADER + "\n")
    out.write(",".join(cols) + "\n")
    for p in points:
        row = asdict(p)
        out.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols) + "\n")
    return out.getvalue()


# -- verification ------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def render(self):
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}" for c in self.checks]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _check(checks, name, fn):
    try:
        ok, detail = fn()
    except SilverforgeError as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    checks.append(CheckResult(name, bool(ok), detail))


def verify_code(code, n_r, seed=0, r_trials=20, with_structure=True):
    """Checks that apply to any code: power, orthogonality across groups,
    tracelessness, generator rank, and the R-matrix pattern."""
    checks = []
    _check(checks, "power", lambda: (
        abs(code.power_sum() - 2 * code.n_t * code.T) <= 1e-9 * code.n_t * code.T,
        f"sum tr(A A^H) = {code.power_sum():.12g}, target {2 * code.n_t * code.T}"))

    def cross():
        worst = 0.0
        for layer in range(code.n_layers):
            worst = max(worst, verify_g_group(code.layer(layer)).deviations["cross_group"])
        return worst <= 1e-12, f"max cross-group residual {worst:.3e}"
    _check(checks, "cross_group_hr", cross)

    def census():
        zero, total = hr_pair_census(code)
        return zero > 0, f"{zero} of {total} pairs vanish"
    _check(checks, "hr_census", census)
    _check(checks, "tracelessness", lambda: (
        self_interference_trace_check(code) <= 1e-9,
        f"max |tr S_ij| = {self_interference_trace_check(code):.3e}"))
    _check(checks, "trace_column_equivalence", lambda: (
        trace_column_gap(code) <= 1e-9, f"max gap {trace_column_gap(code):.3e}"))

    def generator():
        G = assemble_generator(code)
        rank = G.rank()
        dev = G.gram_deviation()
        return rank == G.shape[1] and dev <= 1e-9, f"rank {rank}/{G.shape[1]}, max |G^T G - I| = {dev:.3e}"
    _check(checks, "generator", generator)
    _check(checks, "first_coefficient", lambda: (
        abs(expansion_I1(code, n_r) - n_r) <= 1e-12, f"I1 = {expansion_I1(code, n_r):.15g}"))
    if with_structure:
        def structure():
            rep = r_structure_report(code, r_trials, Prng(seed), n_r=n_r)
            return rep.passed, f"max leak {rep.max_leak:.3e} over {r_trials} channels"
        _check(checks, "r_structure", structure)
    return checks


def run_verification(cfg, code=None, r_trials=20):
    """Frame, group conditions, and the :func:`verify_code` bundle.  A
    user-supplied ``code`` skips the construction-specific checks."""
    checks = []
    seed = 0 if cfg.seed is None else int(cfg.seed)
    if code is None:
        a = int(cfg.nt).bit_length() - 1
        _check(checks, "frame", lambda: (
            verify_frame(build_frame(a)).passed,
            f"max deviation {verify_frame(build_frame(a)).max_deviation:.3e}"))
        _check(checks, "group_conditions", lambda: (
            verify_g_group(build_rate1_4group(a)).passed,
            ", ".join(f"{k}={v:.1e}" for k, v in verify_g_group(build_rate1_4group(a)).deviations.items())))

        def layers():
            plain = build_silver(cfg.nt, cfg.nr, cfg.phase_deg, rotate=False)
            bad = [l for l in range(plain.n_layers) if not verify_g_group(plain.layer(l)).passed]
            return not bad, f"{plain.n_layers} layers, failing: {bad or 'none'}"
        _check(checks, "layer_conditions", layers)
        code = build_silver(cfg.nt, cfg.nr, cfg.phase_deg)
    n_r = cfg.nr
    checks += verify_code(code, n_r, seed=seed, r_trials=r_trials,
                          with_structure=code.groups and all(len(g) == code.n_t // 2 for g in code.groups))
    return VerificationReport(checks)


def code_from_text(text, n_t=None):
    """Rebuild a code from the ``build``/``silver`` text dump: matrices, then
    optional ``group i: idx ...`` and ``# layer i: idx ...`` lines.  Anything
    from a ``# generator`` line on is ignored."""
    text = text.split("# generator", 1)[0]
    mats = read_matrices(text)
    if not mats:
        raise ConfigInvalid("weights", "no matrices found")
    groups, layers = [], {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("group"):
            head, _, body = line.partition(":")
            groups.append(tuple(int(t) for t in body.split()))
        elif line.startswith("# layer"):
            head, _, body = line[2:].partition(":")
            lid = int(head.split()[1])
            for t in body.split():
                layers[int(t)] = lid
    if not groups:
        groups = [tuple(range(len(mats)))]
    tags = tuple(layers.get(i, 0) for i in range(len(mats)))
    n_layers = max(tags) + 1
    try:
        return LinearDispersionCode(
            n_t=mats[0].shape[0], T=mats[0].shape[1], weights=tuple(mats), groups=tuple(groups),
            layer_tags=tags, power_scale=1.0 / math.sqrt(n_layers), name="loaded")
    except SilverforgeError as exc:
        raise ConfigInvalid("weights", str(exc)) from None


# -- coding gain -------------------------------------------------------------------

@dataclass
class MindetReport:
    n_t: int
    factorized: float
    exhaustive: float = None
    sweep: dict = field(default_factory=dict)

    @property
    def paths_agree(self):
        if self.exhaustive is None:
            return True
        return abs(self.factorized - self.exhaustive) <= 1e-9 * max(abs(self.exhaustive), 1e-300)

    @property
    def best_phases(self):
        if not self.sweep:
            return []
        top = max(self.sweep.values())
        return [p for p, v in self.sweep.items() if v >= top * (1 - 1e-9)]

    def render(self):
        lines = [f"n_t = {self.n_t}", f"min det (factorized) = {self.factorized!r}"]
        if self.exhaustive is not None:
            lines.append(f"min det (exhaustive) = {self.exhaustive!r}")
            lines.append(f"paths agree: {self.paths_agree}")
        if self.sweep:
            lines.append("phase_deg,min_det")
            lines += [f"{p},{v!r}" for p, v in self.sweep.items()]
            lines.append(f"best phases: {self.best_phases}")
        return "\n".join(lines) + "\n"


def phase_sweep(n_t, cons, phases=PHASE_GRID, limit=None):
    """Minimum determinant of the two-layer code for each phase (degrees)."""
    kw = {} if limit is None else {"limit": limit}
    out = {}
    for ph in phases:
        code = build_silver(n_t, 2, phase_deg=ph, check=False)
        out[ph] = exhaustive_min_determinant(code.scaled_weights, cons, **kw)
    return out


def run_mindet(cfg, sweep=None, limit=None):
    """Dual-path minimum determinant of the rate-1 code and, for two-layer
    codes with 4-QAM, the phase sweep.  ``sweep=None`` sweeps only for two
    antennas; four antennas need ``limit`` of at least ``3**16``."""
    if sweep is None:
        sweep = cfg.nt == 2
    if cfg.M < 4:
        raise ConfigInvalid("M", "empty constellation")
    cons = cfg.constellation
    a = int(cfg.nt).bit_length() - 1
    code = build_rate1_4group(a)
    rot = rotation_pair(cfg.nt)
    kw = {} if limit is None else {"limit": limit}
    rep = MindetReport(n_t=cfg.nt, factorized=min_determinant(code, rot, cons, "factorized", **kw))
    if cfg.nt <= 4:
        rep.exhaustive = min_determinant(code, rot, cons, "exhaustive", **kw)
    if sweep and cfg.nt <= 4 and cfg.M == 4:
        rep.sweep = phase_sweep(cfg.nt, cons, limit=limit)
    return rep
