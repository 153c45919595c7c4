"""
Generalized Silver codes: stack phase-rotated copies of the rate-1, 4-group
code, one copy per layer, up to ``min(n_t, n_r)`` layers.

Layer ``l`` is ``phase_l * M_l @ G_1`` where ``G_1`` is the (rotated) rate-1
code.  For ``n_t >= 4`` the multipliers ``M_l`` run over the products of
``{F4, F6, ..., F_{2a}}`` in binary order (``I, F4, F6, F4F6, F8, ...``) for
the first ``n_t/2`` layers and over ``j`` times the same list afterwards.
Every second layer carries the phase ``e^{j pi/4}``.  With two antennas the
second layer is ``j G_1 U`` for the fixed unitary ``U``.

The assembled code keeps the weights unscaled and records
``power_scale = 1/sqrt(n_layers)`` so the transmitted codewords meet the
average-energy constraint.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DependentLayers, DimensionMismatch, UnsupportedSize
from .frames import build_frame
from .group_code import TABULATED_V, LinearDispersionCode, build_rate1_4group, rotate_code, rotation_pair
from .linalg import tilde_vec, vec

__all__ = [
    "LayerMultiplier",
    "LayerPlan",
    "GeneratorMatrix",
    "SILVER_U",
    "default_layer_plan",
    "extend_layers",
    "build_silver2",
    "build_silver",
    "assemble_generator",
    "hr_pair_census",
    "self_interference_trace_check",
    "trace_column_gap",
]

HR_TOL = 1e-12
RANK_TOL = 1e-9
DEFAULT_PHASE_DEG = 45.0

SILVER_U = np.array([[1 + 1j, 1 + 2j], [-1 + 2j, 1 - 1j]]) / np.sqrt(7)


@dataclass(frozen=True)
class LayerMultiplier:
    label: str
    matrix: np.ndarray
    j_flag: bool = False
    phase_deg: float = 0.0
    side: str = "pre"

    @property
    def phase(self):
        return np.exp(1j * np.deg2rad(self.phase_deg))

    @property
    def full(self):
        """Multiplier including the ``j`` flag and the phase."""
        return (1j if self.j_flag else 1.0) * self.phase * self.matrix

    def apply(self, A):
        M = self.full
        return M @ A if self.side == "pre" else self.phase * (1j if self.j_flag else 1.0) * (A @ self.matrix)

    def describe(self):
        s = ("j" if self.j_flag else "") + self.label
        if self.phase_deg:
            s = f"e^(j{self.phase_deg:g}deg)*{s}"
        return s + (" (post)" if self.side == "post" else "")


@dataclass(frozen=True)
class LayerPlan:
    n_t: int
    n_layers: int
    multipliers: tuple = field(default=())

    def __post_init__(self):
        if not 1 <= self.n_layers <= self.n_t:
            raise UnsupportedSize(f"n_layers must lie in [1, {self.n_t}], got {self.n_layers}")
        if len(self.multipliers) != self.n_layers:
            raise DimensionMismatch("one multiplier per layer is required")
        for m in self.multipliers:
            if m.matrix.shape != (self.n_t, self.n_t):
                raise DimensionMismatch(f"multiplier {m.label} has shape {m.matrix.shape}")

    def describe(self):
        return [m.describe() for m in self.multipliers]


def _binary_products(frame):
    """``I, F4, F6, F4F6, F8, ...``: products of ``{F4, F6, ..., F_{2a}}``."""
    gens = [(frame[2 * k], f"F{2 * k}") for k in range(2, frame.a + 1)]
    out = []
    for idx in range(2 ** len(gens)):
        M = np.eye(frame.n, dtype=np.complex128)
        names = []
        for b, (F, name) in enumerate(gens):
            if idx >> b & 1:
                M = M @ F
                names.append(name)
        out.append((M, "".join(names) or "I"))
    return out


def default_layer_plan(n_t, n_layers, phase_deg=None):
    """
    Layer multipliers.  ``phase_deg`` overrides the phase on every second
    layer (default 45 degrees, none for two antennas).
    """
    if n_t not in (2, 4, 8, 16):
        raise UnsupportedSize(f"n_t must be 2, 4, 8 or 16, got {n_t}")
    if not 1 <= n_layers <= n_t:
        raise UnsupportedSize(f"n_layers must lie in [1, {n_t}], got {n_layers}")
    if n_t == 2:
        ph = 0.0 if phase_deg is None else float(phase_deg)
        mults = [LayerMultiplier("I", np.eye(2, dtype=np.complex128)),
                 LayerMultiplier("U", SILVER_U.astype(np.complex128), j_flag=True, phase_deg=ph, side="post")]
        return LayerPlan(n_t=2, n_layers=n_layers, multipliers=tuple(mults[:n_layers]))
    ph = DEFAULT_PHASE_DEG if phase_deg is None else float(phase_deg)
    frame = build_frame(int(n_t).bit_length() - 1)
    base = _binary_products(frame)
    half = n_t // 2
    mults = []
    for layer in range(n_layers):
        M, label = base[layer % half]
        mults.append(LayerMultiplier(label, M, j_flag=layer >= half,
                                     phase_deg=ph if layer % 2 else 0.0))
    return LayerPlan(n_t=n_t, n_layers=n_layers, multipliers=tuple(mults))


def _unit(A):
    return A / np.linalg.norm(A)


def extend_layers(base, plan, frame=None, check=True):
    """
    Stack ``plan.n_layers`` multiplied copies of ``base``.

    ``check=False`` skips the independence tests (used by the phase sweep,
    where some phases make two layers span the same real subspace).

    Raises
    ------
    DependentLayers
        If the stacked weights are not linearly independent over the reals
        or two layers share a weight up to sign.
    """
    if frame is not None and frame.n != base.n_t:
        raise DimensionMismatch(f"frame size {frame.n} != n_t {base.n_t}")
    if plan.n_t != base.n_t:
        raise DimensionMismatch(f"plan is for {plan.n_t} antennas, code for {base.n_t}")
    K = len(base.weights)
    weights, tags, groups, labels = [], [], [], []
    for layer, mult in enumerate(plan.multipliers):
        for i, A in enumerate(base.weights):
            weights.append(mult.apply(A))
            tags.append(layer)
            if base.labels:
                labels.append(f"{mult.describe()} . {base.labels[i]}")
        groups += [tuple(layer * K + i for i in g) for g in base.groups]
    if check:
        _check_independent(weights, tags)
    return LinearDispersionCode(
        n_t=base.n_t, T=base.T, weights=tuple(weights), groups=tuple(groups),
        layer_tags=tuple(tags), power_scale=1.0 / np.sqrt(plan.n_layers),
        name=f"silver-{base.n_t}x{plan.n_layers}", labels=tuple(labels),
    )


def _check_independent(weights, tags):
    cols = np.column_stack([tilde_vec(vec(w)) for w in weights])
    if cols.shape[0] < cols.shape[1] or np.linalg.matrix_rank(cols, tol=RANK_TOL * np.abs(cols).max()) < cols.shape[1]:
        raise DependentLayers(f"{len(weights)} weights are linearly dependent over the reals")
    units = [_unit(w) for w in weights]
    for i, j in combinations(range(len(weights)), 2):
        if tags[i] == tags[j]:
            continue
        if min(np.linalg.norm(units[i] - units[j]), np.linalg.norm(units[i] + units[j])) < RANK_TOL:
            raise DependentLayers(f"weights {i} and {j} coincide across layers {tags[i]} and {tags[j]}")


def build_silver2(phase_deg=None):
    """Two-antenna Silver code: Alamouti weights then ``j A_i U``."""
    base = build_rate1_4group(1)
    return extend_layers(base, default_layer_plan(2, 2, phase_deg))


def build_silver(n_t, n_r, phase_deg=None, rotate=True, check=True):
    """
    Silver code with ``min(n_t, n_r)`` layers.

    The rate-1 code is rotated with ``W^T V`` when a rotation ``V`` is known
    for ``n_t`` (none is tabulated for 16 antennas, which are left unrotated).
    """
    if n_t not in (2, 4, 8, 16):
        raise UnsupportedSize(f"n_t must be 2, 4, 8 or 16, got {n_t}")
    if n_r < 1:
        raise UnsupportedSize(f"n_r must be positive, got {n_r}")
    a = int(n_t).bit_length() - 1
    base = build_rate1_4group(a)
    if rotate and n_t in TABULATED_V:
        base = rotate_code(base, rotation_pair(n_t))
    plan = default_layer_plan(n_t, min(n_t, n_r), phase_deg)
    return extend_layers(base, plan, check=check)


@dataclass(frozen=True)
class GeneratorMatrix:
    """
    ``G`` has columns ``tilde_vec(vec(A_i)) / sqrt(n_t)`` of the unscaled
    weights, ``transmit`` the columns of the power-scaled weights that are
    actually sent.  They coincide for full-rate codes.
    """

    G: np.ndarray
    normalization: float
    power_scale: float
    transmit: np.ndarray

    @property
    def shape(self):
        return self.G.shape

    def gram_deviation(self):
        """``max |G^T G - I|``."""
        k2 = self.G.shape[1]
        return float(np.abs(self.G.T @ self.G - np.eye(k2)).max())

    def rank(self, tol=RANK_TOL):
        return int(np.linalg.matrix_rank(self.G, tol=tol))


def assemble_generator(code):
    cols = code.generator_columns(scaled=False)
    norm = 1.0 / np.sqrt(code.n_t)
    return GeneratorMatrix(G=norm * cols, normalization=norm, power_scale=code.power_scale,
                           transmit=code.power_scale * cols)


def _hr(Ai, Aj):
    return Ai @ Aj.conj().T + Aj @ Ai.conj().T


def hr_pair_census(code, tol=HR_TOL):
    """Count pairs ``i < j`` with ``A_i A_j^H + A_j A_i^H = 0``."""
    ws = code.weights
    zero = total = 0
    for i, j in combinations(range(len(ws)), 2):
        total += 1
        if np.linalg.norm(_hr(ws[i], ws[j])) <= tol:
            zero += 1
    return zero, total


def self_interference_trace_check(code):
    """``max_{i<j} |tr(A_i A_j^H + A_j A_i^H)|`` over the unscaled weights."""
    W = code.weight_array(scaled=False).reshape(len(code.weights), -1)
    gram = W.conj() @ W.T  # gram[i, j] = tr(A_j A_i^H)
    tr = 2.0 * gram.real
    np.fill_diagonal(tr, 0.0)
    return float(np.abs(tr).max()) if len(W) > 1 else 0.0


def trace_column_gap(code):
    """``max_{i<j} |2 n_t <g_i, g_j> - tr(S_ij)|`` for the normalized generator
    columns ``g_i``; the trace is computed directly from the matrices."""
    G = assemble_generator(code).G
    ws = code.weights
    gap = 0.0
    for i, j in combinations(range(len(ws)), 2):
        t = np.trace(_hr(ws[i], ws[j])).real
        gap = max(gap, abs(2 * code.n_t * float(G[:, i] @ G[:, j]) - t))
    return gap
