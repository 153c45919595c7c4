"""
Rate-1, 4-group decodable codes for ``n_t = 2**a`` transmit antennas.

Weight layout (0-based, group-major)::

    group 0:  B_0 = I, B_1, ..., B_{q-1}        (q = n_t / 2)
    group m:  B_i @ H_m                         (m = 1, 2, 3)

where ``B_i`` run over all products of the commuting Hermitian set
``{jF4F5, jF6F7, ..., jF_{2a-2}F_{2a-1}, F1F2F3}`` and ``H_1, H_2, H_3`` are
``F1, F2, F3`` (``F1, F2, F1F2`` when ``a = 1``).  Group-0 weights are
diagonal with ``+-1`` entries, and the pattern of their odd diagonal entries
gives the orthogonal matrix ``W``.  Each group's real symbols are sent through
``W^T V`` so that the minimum determinant becomes a power of the minimum
product distance of the rotated lattice ``V Z^q``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, SearchTooLarge, StructureViolation, UnsupportedSize
from .frames import build_frame
from .linalg import det_complex, tilde_vec, vec

__all__ = [
    "LinearDispersionCode",
    "GroupReport",
    "RotationPair",
    "TABULATED_V",
    "build_rate1_4group",
    "verify_g_group",
    "extract_W",
    "rotation_pair",
    "rotate_code",
    "encode_layer",
    "min_determinant",
    "exhaustive_min_determinant",
    "polar_orthonormalize",
]

TOL = 1e-12
MAX_DIFFERENCE_VECTORS = 2_000_000


@dataclass(frozen=True)
class LinearDispersionCode:
    """
    ``S = power_scale * sum_i s_i A_i`` over real symbols ``s_i``.

    ``weights`` are kept unscaled (unitary times a unit phase for every code
    built here); ``power_scale`` brings ``sum tr(A_i A_i^H)`` to ``2 n_t T``.
    ``groups`` lists the decoding groups as tuples of weight indices and
    ``layer_tags[i]`` is the layer that weight ``i`` belongs to.
    """

    n_t: int
    T: int
    weights: tuple
    groups: tuple
    layer_tags: tuple
    power_scale: float = 1.0
    name: str = ""
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        ws = tuple(np.asarray(w, dtype=np.complex128) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if len(ws) % 2:
            raise DimensionMismatch("a code needs an even number of real weights")
        for w in ws:
            if w.shape != (self.n_t, self.T):
                raise DimensionMismatch(f"weight shape {w.shape} != ({self.n_t}, {self.T})")
        if len(self.layer_tags) != len(ws):
            raise DimensionMismatch("layer_tags must tag every weight")
        flat = sorted(i for g in self.groups for i in g)
        if flat != list(range(len(ws))):
            raise DimensionMismatch("groups must partition the weight indices")

    @property
    def k(self):
        """Number of complex symbols."""
        return len(self.weights) // 2

    @property
    def n_layers(self):
        return max(self.layer_tags) + 1

    @property
    def rate(self):
        return self.k / self.T

    @property
    def scaled_weights(self):
        return tuple(self.power_scale * w for w in self.weights)

    def weight_array(self, scaled=True):
        ws = self.scaled_weights if scaled else self.weights
        return np.stack(ws)

    def power_sum(self):
        """``sum_i tr(A_i A_i^H)`` of the power-normalized weights."""
        return float(sum(np.vdot(w, w).real for w in self.scaled_weights))

    def layer(self, index):
        """Sub-code made of one layer's weights."""
        idx = [i for i, t in enumerate(self.layer_tags) if t == index]
        pos = {old: new for new, old in enumerate(idx)}
        groups = tuple(tuple(pos[i] for i in g) for g in self.groups if g and g[0] in pos)
        labels = tuple(self.labels[i] for i in idx) if self.labels else ()
        return LinearDispersionCode(
            n_t=self.n_t, T=self.T, weights=tuple(self.weights[i] for i in idx),
            groups=groups, layer_tags=(0,) * len(idx), power_scale=1.0,
            name=f"{self.name}[layer {index}]", labels=labels,
        )

    def encode(self, s):
        s = np.asarray(s, dtype=float)
        if s.shape[-1] != len(self.weights):
            raise DimensionMismatch(f"expected {len(self.weights)} real symbols, got {s.shape[-1]}")
        return self.power_scale * np.tensordot(s, self.weight_array(scaled=False), axes=(-1, 0))

    def generator_columns(self, scaled=True):
        return np.column_stack([tilde_vec(vec(w)) for w in (self.scaled_weights if scaled else self.weights)])


# -- construction -------------------------------------------------------------

def _commuting_set(frame):
    """``[jF4F5, jF6F7, ..., F1F2F3]`` with labels."""
    a = frame.a
    items = []
    for m in range(2, a):
        items.append((1j * frame[2 * m] @ frame[2 * m + 1], f"jF{2 * m}F{2 * m + 1}"))
    if a >= 2:
        items.append((frame[1] @ frame[2] @ frame[3], "F1F2F3"))
    return items


def _heads(frame):
    if frame.a == 1:
        return [(frame[1], "F1"), (frame[2], "F2"), (frame[1] @ frame[2], "F1F2")]
    return [(frame[1], "F1"), (frame[2], "F2"), (frame[3], "F3")]


def build_rate1_4group(a):
    """Rate-1, 4-group decodable code for ``2**a`` antennas (``2**(a+1)`` weights)."""
    if not 1 <= a <= 4:
        raise UnsupportedSize(f"exponent a must be in [1, 4], got {a}")
    frame = build_frame(a)
    n = frame.n
    S = _commuting_set(frame)
    group0 = []
    for idx in range(2 ** len(S)):
        M = np.eye(n, dtype=np.complex128)
        names = []
        for b, (mat, name) in enumerate(S):
            if idx >> b & 1:
                M = M @ mat
                names.append(name)
        group0.append((M, "*".join(names) or "I"))
    weights, labels = [], []
    for M, name in group0:
        weights.append(M)
        labels.append(name)
    for H, hname in _heads(frame):
        for M, name in group0:
            weights.append(M @ H)
            labels.append(hname if name == "I" else f"{name}*{hname}")
    q = len(group0)
    groups = tuple(tuple(range(p * q, (p + 1) * q)) for p in range(4))
    return LinearDispersionCode(
        n_t=n, T=n, weights=tuple(weights), groups=groups,
        layer_tags=(0,) * len(weights), name=f"rate1-4group-{n}", labels=tuple(labels),
    )


# -- verification -------------------------------------------------------------

@dataclass
class GroupReport:
    """Largest Frobenius residual per condition.

    With ``q`` weights per group, ``B_0 = I`` and group heads ``B_h``
    (``h = q, 2q, 3q``):

    * ``c1``: first-group weights square to ``I``
    * ``c2``: heads square to ``-I``
    * ``c3``: first-group weights commute with each other
    * ``c4``: first-group weights commute with the heads
    * ``c5``: heads anticommute pairwise
    * ``c6``: ``B_{h+i} = B_i B_h``
    * ``cross_group``: ``A_i A_j^H + A_j A_i^H = 0`` across groups
    """

    deviations: dict
    tol: float = TOL

    @property
    def passed(self):
        return all(v <= self.tol for v in self.deviations.values())

    def failures(self):
        return [k for k, v in self.deviations.items() if v > self.tol]

    @property
    def cross_group_ok(self):
        return self.deviations["cross_group"] <= self.tol


def verify_g_group(code, g=4, normalize=True, tol=TOL):
    """
    Check the sufficient conditions for g-group decodability on a code whose
    weights are stored group by group, first group starting with ``I``.

    With ``normalize`` the weights are first left-multiplied by ``A_1^{-1}``
    so that a layer obtained by multiplying a g-group code with a unitary
    matrix is judged on the underlying relations.  The cross-group check
    always uses the weights as given.
    """
    K = len(code.weights)
    if K % g:
        raise ValueError(f"{K} weights cannot be split into {g} groups")
    q = K // g
    A = list(code.weights)
    n = code.n_t
    if normalize and A[0].shape[0] == A[0].shape[1]:
        inv = np.linalg.inv(A[0])
        B = [inv @ w for w in A]
    else:
        B = A
    eye = np.eye(n)
    heads = [m * q for m in range(1, g)]
    dev = {f"c{i}": 0.0 for i in range(1, 7)}

    def upd(key, val):
        dev[key] = max(dev[key], float(val))

    for i in range(q):
        upd("c1", np.linalg.norm(B[i] @ B[i] - eye))
    for h in heads:
        upd("c2", np.linalg.norm(B[h] @ B[h] + eye))
    for i in range(q):
        for j in range(q):
            upd("c3", np.linalg.norm(B[i] @ B[j] - B[j] @ B[i]))
        for h in heads:
            upd("c4", np.linalg.norm(B[i] @ B[h] - B[h] @ B[i]))
    for h1 in heads:
        for h2 in heads:
            if h1 != h2:
                upd("c5", np.linalg.norm(B[h1] @ B[h2] + B[h2] @ B[h1]))
    for h in heads:
        for i in range(q):
            upd("c6", np.linalg.norm(B[h + i] - B[i] @ B[h]))
    cross = 0.0
    for i in range(K):
        for j in range(i + 1, K):
            if i // q != j // q:
                Sij = A[i] @ A[j].conj().T + A[j] @ A[i].conj().T
                cross = max(cross, float(np.linalg.norm(Sij)))
    dev["cross_group"] = cross
    return GroupReport(deviations=dev, tol=tol)


# -- rotations ----------------------------------------------------------------

# Four-decimal rotations maximizing the minimum product distance of V Z^q.
TABULATED_V = {
    2: np.array([[1.0]]),
    4: np.array([[0.8507, -0.5257],
                 [0.5257, 0.8507]]),
    8: np.array([[-0.3664, -0.7677, 0.4231, 0.3121],
                 [-0.2264, -0.4745, -0.6846, -0.5050],
                 [-0.4745, 0.2264, -0.5050, 0.6846],
                 [-0.7677, 0.3664, 0.3121, -0.4231]]),
}


def polar_orthonormalize(V):
    """Closest orthogonal matrix to ``V`` in Frobenius norm."""
    U, _, Vt = np.linalg.svd(np.asarray(V, dtype=float))
    return U @ Vt


def extract_W(code):
    """
    ``sqrt(2/n_t) * w`` with ``w[j, i]`` the ``(2j)``-th diagonal entry (0-based)
    of group-0 weight ``i``.
    """
    n = code.n_t
    q = n // 2
    group0 = [code.weights[i] for i in code.groups[0]]
    if len(group0) != q:
        raise StructureViolation(f"group 0 has {len(group0)} weights, expected {q}")
    for idx, A in enumerate(group0):
        d = np.diag(A)
        if np.abs(A - np.diag(d)).max() > TOL:
            raise StructureViolation(f"group-0 weight {idx} is not diagonal")
        if np.abs(d.imag).max() > TOL or np.abs(np.abs(d.real) - 1).max() > TOL:
            raise StructureViolation(f"group-0 weight {idx} has entries other than +-1")
        if np.abs(d[0::2] - d[1::2]).max() > TOL:
            raise StructureViolation(f"group-0 weight {idx} breaks the paired-diagonal pattern")
    w = np.array([[np.diag(A)[2 * j].real for A in group0] for j in range(q)])
    return np.sqrt(2.0 / n) * w


@dataclass(frozen=True)
class RotationPair:
    """``W`` from the code structure and ``V`` as published (four decimals).

    ``R_enc`` uses the polar projection of ``V`` so encoding is exactly
    orthogonal; the projection moves ``V`` by less than its rounding."""

    W: np.ndarray
    V: np.ndarray

    @property
    def V_orth(self):
        return polar_orthonormalize(self.V)

    @property
    def R_enc(self):
        return self.W.T @ self.V_orth

    @property
    def size(self):
        return self.W.shape[0]


def rotation_pair(n_t, V=None):
    a = int(n_t).bit_length() - 1
    if 2 ** a != n_t or not 1 <= a <= 4:
        raise UnsupportedSize(f"n_t must be a power of two in [2, 16], got {n_t}")
    W = extract_W(build_rate1_4group(a))
    if V is None:
        if n_t not in TABULATED_V:
            raise UnsupportedSize(f"no published rotation for n_t = {n_t}; pass V explicitly")
        V = TABULATED_V[n_t]
    V = np.asarray(V, dtype=float)
    if V.shape != W.shape:
        raise DimensionMismatch(f"V must be {W.shape}, got {V.shape}")
    return RotationPair(W=W, V=V.copy())


def rotate_code(code, rot):
    """Weights ``A'_{p,i} = sum_j R_enc[j, i] A_{p,j}`` so that PAM symbols can be
    fed directly (the rotated encoding written as a plain dispersion code)."""
    q = rot.size
    if any(len(g) != q for g in code.groups):
        raise DimensionMismatch(f"every group must hold {q} weights")
    Rm = rot.R_enc
    weights = list(code.weights)
    for g in code.groups:
        block = [code.weights[i] for i in g]
        for col, idx in enumerate(g):
            weights[idx] = sum(Rm[j, col] * block[j] for j in range(q))
    return replace(code, weights=tuple(weights), name=f"{code.name}-rotated", labels=())


def encode_layer(y, rot, code):
    """Codeword of the rate-1 code for PAM vector ``y`` (length ``2 n_t``)."""
    y = np.asarray(y, dtype=float)
    q = rot.size
    if y.shape[-1] != 2 * code.n_t or len(code.weights) != 4 * q:
        raise DimensionMismatch(f"expected {2 * code.n_t} PAM values, got {y.shape[-1]}")
    Rm = rot.R_enc
    s = np.empty_like(y)
    for p, g in enumerate(code.groups):
        s[..., list(g)] = y[..., p * q:(p + 1) * q] @ Rm.T
    return code.encode(s)


# -- coding gain --------------------------------------------------------------

def _difference_chunks(cons, dim, limit, chunk=50000):
    """Nonzero difference vectors in chunks, one of each ``+-`` pair.

    Vectors are kept when their first nonzero entry is positive, since ``dS``
    and ``-dS`` give the same determinant."""
    diffs = cons.differences
    q = len(diffs)
    count = q ** dim
    if count > limit:
        raise SearchTooLarge(f"{count} difference vectors exceed the limit of {limit}")
    powers = q ** np.arange(dim - 1, -1, -1)
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count))
        grid = diffs[(idx[:, None] // powers) % q]
        nz = grid != 0
        keep = nz.any(axis=1)
        first = np.argmax(nz, axis=1)
        keep &= grid[np.arange(len(grid)), first] > 0
        if keep.any():
            yield grid[keep]


def exhaustive_min_determinant(weights, cons, limit=MAX_DIFFERENCE_VECTORS, chunk=20000):
    """``min det(dS dS^H)`` over every nonzero difference vector of a code with
    the given (already scaled) weights."""
    W = np.stack(weights)
    best = np.inf
    for grid in _difference_chunks(cons, len(W), limit, chunk):
        dS = np.tensordot(grid, W, axes=(1, 0))
        if dS.shape[1] == dS.shape[2]:
            vals = np.abs(det_complex(dS)) ** 2
        else:
            vals = det_complex(dS @ np.conj(np.swapaxes(dS, 1, 2))).real
        best = min(best, float(vals.min()))
    return best


def min_determinant(code, rot, cons, method="factorized", group=0, limit=MAX_DIFFERENCE_VECTORS):
    """
    Minimum of ``det(dS dS^H)`` for the rotated rate-1 code.

    ``method="factorized"`` searches one group's difference vectors and
    evaluates the product of fourth powers of the rotated coordinates (only
    group ``group`` is nonzero).  ``method="exhaustive"`` computes every
    determinant of full codeword differences directly and is limited to
    ``n_t <= 4``.
    """
    n = code.n_t
    q = rot.size
    if method == "factorized":
        g0 = [code.weights[i] for i in code.groups[0]]
        d = np.array([np.diag(A).real for A in g0])  # (q, n)
        # group p weights are group-0 weights times a unitary head, so every
        # group gives the same determinants as group 0
        best = np.inf
        for grid in _difference_chunks(cons, q, limit):
            sums = (grid @ rot.R_enc.T) @ d[:, 0::2]
            best = min(best, float(np.prod(sums ** 4, axis=1).min()))
        return best * code.power_scale ** (2 * n)
    if method == "exhaustive":
        if n > 4:
            raise SearchTooLarge("exhaustive coding-gain search is limited to n_t <= 4")
        rc = rotate_code(code, rot)
        return exhaustive_min_determinant(rc.scaled_weights, cons, limit=limit)
    if method == "single-group":
        rc = rotate_code(code, rot)
        weights = [rc.scaled_weights[i] for i in rc.groups[group]]
        return exhaustive_min_determinant(weights, cons, limit=limit)
    raise ValueError(f"unknown method {method!r}")
