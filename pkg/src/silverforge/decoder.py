"""
Maximum-likelihood decoders for real-symbol linear dispersion codes.

All three decoders minimize ``||y - a H_eq s||^2`` with ``a = sqrt(SNR/n_t)``
over real PAM vectors ``s``:

* :func:`brute_force_ml` scores every codeword in the matrix domain,
* :func:`sphere_decode` runs a depth-first Schnorr-Euchner search on the
  triangular factor ``R`` of ``H_eq = QR``,
* :func:`conditional_group_decode` enumerates only the symbols of the later
  layers; the first layer's four groups then separate, and within each group
  the last real symbol is found by rounding.

Symbols are ordered layer by layer, group by group.  With that order the
diagonal block of ``R`` belonging to each layer is ``I_4 (x) T`` with ``T``
upper triangular, for every channel.  The first layer sits in the top-left
corner, which the search visits last.

Ties are broken toward the lexicographically smallest symbol vector (PAM
points ascending).
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .channel import equivalent_channel, received_vector, sample_channel
from .errors import RankDeficient, SearchTooLarge, StructureViolation
from .linalg import qr_decompose
from .silver import assemble_generator

__all__ = [
    "DecodeResult",
    "RStructureReport",
    "brute_force_ml",
    "sphere_decode",
    "conditional_group_decode",
    "decode",
    "qr_front_end",
    "r_structure_report",
    "r_leak",
]

BRUTE_FORCE_LIMIT = 2 ** 20
LEAK_TOL = 1e-9


@dataclass
class DecodeResult:
    symbols: np.ndarray
    metric: float
    nodes_visited: int


def _lex_less(a, b):
    """True when ``a`` precedes ``b`` lexicographically."""
    diff = np.nonzero(a != b)[0]
    return bool(diff.size) and a[diff[0]] < b[diff[0]]


# -- brute force ---------------------------------------------------------------

@lru_cache(maxsize=8)
def _codebook_indices(q, dim):
    """All index vectors in lexicographic order (last coordinate fastest)."""
    grids = np.indices((q,) * dim, dtype=np.uint8).reshape(dim, -1).T
    grids.flags.writeable = False
    return grids


def brute_force_ml(Y, ch, code, cons, chunk=4096):
    """Exhaustive ML over the full codebook, scored as ``||Y - a H S||_F^2``."""
    dim = len(code.weights)
    pam = cons.pam_points
    total = len(pam) ** dim
    if total > BRUTE_FORCE_LIMIT:
        raise SearchTooLarge(f"{total} codewords exceed the brute-force limit of {BRUTE_FORCE_LIMIT}")
    Y = np.asarray(Y, dtype=np.complex128)
    Wt = code.weight_array(scaled=True)
    HW = ch.gain * np.einsum("rn,knt->krt", ch.H, Wt)  # (dim, n_r, T)
    HW = HW.reshape(dim, -1)
    y = Y.reshape(-1)
    idx = _codebook_indices(len(pam), dim)
    best_m, best_s = np.inf, None
    for start in range(0, total, chunk):
        block = pam[idx[start:start + chunk]]
        r = y[None, :] - block @ HW
        m = np.einsum("ij,ij->i", r.real, r.real) + np.einsum("ij,ij->i", r.imag, r.imag)
        i = int(np.argmin(m))
        # strict comparison keeps the earliest (lexicographically smallest) minimizer
        if m[i] < best_m:
            best_m, best_s = float(m[i]), block[i].copy()
    return DecodeResult(symbols=best_s, metric=best_m, nodes_visited=total)


# -- sphere decoding -----------------------------------------------------------

def _se_order(pam, center):
    """Alphabet indices sorted by distance to ``center``, smaller point first on ties."""
    return sorted(range(len(pam)), key=lambda i: (abs(pam[i] - center), pam[i]))


class _Search:
    """Depth-first Schnorr-Euchner search over rows ``lo..hi-1`` of ``R``.

    ``leaf_cost(s)`` adds the cost of whatever lies above ``lo`` once the
    searched coordinates are fixed (zero for a plain sphere decoder)."""

    def __init__(self, y, Ra, pam, lo, leaf_cost=None):
        self.y = y
        self.Ra = Ra
        self.pam = pam
        self.lo = lo
        self.n = Ra.shape[1]
        self.leaf_cost = leaf_cost
        self.best = np.inf
        self.best_s = None
        self.nodes = 0
        self.s = np.zeros(self.n)

    def run(self):
        if self.lo == self.n:
            self._leaf(0.0)
        else:
            self._descend(self.n - 1, 0.0)
        return self

    def _leaf(self, partial):
        extra = 0.0
        vec = self.s.copy()
        if self.leaf_cost is not None:
            extra, vec = self.leaf_cost(self.s, self.best - partial)
        total = partial + extra
        if total < self.best or (total == self.best and _lex_less(vec, self.best_s)):
            self.best, self.best_s = total, vec

    def _descend(self, i, partial):
        Ra, s = self.Ra, self.s
        resid = self.y[i] - Ra[i, i + 1:] @ s[i + 1:]
        center = resid / Ra[i, i]
        for idx in _se_order(self.pam, center):
            self.nodes += 1
            s[i] = self.pam[idx]
            d = resid - Ra[i, i] * s[i]
            p = partial + d * d
            if p > self.best:
                # points further from the center only cost more
                break
            if i == self.lo:
                self._leaf(p)
            else:
                self._descend(i - 1, p)
        s[i] = 0.0


def sphere_decode(y_prime, R, cons, snr, n_t=None):
    """
    Exact ML by Schnorr-Euchner enumeration with an unbounded initial radius.

    ``n_t`` sets the gain ``sqrt(snr/n_t)``; when omitted ``snr`` is taken to
    be the gain-free ratio (``n_t = 1``).
    """
    gain = np.sqrt(snr / (1 if n_t is None else n_t))
    Ra = gain * np.asarray(R, dtype=float)
    srch = _Search(np.asarray(y_prime, dtype=float), Ra, cons.pam_points, lo=0).run()
    return DecodeResult(symbols=srch.best_s, metric=float(srch.best), nodes_visited=srch.nodes)


# -- conditional decoding ------------------------------------------------------

def r_leak(R, n_t, n_layers):
    """Largest entry in the positions that ``I_4 (x) T`` forces to zero, taken
    over every diagonal layer block of ``R``."""
    m = n_t // 2
    size = 2 * n_t
    mask = np.kron(np.eye(4), np.ones((m, m))) == 0
    leak = 0.0
    for layer in range(n_layers):
        sl = slice(layer * size, (layer + 1) * size)
        block = R[sl, sl]
        if block.shape != mask.shape:
            break
        leak = max(leak, float(np.abs(block[mask]).max(initial=0.0)))
    return leak


def _group_solver(z, D, pam, cons, m, budget=np.inf):
    """Minimize ``||z_p - D_p s_p||^2`` for each of the four diagonal blocks.

    The first ``m - 1`` symbols of a group are enumerated, the last one is
    the rounded minimizer of a 1-D convex quadratic.  Gives up (cost ``inf``)
    as soon as the accumulated cost exceeds ``budget``."""
    q = len(pam)
    head = np.empty(4 * m)
    cost = 0.0
    nodes = 0
    for p in range(4):
        sl = slice(p * m, (p + 1) * m)
        Tp, zp = D[sl, sl], z[sl]
        last = Tp[:, m - 1]
        ll = last @ last
        best_c, best_s = np.inf, None
        for idx in product(range(q), repeat=m - 1):
            nodes += 1
            s = np.empty(m)
            s[:m - 1] = pam[list(idx)]
            s[m - 1] = 0.0
            r = zp - Tp @ s
            s[m - 1] = cons.quantize((last @ r) / ll)
            r = r - last * s[m - 1]
            c = r @ r
            if c < best_c:
                best_c, best_s = c, s
        head[sl] = best_s
        cost += best_c
        if cost > budget:
            return np.inf, head, nodes
    return cost, head, nodes


def conditional_group_decode(y_prime, R, code, cons, snr):
    """
    Exact ML exploiting the block structure of ``R``.

    The later layers (rows ``2 n_t`` onward) are searched depth-first; for
    each complete hypothesis the first layer splits into four groups solved
    independently.

    Raises
    ------
    StructureViolation
        If the first-layer block of ``R`` is not ``I_4 (x) T`` within 1e-9.
    """
    n_t = code.n_t
    m = n_t // 2
    h = 2 * n_t
    R = np.asarray(R, dtype=float)
    leak = r_leak(R, n_t, 1)
    if leak > LEAK_TOL:
        raise StructureViolation(f"first-layer block of R leaks {leak:.3e} outside I4 (x) T")
    gain = np.sqrt(snr / n_t)
    Ra = gain * R
    y = np.asarray(y_prime, dtype=float)
    pam = cons.pam_points
    D = Ra[:h, :h]
    head_nodes = [0]

    def leaf_cost(s, budget):
        z = y[:h] - Ra[:h, h:] @ s[h:]
        c, head, nodes = _group_solver(z, D, pam, cons, m, budget)
        head_nodes[0] += nodes
        full = s.copy()
        full[:h] = head
        return c, full

    srch = _Search(y, Ra, pam, lo=h, leaf_cost=leaf_cost).run()
    return DecodeResult(symbols=srch.best_s, metric=float(srch.best),
                        nodes_visited=srch.nodes + head_nodes[0])


# -- front end -----------------------------------------------------------------

def qr_front_end(Y, ch, code):
    """``(y', R, residual)`` with ``residual = ||(I - Q Q^T) y||^2`` so that
    ``metric + residual`` equals the full ML metric."""
    H_eq = equivalent_channel(ch, assemble_generator(code))
    Q, R = qr_decompose(H_eq)
    y = received_vector(Y)
    yp = Q.T @ y
    residual = float(y @ y - yp @ yp)
    return yp, R, max(residual, 0.0)


def decode(Y, ch, code, cons, method="conditional"):
    """Decode one received block; the returned metric is ``||Y - a H S||_F^2``."""
    if method == "brute":
        return brute_force_ml(Y, ch, code, cons)
    yp, R, residual = qr_front_end(Y, ch, code)
    if method == "sphere":
        res = sphere_decode(yp, R, cons, ch.snr, n_t=code.n_t)
    elif method == "conditional":
        res = conditional_group_decode(yp, R, code, cons, ch.snr)
    else:
        raise ValueError(f"unknown decoding method {method!r}")
    res.metric += residual
    return res


# -- structure report ------------------------------------------------------------

@dataclass
class RStructureReport:
    n_t: int
    n_r: int
    n_layers: int
    trials: int
    max_leak: float
    t_is_upper_triangular: bool
    permuted: bool = False
    resampled: int = 0
    tol: float = LEAK_TOL

    @property
    def d_is_block_diagonal(self):
        return self.max_leak <= self.tol

    @property
    def passed(self):
        return self.d_is_block_diagonal and self.t_is_upper_triangular


def r_structure_report(code, trials, rng, n_r=None, permute=False):
    """
    QR-factor ``H_eq`` for ``trials`` random channels and record the largest
    entry where the pattern demands a zero.  With ``permute`` the symbol order
    is shuffled first (a negative control that should fail).
    """
    n_r = code.n_layers if n_r is None else n_r
    G = assemble_generator(code)
    perm = np.arange(G.G.shape[1])
    if permute:
        perm = rng.substream(0xFFFF).integers(2 ** 31, len(perm)).argsort(kind="stable")
    leak, tri, resampled = 0.0, True, 0
    for t in range(trials):
        k = 0
        while True:
            ch = sample_channel(code.n_t, n_r, rng.substream(t, k))
            H_eq = equivalent_channel(ch, G)[:, perm]
            try:
                _, R = qr_decompose(H_eq)
                break
            except RankDeficient:
                k += 1
                resampled += 1
        leak = max(leak, r_leak(R, code.n_t, code.n_layers))
        tri = tri and float(np.abs(np.tril(R, -1)).max(initial=0.0)) == 0.0
    return RStructureReport(n_t=code.n_t, n_r=n_r, n_layers=code.n_layers, trials=trials,
                            max_leak=leak, t_is_upper_triangular=tri, permuted=permute,
                            resampled=resampled)
