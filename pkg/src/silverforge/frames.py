"""
Pairwise anticommuting, anti-Hermitian unitary matrices of size ``2**a``.

The ``2a`` frame elements are Kronecker products of three fixed 2x2 matrices::

    F_1      = j * P3 (x) ... (x) P3                           (a factors)
    F_{2k}   = I2^(a-k) (x) P1 (x) P3^(k-1),   k = 1..a
    F_{2k+1} = I2^(a-k) (x) P2 (x) P3^(k-1),   k = 1..a-1

Products of subsets of the frame (taken in increasing index order) span the
full matrix algebra, and their squares and mutual (anti)commutation follow
from the subset sizes alone; see :func:`square_sign` and
:func:`commute_predicate`.
"""

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Literal

import numpy as np

from .errors import UnsupportedSize
from .linalg import kron_power, tilde_vec, vec

__all__ = [
    "Frame",
    "FrameReport",
    "ProductMask",
    "pauli_generators",
    "build_frame",
    "verify_frame",
    "subset_product",
    "square_sign",
    "commute_predicate",
    "basis_independence_check",
    "all_masks",
]

MAX_EXPONENT = 4
FRAME_TOL = 1e-12

Relation = Literal["commute", "anticommute"]


def pauli_generators():
    """The three 2x2 building blocks ``(P1, P2, P3)``."""
    P1 = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
    P2 = np.array([[0, 1j], [1j, 0]], dtype=np.complex128)
    P3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return P1, P2, P3


@dataclass(frozen=True)
class Frame:
    a: int
    matrices: tuple

    @property
    def n(self):
        return 2 ** self.a

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, i):
        """1-based access, ``frame[1]`` is F_1."""
        if not 1 <= i <= len(self.matrices):
            raise IndexError(f"frame index {i} outside 1..{len(self.matrices)}")
        return self.matrices[i - 1]


def build_frame(a):
    """Frame of ``2a`` matrices of size ``2**a`` (F_1 uses the ``+j`` sign)."""
    if not isinstance(a, (int, np.integer)) or not 1 <= a <= MAX_EXPONENT:
        raise UnsupportedSize(f"frame exponent must be in [1, {MAX_EXPONENT}], got {a!r}")
    P1, P2, P3 = pauli_generators()
    I2 = np.eye(2, dtype=np.complex128)
    F = {1: 1j * kron_power(P3, a)}
    for k in range(1, a + 1):
        F[2 * k] = np.kron(np.kron(kron_power(I2, a - k), P1), kron_power(P3, k - 1))
        if k <= a - 1:
            F[2 * k + 1] = np.kron(np.kron(kron_power(I2, a - k), P2), kron_power(P3, k - 1))
    return Frame(a=int(a), matrices=tuple(F[i] for i in range(1, 2 * a + 1)))


@dataclass
class FrameReport:
    unitarity: float
    anti_hermitian: float
    squares: float
    anticommutators: dict = field(default_factory=dict)
    tol: float = FRAME_TOL

    @property
    def max_deviation(self):
        worst = max(self.anticommutators.values(), default=0.0)
        return max(self.unitarity, self.anti_hermitian, self.squares, worst)

    @property
    def passed(self):
        return self.max_deviation <= self.tol

    def failures(self):
        out = []
        if self.unitarity > self.tol:
            out.append("unitarity")
        if self.anti_hermitian > self.tol:
            out.append("anti_hermitian")
        if self.squares > self.tol:
            out.append("squares")
        out += [f"anticommute F{i}F{j}" for (i, j), v in self.anticommutators.items() if v > self.tol]
        return out


def verify_frame(f):
    """Check every frame invariant; deviations are Frobenius norms."""
    n = f.n
    eye = np.eye(n)
    unit = herm = sq = 0.0
    for F in f.matrices:
        unit = max(unit, np.linalg.norm(F @ F.conj().T - eye))
        herm = max(herm, np.linalg.norm(F.conj().T + F))
        sq = max(sq, np.linalg.norm(F @ F + eye))
    anti = {}
    for i, j in combinations(range(len(f.matrices)), 2):
        Fi, Fj = f.matrices[i], f.matrices[j]
        anti[(i + 1, j + 1)] = float(np.linalg.norm(Fi @ Fj + Fj @ Fi))
    return FrameReport(unitarity=float(unit), anti_hermitian=float(herm), squares=float(sq),
                       anticommutators=anti)


@dataclass(frozen=True)
class ProductMask:
    lambdas: tuple
    j_flag: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(int(b) for b in self.lambdas))
        if any(b not in (0, 1) for b in self.lambdas):
            raise ValueError("mask entries must be 0 or 1")

    @classmethod
    def from_indices(cls, length, indices, j_flag=False):
        """Mask selecting the 1-based frame indices in ``indices``."""
        lam = [0] * length
        for i in indices:
            lam[i - 1] = 1
        return cls(tuple(lam), j_flag)

    @property
    def size(self):
        return sum(self.lambdas)

    @property
    def indices(self):
        return tuple(i + 1 for i, b in enumerate(self.lambdas) if b)

    def label(self):
        body = "".join(f"F{i}" for i in self.indices) or "I"
        return ("j" if self.j_flag else "") + body


def subset_product(f, m):
    """``(j if m.j_flag else 1) * F_1^l1 ... F_2a^l2a``, multiplied left to right."""
    if len(m.lambdas) != len(f.matrices):
        raise ValueError(f"mask length {len(m.lambdas)} != frame size {len(f.matrices)}")
    out = np.eye(f.n, dtype=np.complex128)
    for F, bit in zip(f.matrices, m.lambdas):
        if bit:
            out = out @ F
    return 1j * out if m.j_flag else out


def all_masks(length, j_flag=False):
    return [ProductMask(lam, j_flag) for lam in product((0, 1), repeat=length)]


def square_sign(s):
    """Sign of the square of a product of ``s`` distinct frame elements."""
    if s < 1:
        raise ValueError("subset size must be at least 1")
    return -1 if (s * (s + 1) // 2) % 2 else 1


def commute_predicate(r, s, p) -> Relation:
    """
    Relation between products of ``r`` and ``s`` distinct frame elements
    sharing ``p`` indices.

    They commute when exactly one holds: ``r, s, p`` all odd, or ``r*s`` even
    with ``p`` even.
    """
    if p < 0 or p > min(r, s):
        raise ValueError(f"overlap {p} outside [0, min(r, s)]")
    all_odd = r % 2 == 1 and s % 2 == 1 and p % 2 == 1
    even_case = (r * s) % 2 == 0 and p % 2 == 0
    return "commute" if all_odd != even_case else "anticommute"


def basis_independence_check(f, tol=1e-9):
    """True when the ``2**(2a)`` subset products and their ``j``-multiples are
    linearly independent over the reals."""
    if f.a > 3:
        raise UnsupportedSize("basis check limited to a <= 3")
    cols = []
    for j_flag in (False, True):
        for m in all_masks(len(f.matrices), j_flag):
            cols.append(tilde_vec(vec(subset_product(f, m))))
    M = np.column_stack(cols)
    return int(np.linalg.matrix_rank(M, tol=tol * max(1.0, np.abs(M).max()))) == M.shape[1]
