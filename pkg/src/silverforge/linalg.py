"""
Dense linear algebra primitives used by the code constructions.

Complex matrices are plain ``numpy`` arrays of dtype ``complex128`` and real
matrices are ``float64`` arrays, both C-ordered (row-major).  Everything here is
a pure function.

The realification ``realify`` replaces each complex entry ``x`` by the block
``[[Re x, -Im x], [Im x, Re x]]`` and ``tilde_vec`` interleaves real and
imaginary parts.  Together they satisfy

    realify(A @ B) == realify(A) @ realify(B)
    tilde_vec(vec(A @ B)) == kron(I_p, realify(A)) @ tilde_vec(vec(B))

which is what turns the complex channel model into a real lattice problem.
"""

import io

import numpy as np

from .errors import RankDeficient

__all__ = [
    "as_complex",
    "kron",
    "kron_power",
    "realify",
    "tilde_vec",
    "vec",
    "qr_decompose",
    "det_complex",
    "format_matrix",
    "parse_matrix",
    "write_matrices",
    "read_matrices",
]

RANK_TOL = 1e-12


def as_complex(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def kron(A, B):
    """Kronecker product; block (i, j) of the result equals ``A[i, j] * B``."""
    return np.kron(A, B)


def kron_power(A, m):
    """``A`` Kronecker-multiplied with itself ``m`` times (``m = 0`` gives ``[[1]]``)."""
    out = np.ones((1, 1), dtype=np.result_type(A, np.float64))
    for _ in range(m):
        out = np.kron(out, A)
    return out


def realify(X):
    """Real ``2r x 2c`` image of a complex ``r x c`` matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=np.complex128))
    r, c = X.shape
    out = np.empty((2 * r, 2 * c))
    out[0::2, 0::2] = X.real
    out[0::2, 1::2] = -X.imag
    out[1::2, 0::2] = X.imag
    out[1::2, 1::2] = X.real
    return out


def vec(X):
    """Stack the columns of ``X`` into one vector."""
    return np.asarray(X).T.reshape(-1)


def tilde_vec(x):
    """Interleave real and imaginary parts: ``[x1_I, x1_Q, ..., xn_I, xn_Q]``."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    out = np.empty(2 * x.size)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out


def qr_decompose(M):
    """
    Thin QR factorization with a positive diagonal in ``R``.

    Parameters
    ----------
    M : (m, n) real array with m >= n

    Returns
    -------
    Q : (m, n) array with orthonormal columns
    R : (n, n) upper triangular array, ``R[i, i] > 0``

    Raises
    ------
    RankDeficient
        If a pivot falls below ``1e-12`` times the largest column norm.
    """
    M = np.asarray(M, dtype=np.float64)
    m, n = M.shape
    if m < n:
        raise RankDeficient(f"matrix is {m}x{n}; need rows >= cols")
    # LAPACK geqrf: Householder reflections
    Q, R = np.linalg.qr(M, mode="reduced")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = R * signs[:, None]
    scale = np.max(np.linalg.norm(M, axis=0)) if n else 0.0
    if n and (scale == 0 or np.min(np.diag(R)) < RANK_TOL * scale):
        raise RankDeficient(
            f"pivot {np.min(np.diag(R)):.3e} below tolerance (column scale {scale:.3e})"
        )
    return Q, np.triu(R)


def det_complex(M):
    """Determinant by LU with partial pivoting. Accepts stacks of square matrices."""
    return np.linalg.det(np.asarray(M, dtype=np.complex128))


# -- text serialization ------------------------------------------------------

def _fmt_real(v):
    return repr(float(v))


def _fmt_complex(z):
    z = complex(z)
    return f"{z.real!r}{z.imag:+}j"


def format_matrix(M):
    """Header line ``rows cols`` followed by one line per row."""
    M = np.atleast_2d(np.asarray(M))
    is_complex = np.iscomplexobj(M)
    fmt = _fmt_complex if is_complex else _fmt_real
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    for row in M:
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _parse_block(lines, start):
    header = lines[start].split()
    if len(header) != 2:
        raise ValueError(f"line {start + 1}: expected 'rows cols', got {lines[start]!r}")
    rows, cols = int(header[0]), int(header[1])
    if rows < 1 or cols < 1:
        raise ValueError(f"line {start + 1}: non-positive dimensions")
    body = lines[start + 1:start + 1 + rows]
    if len(body) != rows:
        raise ValueError(f"line {start + 1}: expected {rows} rows, found {len(body)}")
    tokens = [line.split() for line in body]
    for i, t in enumerate(tokens):
        if len(t) != cols:
            raise ValueError(f"line {start + 2 + i}: expected {cols} entries, found {len(t)}")
    if any(tok.endswith("j") for row in tokens for tok in row):
        M = np.array([[complex(tok) for tok in row] for row in tokens], dtype=np.complex128)
    else:
        M = np.array([[float(tok) for tok in row] for row in tokens], dtype=np.float64)
    return M, start + 1 + rows


def parse_matrix(text):
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    M, _ = _parse_block(lines, 0)
    return M


def write_matrices(matrices, fh=None):
    """Write several matrices back to back; returns the text when ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    for M in matrices:
        out.write(format_matrix(M))
    if fh is None:
        return out.getvalue()


def read_matrices(text):
    """Inverse of :func:`write_matrices`.  Lines starting with ``#`` are skipped."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith(("#", "group"))]
    mats, pos = [], 0
    while pos < len(lines):
        M, pos = _parse_block(lines, pos)
        mats.append(M)
    return mats
