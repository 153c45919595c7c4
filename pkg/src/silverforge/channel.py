"""
Rayleigh block-fading channel: constellations, channel draws, transmission
``Y = sqrt(SNR/n_t) H S + N`` and the real equivalent channel
``H_eq = (I_T (x) realify(H)) G``.

Random numbers come from :class:`Prng`, a Philox counter-based stream fed
through a Box-Muller transform.  Each Monte-Carlo trial uses its own
substream derived from ``(seed, trial)`` so trials are reproducible in
isolation and can run in any order.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch
from .linalg import realify, tilde_vec, vec

__all__ = [
    "Constellation",
    "Prng",
    "ChannelInstance",
    "sample_channel",
    "transmit",
    "equivalent_channel",
    "db_to_linear",
    "received_vector",
]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class Constellation:
    """
    Square QAM or PAM alphabet.

    Real coordinates take values in a regular PAM set ``{+-1, +-3, ...} * scale``
    with ``scale`` chosen so that each real coordinate has mean power 1/2.
    """

    kind: str = "QAM"
    M: int = 4

    def __post_init__(self):
        kind = str(self.kind).upper()
        object.__setattr__(self, "kind", kind)
        if kind not in ("QAM", "PAM"):
            raise ConfigInvalid("constellation", f"unknown kind {self.kind!r}")
        if not isinstance(self.M, (int, np.integer)) or self.M < 2:
            raise ConfigInvalid("M", f"constellation size must be an integer >= 2, got {self.M!r}")
        if kind == "QAM":
            root = math.isqrt(int(self.M))
            if root * root != self.M:
                raise ConfigInvalid("M", f"QAM size must be a perfect square, got {self.M}")
        if self.pam_size % 2:
            raise ConfigInvalid("M", f"PAM size must be even, got {self.pam_size}")

    @property
    def pam_size(self):
        return math.isqrt(int(self.M)) if self.kind == "QAM" else int(self.M)

    @property
    def scale(self):
        q = self.pam_size
        return math.sqrt(3.0 / (2.0 * (q * q - 1)))

    @property
    def pam_points(self):
        """Ascending real alphabet of one coordinate."""
        q = self.pam_size
        return (2.0 * np.arange(q) - (q - 1)) * self.scale

    @property
    def points(self):
        p = self.pam_points
        if self.kind == "PAM":
            return p
        return (p[:, None] + 1j * p[None, :]).reshape(-1)

    @property
    def differences(self):
        """Ascending set of differences ``p - q`` between alphabet points."""
        q = self.pam_size
        return (2.0 * np.arange(-(q - 1), q)) * self.scale

    def mean_power(self):
        return float(np.mean(self.pam_points ** 2))

    def quantize(self, x):
        """Nearest alphabet point per coordinate, clipped to the extremes."""
        q = self.pam_size
        idx = np.rint((np.asarray(x, dtype=float) / self.scale + (q - 1)) / 2.0)
        idx = np.clip(idx, 0, q - 1)
        return (2.0 * idx - (q - 1)) * self.scale

    def sample(self, n, prng):
        """``n`` i.i.d. uniform real PAM symbols."""
        return self.pam_points[prng.integers(self.pam_size, n)]


class Prng:
    """Seeded counter-based stream with Box-Muller Gaussians."""

    def __init__(self, seed, stream=()):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def substream(self, *index):
        return Prng(self.seed, self.stream + tuple(index))

    def uniform(self, n):
        return self._gen.random(n)

    def integers(self, high, n):
        return self._gen.integers(0, high, size=n)

    def standard_normal(self, n):
        m = (n + 1) // 2
        u1 = 1.0 - self._gen.random(m)  # (0, 1]
        u2 = self._gen.random(m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
        return z[:n]

    def complex_normal(self, shape):
        """i.i.d. CN(0, 1): real and imaginary parts N(0, 1/2)."""
        shape = tuple(np.atleast_1d(shape))
        n = int(np.prod(shape))
        z = self.standard_normal(2 * n) * math.sqrt(0.5)
        return (z[:n] + 1j * z[n:]).reshape(shape)


@dataclass
class ChannelInstance:
    H: np.ndarray
    snr: float

    @property
    def n_r(self):
        return self.H.shape[0]

    @property
    def n_t(self):
        return self.H.shape[1]

    @property
    def gain(self):
        return math.sqrt(self.snr / self.n_t)


def sample_channel(n_t, n_r, rng, snr=1.0):
    return ChannelInstance(H=rng.complex_normal((n_r, n_t)), snr=float(snr))


def transmit(S, ch, rng=None, noiseless=False):
    """Received block ``sqrt(SNR/n_t) H S + N``; noise is unit-variance CN."""
    S = np.atleast_2d(np.asarray(S, dtype=np.complex128))
    if S.shape[0] != ch.n_t:
        raise DimensionMismatch(f"codeword has {S.shape[0]} rows, channel has {ch.n_t} inputs")
    Y = ch.gain * (ch.H @ S)
    if not noiseless:
        if rng is None:
            raise ValueError("a Prng is required unless noiseless=True")
        Y = Y + rng.complex_normal((ch.n_r, S.shape[1]))
    return Y


def equivalent_channel(ch, G, T=None):
    """
    Real equivalent channel ``(I_T (x) realify(H)) G``.

    ``G`` is either a raw ``2 T n_t x 2k`` array or a
    :class:`~silverforge.silver.GeneratorMatrix`, in which case its transmit
    generator (the one matching the power-normalized codewords) is used.
    """
    Gm = G.transmit if hasattr(G, "transmit") else np.asarray(G, dtype=float)
    rows = Gm.shape[0]
    if rows % (2 * ch.n_t):
        raise DimensionMismatch(f"generator has {rows} rows, not a multiple of 2*n_t = {2 * ch.n_t}")
    T = rows // (2 * ch.n_t) if T is None else T
    if rows != 2 * T * ch.n_t:
        raise DimensionMismatch(f"generator rows {rows} != 2*T*n_t = {2 * T * ch.n_t}")
    return np.kron(np.eye(T), realify(ch.H)) @ Gm


def received_vector(Y):
    """``tilde_vec(vec(Y))``."""
    return tilde_vec(vec(Y))
