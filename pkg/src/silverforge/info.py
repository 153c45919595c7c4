"""
Ergodic capacity, maximum mutual information of a linear dispersion code,
and their low-SNR expansion coefficients.

For a code with real equivalent channel ``H_eq``::

    I_STBC = E log det(I + (SNR/n_t) H_eq^T H_eq) / (2T)
    C      = E log det(I + (SNR/n_t) H^H H)

Both expand as ``c1 SNR + c2 SNR^2 + ...`` in natural-log units.  The
coefficients of the code follow from its weights ``A_i`` through
``S_ij = A_i A_j^H + A_j A_i^H``; those of the channel are
``C1 = n_r`` and ``C2 = -n_r (n_r + n_t) / (2 n_t)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import equivalent_channel, sample_channel
from .silver import assemble_generator

__all__ = [
    "CapacityEstimate",
    "ExpansionCoefficients",
    "ergodic_capacity_mc",
    "stbc_mutual_info_mc",
    "expansion_I1",
    "expansion_I2",
    "capacity_C1",
    "capacity_C2",
    "expansion_coefficients",
    "fit_low_snr_series",
]

LOG2E = 1.0 / math.log(2.0)


@dataclass
class CapacityEstimate:
    mean: float
    std_error: float
    trials: int
    snr_db: float
    unit: str = "bits"
    samples: np.ndarray = None

    @classmethod
    def from_samples(cls, samples, snr, unit, keep=False):
        samples = np.asarray(samples, dtype=float)
        n = len(samples)
        se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
        snr_db = 10 * math.log10(snr) if snr > 0 else -math.inf
        return cls(mean=float(samples.mean()), std_error=se, trials=n, snr_db=snr_db,
                   unit=unit, samples=samples if keep else None)


@dataclass
class ExpansionCoefficients:
    I1: float
    I2: float
    C1: float
    C2: float


def _logdet_eye_plus(M):
    """``log det(I + M)`` for a positive semidefinite ``M``."""
    _, val = np.linalg.slogdet(np.eye(M.shape[0]) + M)
    return val


def _unit(unit):
    if unit not in ("bits", "nats"):
        raise ValueError(f"unit must be 'bits' or 'nats', got {unit!r}")
    return LOG2E if unit == "bits" else 1.0


def ergodic_capacity_mc(n_t, n_r, snr, trials, rng, unit="bits", keep_samples=False):
    """Monte-Carlo ``E log det(I + SNR/n_t H H^H)``; trial ``t`` uses ``rng.substream(t)``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    scale = _unit(unit)
    vals = np.empty(trials)
    for t in range(trials):
        H = sample_channel(n_t, n_r, rng.substream(t)).H
        M = H.conj().T @ H if n_t <= n_r else H @ H.conj().T
        vals[t] = _logdet_eye_plus((snr / n_t) * M).real * scale
    return CapacityEstimate.from_samples(vals, snr, unit, keep_samples)


def stbc_mutual_info_mc(G, n_t, n_r, T, snr, trials, rng, unit="bits", keep_samples=False):
    """
    Monte-Carlo maximum mutual information per channel use of the code with
    generator ``G`` (a :class:`GeneratorMatrix` or raw array).  Uses the same
    channel draws as :func:`ergodic_capacity_mc` for the same ``rng``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    scale = _unit(unit)
    vals = np.empty(trials)
    for t in range(trials):
        ch = sample_channel(n_t, n_r, rng.substream(t))
        Heq = equivalent_channel(ch, G, T)
        M = Heq.T @ Heq if Heq.shape[1] <= Heq.shape[0] else Heq @ Heq.T
        vals[t] = _logdet_eye_plus((snr / n_t) * M) * scale / (2 * T)
    return CapacityEstimate.from_samples(vals, snr, unit, keep_samples)


def expansion_I1(code, n_r, T=None):
    """``n_r sum_i tr(A_i A_i^H) / (2 T n_t)`` for the power-scaled weights."""
    T = code.T if T is None else T
    total = sum(np.vdot(A, A).real for A in code.scaled_weights)
    return float(n_r * total / (2 * T * code.n_t))


def expansion_I2(code, n_r, T=None, summation="all"):
    """
    Second low-SNR coefficient of the code's mutual information (natural log).

    ``-n_r / (16 T n_t^2) * sum (tr(S_ij^2) + n_r tr(S_ij)^2)`` over the
    power-scaled weights.  ``summation="all"`` runs over every ordered pair
    ``(i, j)``, which is what the series expansion produces; ``"upper"``
    restricts it to ``j >= i``.
    """
    T = code.T if T is None else T
    if summation not in ("all", "upper"):
        raise ValueError(f"summation must be 'all' or 'upper', got {summation!r}")
    A = np.stack(code.scaled_weights)
    AH = np.conj(np.swapaxes(A, 1, 2))
    P = np.einsum("iab,jbc->ijac", A, AH)  # P[i, j] = A_i A_j^H
    S = P + np.swapaxes(P, 0, 1)
    tr_S = np.einsum("ijaa->ij", S)
    tr_S2 = np.einsum("ijab,ijba->ij", S, S)
    terms = (tr_S2 + n_r * tr_S ** 2).real
    if summation == "upper":
        terms = np.triu(terms)
    return float(-n_r / (16.0 * T * code.n_t ** 2) * terms.sum())


def capacity_C1(n_t, n_r):
    return float(n_r)


def capacity_C2(n_t, n_r):
    """``-E tr((H H^H)^2) / (2 n_t^2) = -n_r (n_r + n_t) / (2 n_t)``."""
    return -n_r * (n_r + n_t) / (2.0 * n_t)


def expansion_coefficients(code, n_r, T=None, summation="all"):
    return ExpansionCoefficients(
        I1=expansion_I1(code, n_r, T),
        I2=expansion_I2(code, n_r, T, summation),
        C1=capacity_C1(code.n_t, n_r),
        C2=capacity_C2(code.n_t, n_r),
    )


def fit_low_snr_series(code, n_r, rng, trials=20000, snrs=(0.005, 0.01, 0.02), T=None):
    """
    Fit ``c1 x + c2 x^2 + c3 x^3`` to the Monte-Carlo mutual information (nats)
    at the given SNRs, all evaluated on the same channel draws.

    Returns ``(c1, c2)``.
    """
    T = code.T if T is None else T
    G = assemble_generator(code)
    snrs = np.asarray(snrs, dtype=float)
    means = np.zeros(len(snrs))
    for t in range(trials):
        ch = sample_channel(code.n_t, n_r, rng.substream(t))
        Heq = equivalent_channel(ch, G, T)
        ev = np.linalg.eigvalsh(Heq.T @ Heq)
        ev = np.clip(ev, 0.0, None)
        means += np.log1p(np.outer(snrs / code.n_t, ev)).sum(axis=1) / (2 * T)
    means /= trials
    X = np.column_stack([snrs, snrs ** 2, snrs ** 3])
    coef = np.linalg.lstsq(X, means, rcond=None)[0]
    return float(coef[0]), float(coef[1])
