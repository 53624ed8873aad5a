"""Frequency-selective Rayleigh channel generation and the downlink signal model.

The channel between antenna i and user k is an FIR filter of L taps
h[k, i, l].  The noise-free sample at user k and time t is

    y[k, t] = sqrt(P_T / N) * sum_i sum_l h[k, i, l] * exp(j * theta[i, t - l])

with the convention that nothing is transmitted before the frame starts:
exp(j * theta[i, t]) is taken as 0 for t <= 0 (1-based time).  The precoder
and the rate estimator use the same convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as streams
from .frames import PhaseFrame

PDP_SUM_TOL = 1e-12


@dataclass(frozen=True)
class PowerDelayProfile:
    """Average power per delay tap, E|h[l]|^2.  Entries must sum to 1."""

    tap_powers: np.ndarray

    def __post_init__(self):
        powers = np.ascontiguousarray(self.tap_powers, dtype=float)
        object.__setattr__(self, "tap_powers", powers)
        if powers.ndim != 1 or powers.size < 1:
            raise ValueError("tap_powers must be a non-empty vector")
        if np.any(powers < 0):
            raise ValueError("tap powers must be nonnegative")
        total = float(powers.sum())
        if abs(total - 1.0) > PDP_SUM_TOL:
            raise ValueError(
                f"power delay profile must sum to 1 (got {total!r}); "
                "normalize the taps before constructing the profile"
            )

    @property
    def taps(self) -> int:
        return self.tap_powers.size

    @classmethod
    def uniform(cls, taps: int) -> "PowerDelayProfile":
        if taps < 1:
            raise ValueError("taps must be >= 1")
        return cls(np.full(taps, 1.0 / taps))


@dataclass(frozen=True)
class ChannelTensor:
    """Complex impulse responses, shape (n_users, n_antennas, taps)."""

    gains: np.ndarray

    def __post_init__(self):
        gains = np.ascontiguousarray(self.gains, dtype=complex)
        object.__setattr__(self, "gains", gains)
        if gains.ndim != 3:
            raise ValueError(f"gains must be 3-d (user, antenna, tap), got shape {gains.shape}")
        if not np.all(np.isfinite(gains)):
            raise ValueError("channel gains must be finite")

    @property
    def n_users(self) -> int:
        return self.gains.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.gains.shape[1]

    @property
    def taps(self) -> int:
        return self.gains.shape[2]


@dataclass(frozen=True)
class ReceivedFrame:
    """Complex samples observed at the users, shape (n_users, n_time)."""

    samples: np.ndarray

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 2:
            raise ValueError("samples must be 2-d (user, time)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("received samples must be finite")


def generate_channel(rng_seed, N: int, M: int, pdp: PowerDelayProfile) -> ChannelTensor:
    """Draw i.i.d. circularly symmetric complex Gaussian taps.

    Tap (k, i, l) has total variance ``pdp.tap_powers[l]``. Deterministic in
    ``rng_seed`` (int or SeedSequence).
    """
    if N < 1 or M < 1:
        raise ValueError(f"need N >= 1 and M >= 1, got N={N}, M={M}")
    gen = streams.generator(rng_seed)
    raw = streams.complex_normal(gen, (M, N, pdp.taps))
    gains = raw * np.sqrt(pdp.tap_powers)
    return ChannelTensor(gains)


def received_field(H: ChannelTensor, angles: np.ndarray, t_lo: int = 1, t_hi: int | None = None):
    """Unnormalized field sum_i sum_l h[k,i,l] exp(j angles[i, t-l]) for
    t = t_lo..t_hi (1-based, inclusive), zero-prefix before the frame.

    Returns (field array of shape (M, t_hi - t_lo + 1), multiply-add count).
    """
    gains = H.gains
    M, N, L = gains.shape
    T = angles.shape[1]
    if angles.shape[0] != N:
        raise ValueError(
            f"antenna count mismatch: channel has {N}, phase frame has {angles.shape[0]}"
        )
    if t_hi is None:
        t_hi = T
    width = t_hi - t_lo + 1
    phir = np.exp(1j * angles)
    out = np.zeros((M, width), dtype=complex)
    madds = 0
    for l in range(L):
        src_lo = max(1, t_lo - l)
        src_hi = t_hi - l
        if src_hi < src_lo:
            continue
        dst = src_lo - (t_lo - l)
        out[:, dst : dst + src_hi - src_lo + 1] += gains[:, :, l] @ phir[:, src_lo - 1 : src_hi]
        madds += M * N * (src_hi - src_lo + 1)
    return out, madds


def noise_free_receive(H: ChannelTensor, theta: PhaseFrame, P_T: float) -> ReceivedFrame:
    """Noise-free downlink samples sqrt(P_T/N) * field for t = 1..T."""
    if P_T <= 0:
        raise ValueError("P_T must be positive")
    field, _ = received_field(H, theta.angles)
    return ReceivedFrame(np.sqrt(P_T / H.n_antennas) * field)


def add_awgn(frame: ReceivedFrame, sigma2: float, rng_seed) -> ReceivedFrame:
    """Add i.i.d. circularly symmetric complex Gaussian noise of variance sigma2."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be nonnegative, got {sigma2}")
    if sigma2 == 0:
        return ReceivedFrame(frame.samples.copy())
    gen = streams.generator(rng_seed)
    noise = streams.complex_normal(gen, frame.samples.shape, sigma2)
    return ReceivedFrame(frame.samples + noise)
