"""Zero-forcing baseline under a total average power constraint.

The comparison precoder inverts the channel so every user sees only its own
symbol.  Under a total transmit power P_T with unit-energy symbols the
per-user SNR is equal across users and the rate is

    log2(1 + (P_T/sigma^2) / trace((H H^H)^-1)).

Frequency-selective channels are handled per subcarrier under a cyclic-prefix
idealization: the DFT of the impulse responses gives a flat channel at each
of n_subcarriers uniformly spaced frequencies, each run at the full power
budget (no CP overhead charged), and rates are averaged across subcarriers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as streams
from .channel import ChannelTensor, PowerDelayProfile, generate_channel

BRACKET_LIMIT_DB = 60.0


@dataclass(frozen=True)
class FlatChannelMatrix:
    """M x N flat channel (a single delay tap or one subcarrier's response)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2:
            raise ValueError("channel matrix must be 2-d (user, antenna)")
        if m.shape[0] > m.shape[1]:
            raise ValueError(f"zero forcing needs M <= N, got shape {m.shape}")


def inverse_gram_trace(Hm: FlatChannelMatrix) -> float:
    """trace((H H^H)^-1), the ZF power penalty; raises on rank deficiency."""
    gram = Hm.matrix @ Hm.matrix.conj().T
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError("channel matrix is rank deficient; zero forcing undefined") from exc
    inv_chol = np.linalg.solve(chol, np.eye(Hm.matrix.shape[0], dtype=complex))
    return float(np.sum(np.abs(inv_chol) ** 2))


def zf_per_user_rate_flat(Hm: FlatChannelMatrix, P_T_over_sigma2: float) -> float:
    """Equal-SNR ZF rate on a flat channel, bits per channel use."""
    if P_T_over_sigma2 <= 0:
        raise ValueError("P_T_over_sigma2 must be positive")
    return float(np.log2(1.0 + P_T_over_sigma2 / inverse_gram_trace(Hm)))


def frequency_response(H: ChannelTensor, n_subcarriers: int) -> np.ndarray:
    """(n_subcarriers, M, N) response at uniformly spaced frequencies,
    Hf[s] = sum_l h[:, :, l] * exp(-2j*pi*s*l/n_subcarriers)."""
    if n_subcarriers < H.taps:
        raise ValueError(f"need n_subcarriers >= L, got {n_subcarriers} < {H.taps}")
    l = np.arange(H.taps)
    s = np.arange(n_subcarriers)
    twiddle = np.exp(-2j * np.pi * np.outer(s, l) / n_subcarriers)  # (S, L)
    return np.einsum("sl,mnl->smn", twiddle, H.gains)


def zf_per_user_rate_selective(
    H: ChannelTensor, P_T_over_sigma2: float, n_subcarriers: int
) -> float:
    """Mean per-subcarrier ZF rate with an equal power split."""
    responses = frequency_response(H, n_subcarriers)
    rates = [
        zf_per_user_rate_flat(FlatChannelMatrix(responses[s]), P_T_over_sigma2)
        for s in range(n_subcarriers)
    ]
    return float(np.mean(rates))


def zf_ergodic_rate(
    N: int,
    M: int,
    L: int,
    P_T_over_sigma2: float,
    n_channels: int,
    rng_seed,
    n_subcarriers: int | None = None,
    channels: list[ChannelTensor] | None = None,
) -> tuple[float, float]:
    """(mean, standard error) of the ZF rate over channel realizations.

    ``channels`` overrides the default generator (stream (CHANNEL, c)),
    e.g. for deterministic closed-form checks.
    """
    if n_subcarriers is None:
        n_subcarriers = max(4, L)
    if channels is None:
        pdp = PowerDelayProfile.uniform(L)
        channels = [
            generate_channel(streams.substream(rng_seed, streams.CHANNEL, c), N, M, pdp)
            for c in range(n_channels)
        ]
    rates = np.array(
        [zf_per_user_rate_selective(H, P_T_over_sigma2, n_subcarriers) for H in channels]
    )
    se = rates.std(ddof=1) / np.sqrt(len(rates)) if len(rates) > 1 else 0.0
    return float(rates.mean()), float(se)


def zf_min_power(
    N: int,
    M: int,
    L: int,
    target_rate_bpcu: float,
    n_channels: int,
    rng_seed,
    n_subcarriers: int | None = None,
    channels: list[ChannelTensor] | None = None,
    bracket_db: tuple[float, float] = (-20.0, 20.0),
) -> float:
    """Minimum P_T/sigma^2 in dB for the ergodic ZF rate to hit the target.

    Bisection in the dB domain to 0.01 bpcu; the bracket expands in 6 dB
    steps, failing after a 60 dB total range.
    """
    if target_rate_bpcu <= 0:
        raise ValueError("target_rate_bpcu must be positive")
    if channels is None:
        pdp = PowerDelayProfile.uniform(L)
        channels = [
            generate_channel(streams.substream(rng_seed, streams.CHANNEL, c), N, M, pdp)
            for c in range(n_channels)
        ]

    def rate_at(db: float) -> float:
        return zf_ergodic_rate(
            N, M, L, 10.0 ** (db / 10.0), n_channels, rng_seed,
            n_subcarriers=n_subcarriers, channels=channels,
        )[0]

    lo, hi = expand_bracket(rate_at, target_rate_bpcu, bracket_db)
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = rate_at(mid)
        if abs(r - target_rate_bpcu) <= 0.01:
            break
        if r < target_rate_bpcu:
            lo = mid
        else:
            hi = mid
    return mid


class UnreachableTargetError(RuntimeError):
    """Raised when no power inside the allowed search range meets the target."""

    def __init__(self, message, lo_db, hi_db, rate_lo, rate_hi):
        super().__init__(message)
        self.lo_db = lo_db
        self.hi_db = hi_db
        self.rate_lo = rate_lo
        self.rate_hi = rate_hi


def expand_bracket(rate_at, target: float, bracket_db) -> tuple[float, float]:
    """Grow [lo, hi] in 6 dB steps until rate(lo) < target <= rate(hi)."""
    lo, hi = float(bracket_db[0]), float(bracket_db[1])
    rate_lo, rate_hi = rate_at(lo), rate_at(hi)
    while rate_hi < target and hi - lo < BRACKET_LIMIT_DB:
        hi += 6.0
        rate_hi = rate_at(hi)
    while rate_lo >= target and hi - lo < BRACKET_LIMIT_DB:
        lo -= 6.0
        rate_lo = rate_at(lo)
    if rate_hi < target or rate_lo >= target:
        raise UnreachableTargetError(
            f"target {target} bpcu unreachable in [{lo:.1f}, {hi:.1f}] dB "
            f"(rates [{rate_lo:.4f}, {rate_hi:.4f}])",
            lo, hi, rate_lo, rate_hi,
        )
    return lo, hi
