"""Achievable-rate lower bound from Monte-Carlo interference statistics.

After precoding, the sample at user k is sqrt(P_T) * (sqrt(E_k) u_k[t] +
I_k[t]) + noise, where I_k is the residual multi-user interference.  Treating
the length-T interference-plus-noise vector as Gaussian with autocorrelation
E[I_k I_k^H | H] + (sigma^2/P_T) I gives the per-channel-use rate bound

    R_k = max(0, log2(E_k) - log2 det(C_k + (sigma^2/P_T) I) / T).

C_k is estimated by averaging I_k I_k^H over independent Gaussian symbol
frames run through the precoder; the ergodic bound averages R_k over channel
realizations.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as streams
from .channel import ChannelTensor, PowerDelayProfile, generate_channel, received_field
from .frames import PhaseFrame, SymbolFrame, gaussian_symbols
from .precoder import PrecoderConfig, batch_initial_angles, descend_batch

HERMITIAN_ATOL = 1e-10


@dataclass(frozen=True)
class MuiFrame:
    """Residual interference I[k, t] = field/sqrt(N) - sqrt(E_k) u[k, t]."""

    mui: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mui", np.ascontiguousarray(self.mui, dtype=complex))
        if self.mui.ndim != 2:
            raise ValueError("mui must be 2-d (user, time)")


@dataclass(frozen=True)
class MuiCovariance:
    """Per-user T x T sample autocorrelation of the interference vector."""

    matrix: np.ndarray
    n_samples: int

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("covariance must be a square matrix")


@dataclass(frozen=True)
class RateEstimate:
    """Ergodic per-user rates (bits per channel use) with standard errors and
    the full configuration echoed for reproducibility."""

    per_user_rates: np.ndarray
    standard_errors: np.ndarray
    p_t_over_sigma2: float
    energies: np.ndarray
    n_time: int
    n_channels: int
    n_samples: int
    rng_seed: object

    def to_json_dict(self) -> dict:
        return {
            "per_user_rates_bpcu": np.asarray(self.per_user_rates).tolist(),
            "standard_errors": np.asarray(self.standard_errors).tolist(),
            "p_t_over_sigma2": self.p_t_over_sigma2,
            "energies": np.asarray(self.energies).tolist(),
            "n_time": self.n_time,
            "n_channels": self.n_channels,
            "n_samples": self.n_samples,
            "rng_seed": repr(self.rng_seed),
        }


def compute_mui(H: ChannelTensor, theta: PhaseFrame, U: SymbolFrame) -> MuiFrame:
    """Residual interference of a precoded frame, from the signal model."""
    field_, _ = received_field(H, theta.angles)
    return MuiFrame(field_ / np.sqrt(H.n_antennas) - U.scaled())


def estimate_mui_covariance(
    H: ChannelTensor,
    energies,
    config: PrecoderConfig,
    n_samples: int,
    rng_seed,
    n_time: int | None = None,
    frame_mui_fn=None,
) -> list[MuiCovariance]:
    """Per-user interference autocorrelation, averaged over ``n_samples``
    i.i.d. Gaussian symbol frames precoded on the fixed channel ``H``.

    ``frame_mui_fn(H, U, config, sample_index)`` may be supplied to replace
    the precoder (analysis/testing hook); it must return an (M, T) residual
    array for the given symbol frame.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    M = H.n_users
    if n_time is None:
        n_time = 4 * config.tau
    if n_samples < n_time and frame_mui_fn is None:
        warnings.warn(
            f"n_samples={n_samples} < T={n_time}: the sample covariance is rank "
            "deficient and the rate bound will be optimistic",
            RuntimeWarning,
            stacklevel=2,
        )
    energies = np.broadcast_to(np.asarray(energies, dtype=float), (M,)).copy()
    mui = _mui_samples(H, energies, config, n_samples, rng_seed, n_time, frame_mui_fn)
    covs = []
    for k in range(M):
        c = np.einsum("bt,bs->ts", mui[:, k, :], mui[:, k, :].conj()) / n_samples
        c = 0.5 * (c + c.conj().T)
        covs.append(MuiCovariance(c, n_samples))
    return covs


def _mui_samples(H, energies, config, n_samples, rng_seed, n_time, frame_mui_fn):
    """(n_samples, M, T) residual frames; one derived stream per sample."""
    M, N = H.n_users, H.n_antennas
    sym_seeds = [streams.substream(rng_seed, streams.SYMBOLS, s) for s in range(n_samples)]
    if frame_mui_fn is not None:
        out = np.empty((n_samples, M, n_time), dtype=complex)
        for s in range(n_samples):
            U = gaussian_symbols(M, n_time, energies, sym_seeds[s])
            out[s] = np.asarray(frame_mui_fn(H, U, config, s), dtype=complex)
        return out
    symbols = np.empty((1, n_samples, M, n_time), dtype=complex)
    for s in range(n_samples):
        U = gaussian_symbols(M, n_time, energies, sym_seeds[s])
        symbols[0, s] = U.symbols
    init_seeds = [[streams.substream(rng_seed, streams.INIT, s) for s in range(n_samples)]]
    init = batch_initial_angles(1, n_samples, N, n_time, config, init_seeds)
    _, mui = descend_batch(H.gains[None], symbols, energies, config, init)
    return mui[0]


def rate_lower_bound(cov: MuiCovariance | np.ndarray, E_k: float, P_T_over_sigma2: float,
                     n_time: int | None = None) -> float:
    """Per-user achievable rate in bpcu, clamped at zero.

    The log-determinant of the noise-shifted covariance is computed through a
    Cholesky factorization (sum of log-diagonals), never a raw determinant.
    """
    matrix = cov.matrix if isinstance(cov, MuiCovariance) else np.asarray(cov, dtype=complex)
    T = matrix.shape[0]
    if n_time is not None and n_time != T:
        raise ValueError(f"covariance is {T}x{T} but n_time={n_time}")
    if E_k <= 0 or P_T_over_sigma2 <= 0:
        raise ValueError("E_k and P_T_over_sigma2 must be positive")
    herm_err = np.max(np.abs(matrix - matrix.conj().T)) if T else 0.0
    if herm_err > HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(matrix)))):
        raise ValueError(f"covariance is not Hermitian (max asymmetry {herm_err:.3e})")
    shifted = 0.5 * (matrix + matrix.conj().T) + (1.0 / P_T_over_sigma2) * np.eye(T)
    try:
        chol = np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "noise-shifted covariance is not positive definite; "
            "the covariance estimate is invalid"
        ) from exc
    logdet2 = 2.0 * float(np.sum(np.log2(np.real(np.diag(chol)))))
    return max(0.0, float(np.log2(E_k)) - logdet2 / T)


def ergodic_rate(
    N: int,
    M: int,
    L: int,
    energies,
    P_T_over_sigma2: float,
    n_time: int,
    config: PrecoderConfig,
    n_channels: int,
    n_samples: int,
    rng_seed,
    pdp: PowerDelayProfile | None = None,
    frame_mui_fn=None,
    n_threads: int = 1,
) -> RateEstimate:
    """Average the rate bound over independent channel realizations.

    Channel c comes from stream (CHANNEL, c); its symbol frames and phase
    initializations from (TRIAL, c, ...), so results are identical for any
    thread count or evaluation order.
    """
    if n_channels < 2:
        raise ValueError("n_channels must be >= 2 to report standard errors")
    if pdp is None:
        pdp = PowerDelayProfile.uniform(L)
    energies = np.broadcast_to(np.asarray(energies, dtype=float), (M,)).copy()
    rates = np.empty((n_channels, M))

    def one_channel(c: int):
        H = generate_channel(streams.substream(rng_seed, streams.CHANNEL, c), N, M, pdp)
        covs = estimate_mui_covariance(
            H, energies, config, n_samples,
            streams.substream(rng_seed, streams.TRIAL, c),
            n_time=n_time, frame_mui_fn=frame_mui_fn,
        )
        return [
            rate_lower_bound(covs[k], energies[k], P_T_over_sigma2) for k in range(M)
        ]

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            for c, row in enumerate(pool.map(one_channel, range(n_channels))):
                rates[c] = row
    else:
        for c in range(n_channels):
            rates[c] = one_channel(c)
    return RateEstimate(
        per_user_rates=rates.mean(axis=0),
        standard_errors=rates.std(axis=0, ddof=1) / np.sqrt(n_channels),
        p_t_over_sigma2=float(P_T_over_sigma2),
        energies=energies,
        n_time=n_time,
        n_channels=n_channels,
        n_samples=n_samples,
        rng_seed=rng_seed,
    )
