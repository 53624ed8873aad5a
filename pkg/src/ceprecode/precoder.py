"""Constant-envelope precoding by sequential block coordinate descent.

Every antenna transmits a fixed-magnitude sample sqrt(P_T/N) * exp(j*theta);
information is carried purely by the N*T phase angles of a frame.  The
precoder picks the angles so that the noise-free signal arriving at each user
tracks sqrt(E_k) * u_k[t], minimizing the total residual (multi-user
interference) energy

    F(theta) = sum_t sum_k | field(k, t)/sqrt(N) - sqrt(E_k) u_k[t] |^2 .

Because the channel has memory L, angles at up to L consecutive time
instances couple.  The frame is therefore processed in blocks of ``tau``
consecutive time instances: block r is optimized while every earlier angle
stays frozen at its final value, and the summed per-block objectives
reproduce F exactly.  Within a block, cyclic coordinate descent visits the
(time, antenna) coordinates in a fixed order and applies the exact one-angle
minimizer, which is available in closed form from the running residuals
S(k, t); each update touches at most M*L residual entries.

Two code paths implement the same arithmetic:

* the single-frame path (`init_residuals`, `update_angle`, `optimize_block`,
  `precode_frame`) keeps full reports and operation counters;
* `descend_batch` runs many (channel, symbol-frame) trajectories in lockstep
  for Monte-Carlo work.  Trajectories are independent, so batching does not
  change any individual result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rng as streams
from .channel import ChannelTensor, received_field
from .frames import PhaseFrame, SymbolFrame, wrap_angle

# below this magnitude the one-angle objective is numerically flat and the
# update keeps the current angle
FLAT_GRADIENT = 1e-300

INIT_MODES = ("uniform_random", "zeros")


@dataclass
class PrecoderConfig:
    tau: int
    n_iterations: int = 4
    init_mode: str = "uniform_random"
    rng_seed: "int | np.random.SeedSequence" = 0

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")


@dataclass(frozen=True)
class BlockBounds:
    """Time span and lookahead horizons of one optimization block (1-based)."""

    start: int
    end: int
    d_r: int
    lookahead: np.ndarray  # L_r(t) for t = start..end

    def __post_init__(self):
        object.__setattr__(self, "lookahead", np.asarray(self.lookahead, dtype=int))


def block_bounds(r: int, T: int, tau: int, L: int) -> BlockBounds:
    """Block r covers t in [(r-1)*tau + 1, min(T, r*tau)]; the lookahead
    L_r(t) = min(L-1, min(T, r*tau) - t) says how far an angle update at t
    propagates before the block boundary clips it."""
    n_blocks = math.ceil(T / tau)
    if not 1 <= r <= n_blocks:
        raise ValueError(f"block index r={r} outside 1..{n_blocks} for T={T}, tau={tau}")
    start = (r - 1) * tau + 1
    end = min(T, r * tau)
    d_r = min(tau, T - (r - 1) * tau)
    t = np.arange(start, end + 1)
    lookahead = np.minimum(L - 1, end - t)
    return BlockBounds(start, end, d_r, lookahead)


@dataclass
class ResidualState:
    """Running residuals S(k, t) for the active block.

    ``residuals[k, q]`` equals S(k, start + q) and is kept exact under the
    incremental coordinate updates.  ``angles`` aliases the PhaseFrame being
    optimized; ``carry_angles`` records the frozen tail of the previous block
    (the up-to-(L-1) time instances feeding into this block's field).
    """

    block_index: int
    start: int
    end: int
    residuals: np.ndarray  # (M, d_r) complex
    lookahead: np.ndarray  # (d_r,) int
    carry_angles: np.ndarray  # (N, min(L-1, start-1)) copy
    angles: np.ndarray  # (N, T) live view

    def block_objective(self) -> float:
        """Residual energy of the active block."""
        r = self.residuals
        return float(np.real(np.vdot(r, r)))


@dataclass
class PrecoderReport:
    """Descent diagnostics: per-block objective traces and operation counts.

    ``block_traces[r-1]`` holds the block objective before any update and
    after every coordinate update of block r.  Counters tally complex
    multiply-adds of the algorithm itself (residual initialization and
    coordinate updates), not bookkeeping.
    """

    block_traces: list = field(default_factory=list)
    iterations_used: list = field(default_factory=list)
    final_objective: float = float("nan")
    init_madds: int = 0
    update_madds: int = 0

    def to_json_dict(self) -> dict:
        return {
            "final_objective": self.final_objective,
            "iterations_used": list(self.iterations_used),
            "init_madds": self.init_madds,
            "update_madds": self.update_madds,
            "block_traces": [np.asarray(t).tolist() for t in self.block_traces],
        }


def evaluate_objective(H: ChannelTensor, theta: PhaseFrame, U: SymbolFrame) -> float:
    """Total residual energy of the frame (the joint fit criterion)."""
    _check_dims(H, theta, U)
    field_, _ = received_field(H, theta.angles)
    resid = field_ / np.sqrt(H.n_antennas) - U.scaled()
    return float(np.real(np.vdot(resid, resid)))


def init_residuals(
    H: ChannelTensor,
    theta: PhaseFrame,
    U: SymbolFrame,
    r: int,
    tau: int,
    counter: PrecoderReport | None = None,
) -> ResidualState:
    """Compute S(k, t) for block r directly from the current frame.

    Needed once per block; afterwards `update_angle` maintains the residuals
    incrementally.
    """
    _check_dims(H, theta, U)
    bb = block_bounds(r, U.n_time, tau, H.taps)
    field_, madds = received_field(H, theta.angles, bb.start, bb.end)
    resid = field_ / np.sqrt(H.n_antennas) - U.scaled()[:, bb.start - 1 : bb.end]
    if counter is not None:
        counter.init_madds += madds
    carry_lo = max(0, bb.start - H.taps)  # 0-based start of the L-1 carry window
    carry = theta.angles[:, carry_lo : bb.start - 1].copy()
    return ResidualState(
        block_index=r,
        start=bb.start,
        end=bb.end,
        residuals=resid,
        lookahead=bb.lookahead,
        carry_angles=carry,
        angles=theta.angles,
    )


def update_angle(
    state: ResidualState,
    H: ChannelTensor,
    n: int,
    q: int,
    counter: PrecoderReport | None = None,
) -> float:
    """Closed-form minimization of the block objective over theta[n, start+q].

    ``n`` is the 0-based antenna index and ``q`` the 0-based in-block time
    index.  Residuals for the affected time instances and the live angle are
    updated in place; the new angle (wrapped into [-pi, pi)) is returned.
    """
    gains = H.gains
    sqrt_n = np.sqrt(H.n_antennas)
    W = int(state.lookahead[q]) + 1
    h = gains[:, n, :W]  # (M, W)
    t1 = state.start + q
    cur_angle = state.angles[n, t1 - 1]
    cur = np.exp(1j * cur_angle)
    Sv = state.residuals[:, q : q + W]
    # correlation of the channel with the residual, excluding this angle's
    # own contribution
    G = np.einsum("mw,mw->", h.conj(), Sv) - cur * (np.real(np.vdot(h, h)) / sqrt_n)
    if abs(G) >= FLAT_GRADIENT:
        new_angle = wrap_angle(np.pi + np.angle(G))
    else:
        new_angle = cur_angle
    Sv += h * ((np.exp(1j * new_angle) - cur) / sqrt_n)
    state.angles[n, t1 - 1] = new_angle
    if counter is not None:
        counter.update_madds += 2 * H.n_users * W
    return float(new_angle)


def optimize_block(
    H: ChannelTensor,
    U: SymbolFrame,
    theta: PhaseFrame,
    r: int,
    config: PrecoderConfig,
    report: PrecoderReport | None = None,
    record_trace: bool = True,
) -> ResidualState:
    """Run cyclic coordinate descent on block r, earlier blocks frozen.

    Visits coordinates antenna-major within each time instance (all antennas
    at time t, then t+1), for ``config.n_iterations`` full passes.
    """
    if report is None:
        report = PrecoderReport()
    state = init_residuals(H, theta, U, r, config.tau, counter=report)
    trace = [state.block_objective()] if record_trace else []
    N = H.n_antennas
    d_r = state.end - state.start + 1
    for _ in range(config.n_iterations):
        for q in range(d_r):
            for n in range(N):
                update_angle(state, H, n, q, counter=report)
                if record_trace:
                    trace.append(state.block_objective())
    report.block_traces.append(np.asarray(trace))
    report.iterations_used.append(config.n_iterations)
    return state


def precode_frame(
    H: ChannelTensor,
    U: SymbolFrame,
    config: PrecoderConfig,
    record_trace: bool = True,
) -> tuple[PhaseFrame, PrecoderReport]:
    """Optimize the whole frame: initialize all angles, then optimize blocks
    r = 1..ceil(T/tau) in order, each conditioned on the previous block's
    final angles."""
    if config.tau < H.taps:
        warnings.warn(
            f"tau={config.tau} is smaller than the channel length L={H.taps}; "
            "the per-channel-use O(NML) cost argument assumes tau >= L",
            RuntimeWarning,
            stacklevel=2,
        )
    T = U.n_time
    theta = _initial_frame(H.n_antennas, T, config)
    report = PrecoderReport()
    n_blocks = math.ceil(T / config.tau)
    for r in range(1, n_blocks + 1):
        optimize_block(H, U, theta, r, config, report=report, record_trace=record_trace)
    report.final_objective = evaluate_objective(H, theta, U)
    return theta, report


def transmit_signal(theta: PhaseFrame, P_T: float) -> np.ndarray:
    """Constant-envelope samples x[i, t] = sqrt(P_T/N) * exp(j*theta[i, t])."""
    if P_T <= 0:
        raise ValueError("P_T must be positive")
    return np.sqrt(P_T / theta.n_antennas) * np.exp(1j * theta.angles)


def _initial_frame(N: int, T: int, config: PrecoderConfig) -> PhaseFrame:
    if config.init_mode == "zeros":
        return PhaseFrame.zeros(N, T)
    gen = streams.generator(config.rng_seed)
    return PhaseFrame(gen.uniform(-np.pi, np.pi, size=(N, T)))


def _check_dims(H: ChannelTensor, theta: PhaseFrame, U: SymbolFrame | None = None):
    if theta.n_antennas != H.n_antennas:
        raise ValueError(
            f"antenna mismatch: channel N={H.n_antennas}, frame N={theta.n_antennas}"
        )
    if U is not None:
        if U.n_users != H.n_users:
            raise ValueError(f"user mismatch: channel M={H.n_users}, symbols M={U.n_users}")
        if U.n_time != theta.n_time:
            raise ValueError(
                f"frame length mismatch: angles T={theta.n_time}, symbols T={U.n_time}"
            )


# ---------------------------------------------------------------------------
# lockstep batch engine
# ---------------------------------------------------------------------------


def descend_batch(
    gains: np.ndarray,
    symbols: np.ndarray,
    energies: np.ndarray,
    config: PrecoderConfig,
    init_angles: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Run the block coordinate descent on a (channel, frame) batch.

    Parameters
    ----------
    gains : (C, M, N, L) complex channel taps, one per batched channel.
    symbols : (C, B, M, T) unit-energy symbols.
    energies : (M,) per-user symbol energies, shared across the batch.
    init_angles : (C, B, N, T) starting phases; optimized in place.

    Returns ``(angles, mui)`` where ``mui[c, b, k, t]`` is the final residual
    field/sqrt(N) - sqrt(E_k) u, assembled from the per-block residuals (a
    block's residuals are final once the block completes, since later blocks
    never touch earlier time instances).
    """
    C, M, N, L = gains.shape
    _, B, _, T = symbols.shape
    tau = config.tau
    sqrt_n = np.sqrt(N)
    sqrt_e = np.sqrt(np.asarray(energies, dtype=float))
    angles = init_angles
    mui = np.empty((C, B, M, T), dtype=complex)
    # cumulative per-antenna channel power, sum_m sum_{w<=W} |h|^2 -> (C, N, L)
    hpow = np.cumsum(np.sum(np.abs(gains) ** 2, axis=1), axis=-1)
    hview = np.ascontiguousarray(np.swapaxes(gains, 1, 2))  # (C, N, M, L)
    hconj = hview.conj()
    n_blocks = math.ceil(T / tau)
    for r in range(1, n_blocks + 1):
        bb = block_bounds(r, T, tau, L)
        S = _field_window_batch(gains, angles, bb.start, bb.end)
        S /= sqrt_n
        S -= sqrt_e[:, None] * symbols[:, :, :, bb.start - 1 : bb.end]
        for _ in range(config.n_iterations):
            for q in range(bb.d_r):
                W = int(bb.lookahead[q]) + 1
                t0 = bb.start - 1 + q  # 0-based frame index of this column
                Sv = S[:, :, :, q : q + W]
                for n in range(N):
                    cur_angle = angles[:, :, n, t0]  # (C, B)
                    cur = np.exp(1j * cur_angle)
                    G = np.einsum("cmw,cbmw->cb", hconj[:, n, :, :W], Sv)
                    G -= cur * (hpow[:, n, W - 1] / sqrt_n)[:, None]
                    flat = np.abs(G) < FLAT_GRADIENT
                    new_angle = wrap_angle(np.pi + np.angle(G))
                    if flat.any():
                        new_angle = np.where(flat, cur_angle, new_angle)
                    delta = (np.exp(1j * new_angle) - cur) / sqrt_n
                    Sv += hview[:, n, None, :, :W] * delta[:, :, None, None]
                    angles[:, :, n, t0] = new_angle
        mui[:, :, :, bb.start - 1 : bb.end] = S
    return angles, mui


def _field_window_batch(gains, angles, t_lo, t_hi):
    """Batched analogue of channel.received_field: (C, B, M, width)."""
    C, M, N, L = gains.shape
    width = t_hi - t_lo + 1
    phir = np.exp(1j * angles[:, :, :, max(0, t_lo - L) : t_hi])
    off = max(0, t_lo - L)  # 0-based frame index of phir's first column
    out = np.zeros((gains.shape[0], angles.shape[1], M, width), dtype=complex)
    for l in range(L):
        src_lo = max(1, t_lo - l)
        src_hi = t_hi - l
        if src_hi < src_lo:
            continue
        dst = src_lo - (t_lo - l)
        seg = phir[:, :, :, src_lo - 1 - off : src_hi - off]
        out[:, :, :, dst : dst + seg.shape[-1]] += np.einsum(
            "cmn,cbnt->cbmt", gains[:, :, :, l], seg
        )
    return out


def batch_initial_angles(C: int, B: int, N: int, T: int, config: PrecoderConfig, seeds) -> np.ndarray:
    """Starting phases for a batch; ``seeds[c][b]`` seeds trajectory (c, b)."""
    if config.init_mode == "zeros":
        return np.zeros((C, B, N, T))
    out = np.empty((C, B, N, T))
    for c in range(C):
        for b in range(B):
            gen = streams.generator(seeds[c][b])
            out[c, b] = gen.uniform(-np.pi, np.pi, size=(N, T))
    return out
