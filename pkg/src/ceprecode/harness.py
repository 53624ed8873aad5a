"""Experiment orchestration: symbol-energy optimization, minimum-power
search, and the antenna/block-length sweeps, with CSV emission.

The expensive object in every experiment is the per-(energy, channel)
interference covariance: it does not depend on the operating power, only on
the symbol energy.  The evaluator therefore caches the covariance spectrum
per candidate energy, after which the rate at any P_T/sigma^2 is a cheap
closed form and the power bisection costs almost nothing beyond the cached
runs.  Candidate energies live on a fixed geometric lattice so that adaptive
re-centering of the search window revisits bit-identical values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import rng as streams
from .baseline import UnreachableTargetError, zf_min_power
from .channel import PowerDelayProfile, generate_channel
from .frames import gaussian_symbols
from .precoder import PrecoderConfig, batch_initial_angles, descend_batch
from .rate import estimate_mui_covariance

CSV_HEADER = ["sweep_var", "L", "tau", "N", "M", "E_star",
              "ce_min_db", "zf_min_db", "gap_db", "rate_se"]

ENERGY_GRID_POINTS = 12
ENERGY_GRID_SPAN = 16.0
# trajectories per descent call are capped so working arrays stay ~< 200 MB
_BATCH_BYTES_BUDGET = 2e8


@dataclass
class ExperimentConfig:
    N: int = 32
    M: int = 4
    L: int = 2
    tau: int = 6
    T: int = 24
    target_rate_bpcu: float = 2.0
    n_channels: int = 50
    n_symbol_frames: int = 100
    n_iterations: int = 4
    energy_grid: list | None = None
    power_bracket_db: tuple = (-15.0, 10.0)
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("N", "M", "L", "tau", "T", "n_channels", "n_symbol_frames", "n_iterations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.target_rate_bpcu <= 0:
            raise ValueError("target_rate_bpcu must be positive")
        if self.T % self.tau != 0:
            warnings.warn(
                f"T={self.T} is not a multiple of tau={self.tau}; the last block is short",
                RuntimeWarning,
                stacklevel=2,
            )
        if self.energy_grid is not None:
            grid = [float(e) for e in self.energy_grid]
            if not grid or any(e <= 0 for e in grid) or any(
                b <= a for a, b in zip(grid, grid[1:])
            ):
                raise ValueError("energy_grid must be nonempty, positive, strictly increasing")
            self.energy_grid = grid
        lo, hi = self.power_bracket_db
        if hi <= lo:
            raise ValueError("power_bracket_db must be (lo, hi) with lo < hi")
        self.power_bracket_db = (float(lo), float(hi))

    @classmethod
    def desk_scale(cls, **overrides) -> "ExperimentConfig":
        return cls(**overrides)

    @classmethod
    def paper_scale(cls, **overrides) -> "ExperimentConfig":
        base = dict(N=80, M=10, L=4, tau=12, T=48, n_channels=24, n_symbol_frames=160)
        base.update(overrides)
        return cls(**base)

    def precoder_config(self) -> PrecoderConfig:
        return PrecoderConfig(
            tau=self.tau, n_iterations=self.n_iterations, rng_seed=self.rng_seed
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "power_bracket_db" in raw:
            raw["power_bracket_db"] = tuple(raw["power_bracket_db"])
        return cls(**raw)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["power_bracket_db"] = list(d["power_bracket_db"])
        return d


@dataclass
class SweepRow:
    sweep_var: str
    L: int
    tau: int
    N: int
    M: int
    E_star: float
    ce_min_db: float
    zf_min_db: float
    gap_db: float
    rate_se: float
    candidate_rates: dict = field(default_factory=dict, compare=False)

    def csv_values(self) -> list[str]:
        out = [self.sweep_var]
        for name in CSV_HEADER[1:]:
            v = getattr(self, name)
            out.append(str(v) if isinstance(v, int) else format(float(v), ".17g"))
        return out


@dataclass
class MinPowerResult:
    power_db: float
    e_star: float
    rate: float
    rate_se: float
    candidate_rates: dict
    n_probes: int


def energy_lattice_window(N: int, M: int, n_points: int = ENERGY_GRID_POINTS,
                          span: float = ENERGY_GRID_SPAN, center: float | None = None):
    """Candidate symbol energies: ``n_points`` consecutive points of the
    global lattice step^j (step = span^(1/(n_points-1))), windowed around
    ``center`` (default N/(2M), half the nominal constant-envelope array
    gain per user)."""
    if center is None:
        center = N / (2.0 * M)
    step = span ** (1.0 / (n_points - 1))
    j0 = round(math.log(center, step))
    j = np.arange(j0 - (n_points - 1) // 2, j0 + n_points - (n_points - 1) // 2)
    return [float(step ** k) for k in j]


def _recenter(grid: list, winner: float, j_bounds: tuple | None = None) -> list:
    """Shift the lattice window when the winner sits at its edge.

    ``j_bounds`` clamps the window center to a lattice-index range so a
    misbehaving rate estimate cannot drag the search off to physically
    meaningless energies.
    """
    n = len(grid)
    idx = grid.index(winner)
    if 2 <= idx <= n - 3:
        return grid
    step = (grid[-1] / grid[0]) ** (1.0 / (n - 1))
    j_win = round(math.log(winner, step))
    if j_bounds is not None:
        j_win = min(max(j_win, j_bounds[0]), j_bounds[1])
    j = np.arange(j_win - (n - 1) // 2, j_win + n - (n - 1) // 2)
    return [float(step ** k) for k in j]


class RateEvaluator:
    """Caches interference spectra per candidate energy for one experiment.

    Channel realizations are fixed at construction (stream (CHANNEL, c)).
    For each energy E the evaluator runs the precoder over every channel and
    symbol frame, then stores only the eigenvalues of the per-user sample
    covariances; rates at any power follow from sum log2(eig + 1/rho).
    """

    def __init__(self, config: ExperimentConfig, frame_mui_fn=None, n_threads: int = 1):
        self.config = config
        self.frame_mui_fn = frame_mui_fn
        self.n_threads = max(1, n_threads)
        if config.n_symbol_frames < config.T and frame_mui_fn is None:
            warnings.warn(
                f"n_symbol_frames={config.n_symbol_frames} < T={config.T}: the sample "
                "covariance is rank deficient and the rate bound will be optimistic",
                RuntimeWarning,
                stacklevel=3,
            )
        self.pdp = PowerDelayProfile.uniform(config.L)
        self.channels = [
            generate_channel(
                streams.substream(config.rng_seed, streams.CHANNEL, c),
                config.N, config.M, self.pdp,
            )
            for c in range(config.n_channels)
        ]
        self._eigs: dict[float, np.ndarray] = {}
        self._draws: dict[tuple, tuple] = {}

    # -- covariance spectra ------------------------------------------------

    def ensure(self, energies: list):
        missing = [e for e in energies if e not in self._eigs]
        for e in missing:
            self._eigs[e] = self._spectra(e)

    def _spectra(self, e_star: float) -> np.ndarray:
        cfg = self.config
        if self.frame_mui_fn is not None:
            return self._spectra_per_channel(e_star)
        C, B = cfg.n_channels, cfg.n_symbol_frames
        chunk = max(1, int(_BATCH_BYTES_BUDGET / (B * cfg.N * cfg.T * 8 * 3)))
        chunks = [(lo, min(C, lo + chunk)) for lo in range(0, C, chunk)]
        out = np.empty((C, cfg.M, cfg.T))

        def run(bounds):
            lo, hi = bounds
            out[lo:hi] = self._descend_chunk(e_star, lo, hi)

        if self.n_threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=self.n_threads) as pool:
                list(pool.map(run, chunks))
        else:
            for bounds in chunks:
                run(bounds)
        return out

    def _chunk_draws(self, lo: int, hi: int):
        """Symbols and pristine starting angles for channels lo..hi-1; these
        do not depend on the candidate energy, so they are drawn once."""
        key = (lo, hi)
        if key not in self._draws:
            cfg = self.config
            B, M, N, T = cfg.n_symbol_frames, cfg.M, cfg.N, cfg.T
            pc = cfg.precoder_config()
            nc = hi - lo
            symbols = np.empty((nc, B, M, T), dtype=complex)
            init_seeds = []
            for ci, c in enumerate(range(lo, hi)):
                base = streams.substream(cfg.rng_seed, streams.TRIAL, c)
                for s in range(B):
                    U = gaussian_symbols(M, T, 1.0, streams.substream(base, streams.SYMBOLS, s))
                    symbols[ci, s] = U.symbols
                init_seeds.append(
                    [streams.substream(base, streams.INIT, s) for s in range(B)]
                )
            init = batch_initial_angles(nc, B, N, T, pc, init_seeds)
            self._draws[key] = (symbols, init)
        return self._draws[key]

    def _descend_chunk(self, e_star: float, lo: int, hi: int) -> np.ndarray:
        cfg = self.config
        B, M, T = cfg.n_symbol_frames, cfg.M, cfg.T
        pc = cfg.precoder_config()
        nc = hi - lo
        gains = np.stack([self.channels[c].gains for c in range(lo, hi)])
        symbols, init = self._chunk_draws(lo, hi)
        energies = np.full(M, e_star)
        _, mui = descend_batch(gains, symbols, energies, pc, init.copy())
        eigs = np.empty((nc, M, T))
        for ci in range(nc):
            for k in range(M):
                cov = np.einsum("bt,bs->ts", mui[ci, :, k, :], mui[ci, :, k, :].conj()) / B
                eigs[ci, k] = np.clip(np.linalg.eigvalsh(0.5 * (cov + cov.conj().T)), 0.0, None)
        return eigs

    def _spectra_per_channel(self, e_star: float) -> np.ndarray:
        cfg = self.config
        out = np.empty((cfg.n_channels, cfg.M, cfg.T))
        for c, H in enumerate(self.channels):
            covs = estimate_mui_covariance(
                H, np.full(cfg.M, e_star), cfg.precoder_config(), cfg.n_symbol_frames,
                streams.substream(cfg.rng_seed, streams.TRIAL, c),
                n_time=cfg.T, frame_mui_fn=self.frame_mui_fn,
            )
            for k in range(cfg.M):
                out[c, k] = np.clip(np.linalg.eigvalsh(covs[k].matrix), 0.0, None)
        return out

    # -- rates ---------------------------------------------------------------

    def rate_curve(self, e_star: float, power_db: float) -> tuple[float, float]:
        """(mean per-user rate, standard error over channels) at one power."""
        self.ensure([e_star])
        lam = self._eigs[e_star]  # (C, M, T)
        shift = 10.0 ** (-power_db / 10.0)
        per_user = np.maximum(
            0.0, np.log2(e_star) - np.mean(np.log2(lam + shift), axis=2)
        )  # (C, M)
        per_channel = per_user.mean(axis=1)
        se = per_channel.std(ddof=1) / np.sqrt(len(per_channel)) if len(per_channel) > 1 else 0.0
        return float(per_channel.mean()), float(se)

    def best_energy(self, grid: list, power_db: float):
        """Argmax of the mean per-user rate over the candidate energies; ties
        break toward the smaller energy."""
        self.ensure(grid)
        rates = {e: self.rate_curve(e, power_db) for e in grid}
        best = max(grid, key=lambda e: (rates[e][0], -e))
        return best, rates


def best_symbol_energy(config: ExperimentConfig, P_T_over_sigma2: float,
                       frame_mui_fn=None, n_threads: int = 1):
    """Optimal equal symbol energy on the candidate grid at a fixed power.

    Returns (E*, rate at E*).
    """
    evaluator = RateEvaluator(config, frame_mui_fn=frame_mui_fn, n_threads=n_threads)
    grid = config.energy_grid or energy_lattice_window(config.N, config.M)
    power_db = 10.0 * math.log10(P_T_over_sigma2)
    best, rates = evaluator.best_energy(grid, power_db)
    return best, rates[best][0]


def ce_min_power(config: ExperimentConfig, frame_mui_fn=None, n_threads: int = 1,
                 evaluator: RateEvaluator | None = None) -> MinPowerResult:
    """Minimum P_T/sigma^2 (dB) for the CE precoder to reach the target rate.

    Outer bisection on the power in dB; every probe re-optimizes the symbol
    energy over the candidate grid.  With the default (lattice) grid the
    search window re-centers on the winning energy whenever it drifts to the
    window edge; an explicit ``config.energy_grid`` is used as-is.  Stops
    when the probed rate is within 0.02 bpcu of the target or the bracket is
    narrower than 0.05 dB.
    """
    if evaluator is None:
        evaluator = RateEvaluator(config, frame_mui_fn=frame_mui_fn, n_threads=n_threads)
    adaptive = config.energy_grid is None
    grid = list(config.energy_grid) if config.energy_grid else energy_lattice_window(
        config.N, config.M
    )
    target = config.target_rate_bpcu
    if adaptive:
        step = ENERGY_GRID_SPAN ** (1.0 / (ENERGY_GRID_POINTS - 1))
        j0 = round(math.log(config.N / (2.0 * config.M), step))
        j_bounds = (j0 - 2 * ENERGY_GRID_POINTS, j0 + 2 * ENERGY_GRID_POINTS)
    state = {"grid": grid, "last": None, "probes": 0}

    def rate_at(db: float) -> float:
        best, rates = evaluator.best_energy(state["grid"], db)
        if adaptive:
            state["grid"] = _recenter(state["grid"], best, j_bounds)
        state["last"] = (best, rates)
        state["probes"] += 1
        return rates[best][0]

    lo, hi = _expand_power_bracket(rate_at, target, config.power_bracket_db)
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = rate_at(mid)
        if abs(r - target) <= 0.02 or (hi - lo) <= 0.05:
            break
        if r < target:
            lo = mid
        else:
            hi = mid
    best, rates = state["last"]
    return MinPowerResult(
        power_db=float(mid),
        e_star=float(best),
        rate=rates[best][0],
        rate_se=rates[best][1],
        candidate_rates={e: r[0] for e, r in rates.items()},
        n_probes=state["probes"],
    )


def _expand_power_bracket(rate_at, target, bracket_db):
    lo, hi = float(bracket_db[0]), float(bracket_db[1])
    rate_lo, rate_hi = rate_at(lo), rate_at(hi)
    while rate_hi < target and hi - lo < 60.0:
        hi += 6.0
        rate_hi = rate_at(hi)
    while rate_lo >= target and hi - lo < 60.0:
        lo -= 6.0
        rate_lo = rate_at(lo)
    if rate_hi < target or rate_lo >= target:
        raise UnreachableTargetError(
            f"target {target} bpcu unreachable in [{lo:.1f}, {hi:.1f}] dB "
            f"(rates [{rate_lo:.4f}, {rate_hi:.4f}])",
            lo, hi, rate_lo, rate_hi,
        )
    return lo, hi


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def _row(config: ExperimentConfig, sweep_var: str, n_threads: int) -> SweepRow:
    ce = ce_min_power(config, n_threads=n_threads)
    zf_db = zf_min_power(
        config.N, config.M, config.L, config.target_rate_bpcu,
        config.n_channels, config.rng_seed,
    )
    return SweepRow(
        sweep_var=sweep_var,
        L=config.L, tau=config.tau, N=config.N, M=config.M,
        E_star=ce.e_star,
        ce_min_db=ce.power_db,
        zf_min_db=zf_db,
        gap_db=ce.power_db - zf_db,
        rate_se=ce.rate_se,
        candidate_rates=ce.candidate_rates,
    )


def sweep_tau(config: ExperimentConfig, tau_list, L_list, n_threads: int = 1,
              scale_T: bool = True) -> list[SweepRow]:
    """One row per (L, tau).

    By default each row runs at T = 4*tau; with ``scale_T=False`` every row
    keeps ``config.T``, which makes the frame-edge contribution identical
    across the tau axis (the cleaner setting for saturation comparisons).
    """
    rows = []
    for L in L_list:
        for tau in tau_list:
            row_cfg = replace(
                config, L=int(L), tau=int(tau),
                T=4 * int(tau) if scale_T else config.T,
            )
            rows.append(_row(row_cfg, "tau", n_threads))
    return rows


def sweep_antennas(config: ExperimentConfig, N_list, n_threads: int = 1) -> list[SweepRow]:
    """One row per antenna count, CE and ZF columns."""
    return [
        _row(replace(config, N=int(N)), "N", n_threads) for N in N_list
    ]


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def rows_to_csv(rows: list, seed, version: str) -> str:
    buf = io.StringIO()
    buf.write(f"# ceprecode sweep v{version}\n")
    buf.write(f"# seed={seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_values())
    return buf.getvalue()


def write_csv(rows: list, path, seed, version: str):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows, seed, version))


def read_csv(path) -> list[SweepRow]:
    """Parse a sweep CSV back into rows (ignores # comments)."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(
            SweepRow(
                sweep_var=rec[0],
                L=int(rec[1]), tau=int(rec[2]), N=int(rec[3]), M=int(rec[4]),
                E_star=float(rec[5]),
                ce_min_db=float(rec[6]), zf_min_db=float(rec[7]),
                gap_db=float(rec[8]), rate_se=float(rec[9]),
            )
        )
    return rows
