"""Transmit-side frame containers: phase angles and information symbols."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as streams

TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Reduce angles into [-pi, pi)."""
    out = np.mod(np.asarray(a, dtype=float) + np.pi, TWO_PI) - np.pi
    # mod can round a value just below 2*pi up to 2*pi exactly
    out = np.where(out >= np.pi, -np.pi, out)
    return out if out.ndim else float(out)


@dataclass
class PhaseFrame:
    """Per-antenna transmit phases, shape (n_antennas, n_time), radians in [-pi, pi).

    The angle array is owned by the frame but deliberately mutable: the block
    coordinate-descent optimizer updates it in place.
    """

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.ascontiguousarray(self.angles, dtype=float)
        if self.angles.ndim != 2:
            raise ValueError(f"angles must be 2-d (antenna, time), got shape {self.angles.shape}")
        if not np.all(np.isfinite(self.angles)):
            raise ValueError("angles must be finite")
        if np.any(self.angles < -np.pi) or np.any(self.angles >= np.pi):
            raise ValueError("angles must lie in [-pi, pi)")

    @property
    def n_antennas(self) -> int:
        return self.angles.shape[0]

    @property
    def n_time(self) -> int:
        return self.angles.shape[1]

    @classmethod
    def zeros(cls, n_antennas: int, n_time: int) -> "PhaseFrame":
        return cls(np.zeros((n_antennas, n_time)))

    @classmethod
    def uniform_random(cls, n_antennas: int, n_time: int, rng_seed) -> "PhaseFrame":
        gen = streams.generator(rng_seed)
        return cls(gen.uniform(-np.pi, np.pi, size=(n_antennas, n_time)))


@dataclass
class SymbolFrame:
    """Unit-average-energy information symbols u[k, t] plus per-user energies E_k.

    The symbol actually targeted at user k at time t is sqrt(E_k) * u[k, t].
    """

    symbols: np.ndarray
    energies: np.ndarray = field(default=None)

    def __post_init__(self):
        self.symbols = np.ascontiguousarray(self.symbols, dtype=complex)
        if self.symbols.ndim != 2:
            raise ValueError(f"symbols must be 2-d (user, time), got shape {self.symbols.shape}")
        if self.energies is None:
            self.energies = np.ones(self.symbols.shape[0])
        self.energies = np.ascontiguousarray(self.energies, dtype=float)
        if self.energies.shape != (self.symbols.shape[0],):
            raise ValueError("energies must have one entry per user")
        if np.any(self.energies <= 0) or not np.all(np.isfinite(self.energies)):
            raise ValueError("energies must be strictly positive and finite")
        if not np.all(np.isfinite(self.symbols)):
            raise ValueError("symbols must be finite")

    @property
    def n_users(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_time(self) -> int:
        return self.symbols.shape[1]

    def scaled(self) -> np.ndarray:
        """sqrt(E_k) * u[k, t], the target signal at each user."""
        return np.sqrt(self.energies)[:, None] * self.symbols


def gaussian_symbols(n_users: int, n_time: int, energies, rng_seed) -> SymbolFrame:
    """Draw i.i.d. unit-variance circularly symmetric Gaussian symbols."""
    gen = streams.generator(rng_seed)
    u = streams.complex_normal(gen, (n_users, n_time))
    energies = np.broadcast_to(np.asarray(energies, dtype=float), (n_users,)).copy()
    return SymbolFrame(u, energies)
