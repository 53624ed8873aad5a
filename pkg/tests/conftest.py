"""Shared brute-force oracles, independent of the library's fast paths.

Everything here evaluates the signal model by direct summation over all
indices, so the incremental/vectorized implementations are checked against
plain definitions.
"""

import numpy as np
import pytest


def direct_field(gains, angles, t):
    """sum_i sum_l h[k,i,l] * exp(j*angles[i, t-l]) at 1-based time t,
    zero before the frame; plain loops."""
    M, N, L = gains.shape
    out = np.zeros(M, dtype=complex)
    for k in range(M):
        acc = 0.0 + 0.0j
        for i in range(N):
            for l in range(L):
                src = t - l
                if src >= 1:
                    acc += gains[k, i, l] * np.exp(1j * angles[i, src - 1])
        out[k] = acc
    return out


def direct_objective(gains, angles, symbols, energies):
    """Total residual energy by direct summation."""
    M, N, L = gains.shape
    T = angles.shape[1]
    total = 0.0
    for t in range(1, T + 1):
        field = direct_field(gains, angles, t)
        for k in range(M):
            resid = field[k] / np.sqrt(N) - np.sqrt(energies[k]) * symbols[k, t - 1]
            total += abs(resid) ** 2
    return total


def direct_block_objective(gains, angles, symbols, energies, start, end):
    """Residual energy restricted to t = start..end (1-based, inclusive)."""
    M, N, L = gains.shape
    total = 0.0
    for t in range(start, end + 1):
        field = direct_field(gains, angles, t)
        for k in range(M):
            resid = field[k] / np.sqrt(N) - np.sqrt(energies[k]) * symbols[k, t - 1]
            total += abs(resid) ** 2
    return total


def direct_residuals(gains, angles, symbols, energies, start, end):
    """S(k, t) for t = start..end by direct summation; shape (M, end-start+1)."""
    M, N, L = gains.shape
    out = np.zeros((M, end - start + 1), dtype=complex)
    for j, t in enumerate(range(start, end + 1)):
        field = direct_field(gains, angles, t)
        for k in range(M):
            out[k, j] = field[k] / np.sqrt(N) - np.sqrt(energies[k]) * symbols[k, t - 1]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
