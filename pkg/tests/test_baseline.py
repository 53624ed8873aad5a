"""Zero-forcing baseline under the total average power constraint."""

import numpy as np
import pytest

from ceprecode import (
    ChannelTensor,
    FlatChannelMatrix,
    PowerDelayProfile,
    UnreachableTargetError,
    generate_channel,
    zf_min_power,
    zf_per_user_rate_flat,
    zf_per_user_rate_selective,
)
from ceprecode.baseline import frequency_response, inverse_gram_trace, zf_ergodic_rate


class TestFlatRate:
    def test_single_antenna_single_user(self):
        Hm = FlatChannelMatrix(np.ones((1, 1)))
        assert zf_per_user_rate_flat(Hm, 3.0) == pytest.approx(2.0)

    def test_two_antenna_array_gain(self):
        Hm = FlatChannelMatrix(np.ones((1, 2)))
        # trace((HH^H)^-1) = 1/2: one doubling buys 3 dB
        assert zf_per_user_rate_flat(Hm, 1.0) == pytest.approx(np.log2(3.0))

    def test_trace_matches_explicit_inverse(self, rng):
        Hm = FlatChannelMatrix(
            rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        )
        gram = Hm.matrix @ Hm.matrix.conj().T
        expect = np.real(np.trace(np.linalg.inv(gram)))
        assert inverse_gram_trace(Hm) == pytest.approx(expect, abs=1e-10)

    def test_rank_deficient_rejected(self):
        row = np.array([[1.0, 2.0, 3.0]])
        Hm = FlatChannelMatrix(np.vstack([row, row]))
        with pytest.raises(ValueError, match="rank deficient"):
            zf_per_user_rate_flat(Hm, 1.0)

    def test_more_users_than_antennas_rejected(self):
        with pytest.raises(ValueError, match="M <= N"):
            FlatChannelMatrix(np.ones((3, 2)))

    def test_scale_covariance(self, rng):
        # scaling the channel by c changes the trace by 1/|c|^2
        Hm = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))
        c = 0.5 - 1.5j
        t1 = inverse_gram_trace(FlatChannelMatrix(Hm))
        t2 = inverse_gram_trace(FlatChannelMatrix(c * Hm))
        assert t2 == pytest.approx(t1 / abs(c) ** 2, rel=1e-10)


class TestSelectiveRate:
    def test_flat_channel_matches_flat_rate(self, rng):
        gains = rng.standard_normal((2, 5, 1)) + 1j * rng.standard_normal((2, 5, 1))
        H = ChannelTensor(gains)
        flat = zf_per_user_rate_flat(FlatChannelMatrix(gains[:, :, 0]), 2.0)
        for n_sc in (1, 4, 9):
            assert zf_per_user_rate_selective(H, 2.0, n_sc) == pytest.approx(flat, rel=1e-12)

    def test_pure_delay_invariance(self, rng):
        h0 = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
        flat = ChannelTensor(h0[:, :, None])
        delayed = ChannelTensor(
            np.stack([np.zeros_like(h0), h0], axis=2)
        )
        r0 = zf_per_user_rate_selective(flat, 3.0, 8)
        r1 = zf_per_user_rate_selective(delayed, 3.0, 8)
        assert r1 == pytest.approx(r0, rel=1e-12)

    def test_frequency_response_matches_direct_dft(self, rng):
        gains = rng.standard_normal((2, 8, 2)) + 1j * rng.standard_normal((2, 8, 2))
        H = ChannelTensor(gains)
        resp = frequency_response(H, 4)
        for s in range(4):
            direct = sum(
                gains[:, :, l] * np.exp(-2j * np.pi * s * l / 4) for l in range(2)
            )
            np.testing.assert_allclose(resp[s], direct, atol=1e-12)

    def test_needs_enough_subcarriers(self, rng):
        gains = rng.standard_normal((1, 2, 3)) + 0j
        with pytest.raises(ValueError, match="n_subcarriers"):
            zf_per_user_rate_selective(ChannelTensor(gains), 1.0, 2)


class TestMinPower:
    def test_closed_form_single_link(self):
        # deterministic h = 1: log2(1 + rho) = 2 at rho = 3
        ch = [ChannelTensor(np.ones((1, 1, 1)))] * 2
        db = zf_min_power(1, 1, 1, 2.0, 2, rng_seed=0, channels=ch)
        assert db == pytest.approx(10 * np.log10(3.0), abs=0.05)

    def test_three_db_per_doubling(self):
        db40 = zf_min_power(40, 10, 1, 2.0, 300, rng_seed=3)
        db80 = zf_min_power(80, 10, 1, 2.0, 300, rng_seed=3)
        assert db40 - db80 == pytest.approx(3.0, abs=0.7)

    def test_monotone_in_target(self):
        lo = zf_min_power(8, 2, 1, 2.0, 20, rng_seed=1)
        hi = zf_min_power(8, 2, 1, 3.0, 20, rng_seed=1)
        assert hi > lo

    def test_deterministic(self):
        a = zf_min_power(8, 2, 2, 2.0, 10, rng_seed=5)
        b = zf_min_power(8, 2, 2, 2.0, 10, rng_seed=5)
        assert a == b

    def test_unreachable_target_reports_bracket(self):
        ch = [ChannelTensor(np.ones((1, 1, 1)))] * 2
        with pytest.raises(UnreachableTargetError) as info:
            zf_min_power(1, 1, 1, 40.0, 2, rng_seed=0, channels=ch,
                         bracket_db=(-10.0, 10.0))
        assert info.value.rate_hi < 40.0

    def test_strictly_increasing_rate_in_power(self):
        H = generate_channel(2, N=6, M=2, pdp=PowerDelayProfile.uniform(2))
        rates = [
            zf_per_user_rate_selective(H, rho, 4) for rho in np.logspace(-2, 2, 12)
        ]
        assert all(b > a for a, b in zip(rates, rates[1:]))


def test_ergodic_rate_standard_error_shrinks():
    r1, se1 = zf_ergodic_rate(16, 4, 2, 1.0, 20, rng_seed=9)
    r2, se2 = zf_ergodic_rate(16, 4, 2, 1.0, 200, rng_seed=9)
    assert se2 < se1
    assert abs(r1 - r2) < 4 * np.sqrt(se1**2 + se2**2)
