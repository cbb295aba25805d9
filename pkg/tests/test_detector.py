"""Energy detector: half-energy metrics, decisions, and closed-form means."""

import math

import numpy as np
import pytest

from airmv.channel import ChannelModel, draw_channel, superpose
from airmv.detector import (
    MetricPair,
    VoteCensus,
    detect_mv,
    detect_mv_batch,
    expected_metrics,
    half_energies,
    half_energy_batch,
)
from airmv.encoder import EncoderConfig, encode
from airmv.sequences import gray_half_masks
from airmv.streams import substream

PERM = (3, 2, 1)


def noiseless(votes):
    cfg = EncoderConfig(m=3, perm=PERM, phase_randomization=False)
    return encode(votes, cfg)


class TestHalfEnergies:
    def test_single_plus_vote_concentrates_energy(self):
        pair = half_energies(noiseless((1, 0, 0)), PERM, 1)
        assert pair.m_plus == pytest.approx(8.0, rel=1e-12)
        assert pair.m_minus == pytest.approx(0.0, abs=1e-12)

    def test_base_sequence_splits_evenly(self):
        seq = noiseless((0, 0, 0))
        for n in (1, 2, 3):
            pair = half_energies(seq, PERM, n)
            assert pair.m_plus == pytest.approx(4.0)
            assert pair.m_minus == pytest.approx(4.0)

    def test_partition_of_total_energy(self):
        rng = substream(1, 0)
        seq = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        total = float(np.sum(np.abs(seq) ** 2))
        for n in (1, 2, 3):
            pair = half_energies(seq, PERM, n)
            assert pair.m_plus + pair.m_minus == pytest.approx(total, rel=1e-12)
            assert pair.m_plus >= 0 and pair.m_minus >= 0

    def test_each_half_has_half_the_indices(self):
        masks = gray_half_masks(6, tuple(range(1, 7)))
        assert (masks.sum(axis=1) == 32).all()
        union = np.ones(64, dtype=bool)
        for n in range(6):
            plus = masks[n] == 1
            assert plus.sum() == 32 and (~plus).sum() == 32
            union &= plus | ~plus
        assert union.all()

    def test_slot_out_of_range(self):
        with pytest.raises(IndexError):
            half_energies(np.ones(8), PERM, 4)


class TestDetect:
    def test_single_sensor_plus(self):
        assert detect_mv(noiseless((1, 0, 0)), PERM)[0] == 1

    def test_single_sensor_mixed(self):
        decisions = detect_mv(noiseless((-1, -1, 0)), PERM)
        assert decisions[0] == -1 and decisions[1] == -1

    def test_tie_resolves_positive(self):
        decisions = detect_mv(noiseless((0, 0, 0)), PERM)
        np.testing.assert_array_equal(decisions, (1, 1, 1))

    def test_phase_rotation_invariance(self):
        rng = substream(2, 0)
        seq = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        perm = (2, 1, 4, 3)
        base = detect_mv(seq, perm)
        rotated = seq * np.exp(1j * rng.uniform(0, 2 * np.pi, size=16))
        np.testing.assert_array_equal(detect_mv(rotated, perm), base)

    def test_batch_matches_scalar(self):
        rng = substream(3, 0)
        batch = rng.standard_normal((10, 8)) + 1j * rng.standard_normal((10, 8))
        out = detect_mv_batch(batch, PERM)
        for row, expected in zip(batch, out):
            np.testing.assert_array_equal(detect_mv(row, PERM), expected)

    def test_end_to_end_noiseless_chain(self):
        cfg = EncoderConfig(m=3, perm=PERM, phase_randomization=False)
        seq = encode((1, 0, 0), cfg)
        real = draw_channel(ChannelModel("awgn"), 1, 8, substream(4, 0))
        received = superpose(seq[None, :], real)
        assert detect_mv(received, PERM)[0] == 1


class TestExpectedMetrics:
    def test_limit_form_example(self):
        assert expected_metrics(VoteCensus(3, 1, 1), math.inf, 0.0, 3) == (28.0, 12.0)

    def test_balanced_census_is_symmetric(self):
        for alpha in (0.3, 1.0, math.inf):
            up, down = expected_metrics(VoteCensus(7, 7, 3), alpha, 0.2, 4)
            assert up == pytest.approx(down, rel=1e-12)

    def test_zero_scale_collapses(self):
        up, down = expected_metrics(VoteCensus(4, 5, 2), 1e-12, 0.3, 5)
        collapsed = 2**4 * (11 + 0.3)
        assert up == pytest.approx(collapsed, rel=1e-6)
        assert down == pytest.approx(collapsed, rel=1e-6)

    def test_mean_sign_tracks_majority(self):
        for k_plus, k_minus in [(5, 2), (2, 5), (30, 10)]:
            up, down = expected_metrics(VoteCensus(k_plus, k_minus, 4), math.inf, 0.1, 4)
            assert np.sign(up - down) == np.sign(k_plus - k_minus)

    def test_limit_is_limit_of_finite(self):
        census = VoteCensus(6, 3, 1)
        fin = expected_metrics(census, 20.0, 0.1, 5)
        lim = expected_metrics(census, math.inf, 0.1, 5)
        assert fin[0] == pytest.approx(lim[0], rel=1e-9)
        assert fin[1] == pytest.approx(lim[1], rel=1e-9)

    def test_census_validation(self):
        with pytest.raises(ValueError):
            VoteCensus(-1, 0, 0)

    def test_metric_pair_fields(self):
        pair = MetricPair(2.0, 1.0)
        assert pair.m_plus == 2.0 and pair.m_minus == 1.0
