"""Unit tests for the binomial interval helpers."""

import math

import pytest

from triqss.stats import Z_95, ratio, wilson_interval


class TestWilsonInterval:
    def test_matches_closed_form(self):
        successes, trials, z = 45, 100, Z_95
        lo, hi = wilson_interval(successes, trials)
        p = successes / trials
        denom = 1.0 + z * z / trials
        center = (p + z * z / (2 * trials)) / denom
        half = (z / denom) * math.sqrt(
            p * (1.0 - p) / trials + z * z / (4 * trials * trials)
        )
        assert lo == pytest.approx(center - half)
        assert hi == pytest.approx(center + half)

    def test_interval_is_ordered_and_clipped(self):
        for successes, trials in [(0, 50), (50, 50), (1, 3), (999, 1000)]:
            lo, hi = wilson_interval(successes, trials)
            assert 0.0 <= lo <= hi <= 1.0

    def test_zero_successes_has_positive_upper_bound(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-12)
        assert 0.001 < hi < 0.05

    def test_no_trials_gives_trivial_interval(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_narrows_with_more_trials(self):
        lo1, hi1 = wilson_interval(50, 100)
        lo2, hi2 = wilson_interval(5000, 10000)
        assert (hi2 - lo2) < (hi1 - lo1)

    def test_covers_point_estimate(self):
        lo, hi = wilson_interval(37, 120)
        assert lo < 37 / 120 < hi

    @pytest.mark.parametrize("successes,trials", [(-1, 10), (11, 10), (0, -1)])
    def test_rejects_bad_counts(self, successes, trials):
        with pytest.raises(ValueError, match="bad binomial counts"):
            wilson_interval(successes, trials)


class TestRatio:
    def test_plain_division(self):
        assert ratio(3, 4) == 0.75

    def test_zero_denominator_is_zero(self):
        assert ratio(0, 0) == 0.0
        assert ratio(5, 0) == 0.0
