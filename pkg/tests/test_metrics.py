"""Worked values and edge cases for the set distances."""

import math

import numpy as np
import pytest

from breakdist.errors import DataError
from breakdist.metrics import (
    MetricSpec,
    hausdorff,
    mh1,
    mh2,
    mh2_multiset,
    mh3,
    mh3_multiset,
    min_set_dist,
    mj_p,
    mj_p_multiset,
    parse_metric,
    point_to_set,
    set_distance,
    wasserstein1,
)
from breakdist.sets import ChangePointSet

TOL = 1e-9

# Two-point sets whose elements are each one index off: {0, 999} vs {1, 1000}.
PAIR_A = ChangePointSet([0, 999])
PAIR_B = ChangePointSet([1, 1000])

# Dense grids sharing 999 of 1000 indices: {0..999} vs {1..1000}.
GRID_A = ChangePointSet(range(0, 1000))
GRID_B = ChangePointSet(range(1, 1001))


class TestPointToSet:
    def test_member_has_zero_distance(self):
        assert point_to_set(5, ChangePointSet([5, 40])) == 0.0

    def test_nearest_of_two_sides(self):
        assert point_to_set(3, ChangePointSet([0, 999])) == 3.0
        assert point_to_set(996, ChangePointSet([0, 999])) == 3.0

    def test_grid_member(self):
        assert point_to_set(500, ChangePointSet(range(0, 1001, 100))) == 0.0

    def test_empty_target_rejected(self):
        with pytest.raises(DataError):
            point_to_set(1, [])


class TestMinSetDist:
    def test_disjoint(self):
        assert min_set_dist(ChangePointSet([10, 20]), ChangePointSet([33, 47])) == 13.0

    def test_shared_point_gives_zero(self):
        assert min_set_dist(ChangePointSet([1, 9]), ChangePointSet([9, 70])) == 0.0

    def test_adjacent(self):
        assert min_set_dist(PAIR_A, PAIR_B) == 1.0


class TestShiftedPair:
    """All six distances on the one-index-shifted two-point sets."""

    def test_hausdorff(self):
        assert hausdorff(PAIR_A, PAIR_B) == pytest.approx(1.0, abs=TOL)

    def test_mh_family(self):
        assert mh1(PAIR_A, PAIR_B) == pytest.approx(1.0, abs=TOL)
        assert mh2(PAIR_A, PAIR_B) == pytest.approx(4.0, abs=TOL)
        assert mh3(PAIR_A, PAIR_B) == pytest.approx(1.0, abs=TOL)

    def test_wasserstein(self):
        assert wasserstein1(PAIR_A, PAIR_B) == pytest.approx(1.0, abs=TOL)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_mj(self, p):
        assert mj_p(PAIR_A, PAIR_B, p) == pytest.approx(1.0, abs=TOL)


class TestShiftedGrid:
    """The dense grids share 999 points yet Hausdorff and Wasserstein stay 1."""

    def test_hausdorff_and_wasserstein(self):
        assert hausdorff(GRID_A, GRID_B) == pytest.approx(1.0, abs=TOL)
        assert wasserstein1(GRID_A, GRID_B) == pytest.approx(1.0, abs=TOL)

    def test_mh1_shrinks_with_size(self):
        assert mh1(GRID_A, GRID_B) == pytest.approx(1e-3, abs=TOL)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_mj_shrinks_with_size(self, p):
        assert mj_p(GRID_A, GRID_B, p) == pytest.approx(1e-3 ** (1.0 / p), abs=TOL)


class TestSmallWorkedExample:
    """S = {0, 10}, T = {0, 10, 12}: hand-computed values."""

    S = ChangePointSet([0, 10])
    T = ChangePointSet([0, 10, 12])

    def test_all_six(self):
        assert hausdorff(self.S, self.T) == pytest.approx(2.0, abs=TOL)
        assert mh1(self.S, self.T) == pytest.approx(2.0 / 3.0, abs=TOL)
        assert mh2(self.S, self.T) == pytest.approx(2.0, abs=TOL)
        assert mh3(self.S, self.T) == pytest.approx(0.4, abs=TOL)
        assert mj_p(self.S, self.T, 1.0) == pytest.approx(1.0 / 3.0, abs=TOL)
        assert wasserstein1(self.S, self.T) == pytest.approx(7.0 / 3.0, abs=TOL)

    def test_symmetry(self):
        for fn in (hausdorff, mh1, mh2, mh3, wasserstein1):
            assert fn(self.S, self.T) == fn(self.T, self.S)
        assert mj_p(self.S, self.T, 2.0) == mj_p(self.T, self.S, 2.0)

    def test_identity(self):
        for fn in (hausdorff, mh1, mh2, mh3, wasserstein1):
            assert fn(self.S, self.S) == 0.0
        assert mj_p(self.T, self.T, 0.5) == 0.0


class TestMJ:
    def test_rejects_nonpositive_p(self):
        with pytest.raises(DataError, match="not a semi-metric for p <= 0"):
            mj_p([1.0, 2.0], [3.0], 0.0)
        with pytest.raises(DataError, match="not a semi-metric for p <= 0"):
            mj_p([1.0, 2.0], [3.0], -1.5)

    def test_infinite_p_is_hausdorff(self):
        a = ChangePointSet([3, 80, 200])
        b = ChangePointSet([10, 60, 430])
        assert mj_p(a, b, math.inf) == hausdorff(a, b)

    def test_never_exceeds_hausdorff(self):
        a = ChangePointSet([0, 50, 120, 400])
        b = ChangePointSet([10, 90, 380])
        h = hausdorff(a, b)
        for p in (0.5, 1, 2, 5, 20, 100):
            assert mj_p(a, b, p) <= h + TOL

    def test_large_p_large_indices_stays_finite(self):
        # (d / d_max)^100 underflows without factoring out the peak; the
        # result must still land within 5% of the Hausdorff limit
        a = ChangePointSet([0, 10**8])
        b = ChangePointSet([5 * 10**7])
        h = hausdorff(a, b)
        v = mj_p(a, b, 100.0)
        assert math.isfinite(v)
        assert 0.95 * h <= v <= h + TOL

    def test_monotone_in_p(self):
        a = ChangePointSet([0, 40, 200, 777])
        b = ChangePointSet([17, 300, 500])
        grid = [0.25, 0.5, 1, 2, 4, 8, 32]
        vals = [mj_p(a, b, p) for p in grid]
        for lo, hi in zip(vals, vals[1:]):
            assert lo <= hi + TOL


class TestDuplication:
    """Duplicating every element moves MH2/MH3 but never MJ_p."""

    S = ChangePointSet([0, 10])
    T = ChangePointSet([0, 12])
    S2 = np.asarray([0.0, 0.0, 10.0, 10.0])

    def test_mj_invariant(self):
        for p in (0.5, 1.0, 2.0, 7.0):
            assert mj_p_multiset(self.S2, self.T, p) == pytest.approx(
                mj_p(self.S, self.T, p), abs=1e-12
            )

    def test_mh2_mh3_shift(self):
        sum_s = sum(point_to_set(s, self.T) for s in self.S)
        sum_t = sum(point_to_set(t, self.S) for t in self.T)
        assert mh2_multiset(self.S2, self.T) == pytest.approx(
            2 * sum_s + sum_t, abs=TOL
        )
        assert mh3_multiset(self.S2, self.T) == pytest.approx(
            (2 * sum_s + sum_t) / (4 + 2), abs=TOL
        )

    def test_single_repeat_does_move_mj(self):
        # repeating just one element reweights the average, so this is not
        # the same as the full duplication above
        plain = mj_p(self.S, self.T, 1.0)
        repeated = mj_p_multiset([0.0, 10.0, 10.0], self.T, 1.0)
        assert plain == pytest.approx(1.0, abs=TOL)
        assert repeated == pytest.approx(7.0 / 6.0, abs=TOL)


class TestDeformation:
    """Moving points of S nearer to T changes MJ_1 but can leave MH1 fixed.

    Every t in T is closest to s0 = 20, and the T-side directional mean
    dominates, so MH1 ignores where the rest of S sits.
    """

    T = ChangePointSet([1000, 1100, 1200])

    def test_mh1_blind_mj1_sensitive(self):
        s_orig = ChangePointSet([0, 10, 20])
        s_moved = ChangePointSet([5, 15, 20])
        assert mh1(s_orig, self.T) == pytest.approx(1080.0, abs=TOL)
        assert mh1(s_moved, self.T) == pytest.approx(1080.0, abs=TOL)
        assert mj_p(s_orig, self.T, 1.0) == pytest.approx(1035.0, abs=TOL)
        assert mj_p(s_moved, self.T, 1.0) == pytest.approx(3100.0 / 3.0, abs=TOL)


class TestOutlierAsymptotics:
    """One remote point at M dominates each distance at a known rate."""

    M = 1_000_000.0
    S = ChangePointSet([10, 20, 30, 40, 50])
    T = ChangePointSet([10, 20, 30, 40, 1_000_000])

    def test_limit_ratios(self):
        m, s, t = self.M, self.S, self.T
        assert hausdorff(s, t) / m == pytest.approx(1.0, rel=0.01)
        assert mh1(s, t) * len(t) / m == pytest.approx(1.0, rel=0.01)
        assert mh3(s, t) * (len(s) + len(t)) / m == pytest.approx(1.0, rel=0.01)
        for p in (0.5, 1.0, 2.0):
            scale = (2 * len(t)) ** (1.0 / p)
            assert mj_p(s, t, p) * scale / m == pytest.approx(1.0, rel=0.01)


class TestMetricSpec:
    def test_labels(self):
        assert MetricSpec("hausdorff").label == "hausdorff"
        assert MetricSpec("mj", 1).label == "mj1"
        assert MetricSpec("mj", 0.5).label == "mj0.5"
        assert MetricSpec("mj", math.inf).label == "mjinf"

    def test_validation(self):
        with pytest.raises(DataError, match="unknown metric kind"):
            MetricSpec("euclid")
        with pytest.raises(DataError, match="requires an exponent"):
            MetricSpec("mj")
        with pytest.raises(DataError, match="p <= 0"):
            MetricSpec("mj", -2)
        with pytest.raises(DataError, match="takes no exponent"):
            MetricSpec("hausdorff", 2)

    def test_parse_round_trip(self):
        for name in ("hausdorff", "mh1", "mh2", "mh3", "wasserstein"):
            assert parse_metric(name).kind == name
        assert parse_metric("mj1") == MetricSpec("mj", 1.0)
        assert parse_metric("MJ0.5") == MetricSpec("mj", 0.5)
        assert parse_metric("mjinf") == MetricSpec("mj", math.inf)
        assert parse_metric("mj", p=3.0) == MetricSpec("mj", 3.0)
        with pytest.raises(DataError, match="unknown metric"):
            parse_metric("bogus")

    def test_dispatch_matches_direct_calls(self):
        a = ChangePointSet([0, 10])
        b = ChangePointSet([0, 10, 12])
        cases = {
            "hausdorff": hausdorff,
            "mh1": mh1,
            "mh2": mh2,
            "mh3": mh3,
            "wasserstein": wasserstein1,
        }
        for kind, fn in cases.items():
            assert set_distance(a, b, MetricSpec(kind)) == fn(a, b)
        spec = MetricSpec("mj", 2.0)
        assert set_distance(a, b, spec) == mj_p(a, b, 2.0)
        assert spec.evaluate(a, b) == mj_p(a, b, 2.0)
