"""Wasserstein-1 distance: worked values and agreement with other formulations."""

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from breakdist.metrics import hausdorff, wasserstein1
from breakdist.sets import ChangePointSet

TOL = 1e-9

indices = st.integers(min_value=0, max_value=10_000)
sorted_unique = st.lists(indices, min_size=1, max_size=30, unique=True).map(sorted)
small_set = st.lists(indices, min_size=1, max_size=8, unique=True).map(sorted)


def test_singletons():
    assert wasserstein1(ChangePointSet([0]), ChangePointSet([7])) == 7.0


def test_uneven_sizes_worked_example():
    # {0,4} vs {0,2,4}: CDFs differ by 1/6 on [0,2) and [2,4)
    got = wasserstein1(ChangePointSet([0, 4]), ChangePointSet([0, 2, 4]))
    assert got == pytest.approx(2.0 / 3.0, abs=TOL)


@settings(deadline=None)
@given(st.integers(1, 12), st.data())
def test_equal_sizes_reduce_to_sorted_matching(n, data):
    a = data.draw(st.lists(indices, min_size=n, max_size=n, unique=True).map(sorted))
    b = data.draw(st.lists(indices, min_size=n, max_size=n, unique=True).map(sorted))
    want = oracles.wasserstein_sorted(a, b)
    got = wasserstein1(ChangePointSet(a), ChangePointSet(b))
    assert got == pytest.approx(want, abs=TOL * max(1.0, want))


def test_sorted_matching_batch():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        a = np.sort(rng.choice(20_000, size=n, replace=False)).astype(float)
        b = np.sort(rng.choice(20_000, size=n, replace=False)).astype(float)
        want = oracles.wasserstein_sorted(a.tolist(), b.tolist())
        assert wasserstein1(a, b) == pytest.approx(want, abs=TOL * max(1.0, want))


@settings(deadline=None)
@given(small_set, small_set)
def test_matches_common_refinement_oracle(a, b):
    """Expanding both sets to lcm size and matching in order gives the same value."""
    want = oracles.wasserstein_expand(a, b)
    got = wasserstein1(ChangePointSet(a), ChangePointSet(b))
    assert got == pytest.approx(want, abs=TOL * max(1.0, want))


@settings(deadline=None)
@given(sorted_unique, sorted_unique)
def test_matches_scipy(a, b):
    want = scipy.stats.wasserstein_distance(a, b)
    got = wasserstein1(ChangePointSet(a), ChangePointSet(b))
    assert got == pytest.approx(want, abs=1e-9 * max(1.0, want))


@settings(deadline=None)
@given(sorted_unique, st.integers(1, 5000))
def test_rigid_shift_moves_exactly_c(a, c):
    s = ChangePointSet(a)
    t = ChangePointSet([x + c for x in a])
    assert wasserstein1(s, t) == pytest.approx(float(c), abs=TOL * c)


@settings(deadline=None)
@given(sorted_unique, sorted_unique)
def test_duplicating_all_elements_changes_nothing(a, b):
    # the empirical measure ignores multiplicity-preserving duplication
    a2 = sorted(a + a)
    plain = wasserstein1(np.asarray(a, float), np.asarray(b, float))
    doubled = wasserstein1(np.asarray(a2, float), np.asarray(b, float))
    assert doubled == pytest.approx(plain, abs=TOL * max(1.0, plain))


def test_not_bounded_by_shared_points():
    """Unlike MJ_p, a 99.9% overlap does not shrink W below Hausdorff."""
    s = ChangePointSet(range(0, 1000))
    t = ChangePointSet(range(1, 1001))
    assert wasserstein1(s, t) == pytest.approx(hausdorff(s, t), abs=TOL)
