"""Distance matrices, transitivity audits and eigenvalue reports."""

import numpy as np
import pytest

import oracles
from breakdist.errors import DataError
from breakdist.matrix import (
    DistanceMatrix,
    build_distance_matrix,
    eigen_report,
    transitivity_audit,
    triple_ratio,
)
from breakdist.metrics import MetricSpec, set_distance
from breakdist.sets import ChangePointSet

TOL = 1e-9


def random_sets(seed, count=10, max_size=50, high=10_000):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(2, max_size + 1))
        pts = np.sort(rng.choice(high, size=n, replace=False))
        out.append(ChangePointSet(pts, label=f"s{i + 1}"))
    return out


def symmetric_matrix(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.1, 5.0, size=(n, n))
    d = (a + a.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, [f"s{i}" for i in range(n)])


class TestDistanceMatrix:
    def test_validation(self):
        with pytest.raises(DataError, match="square"):
            DistanceMatrix(np.zeros((2, 3)), ["a", "b"])
        with pytest.raises(DataError, match="symmetric"):
            DistanceMatrix(np.asarray([[0.0, 1.0], [2.0, 0.0]]), ["a", "b"])
        with pytest.raises(DataError, match="negative"):
            DistanceMatrix(np.asarray([[0.0, -1.0], [-1.0, 0.0]]), ["a", "b"])
        with pytest.raises(DataError, match="diagonal"):
            DistanceMatrix(np.asarray([[1.0, 2.0], [2.0, 0.0]]), ["a", "b"])
        with pytest.raises(DataError, match="non-finite"):
            DistanceMatrix(np.asarray([[0.0, np.nan], [np.nan, 0.0]]), ["a", "b"])
        with pytest.raises(DataError, match="label count"):
            DistanceMatrix(np.zeros((2, 2)), ["a"])

    def test_build_identical_sets_gives_zeros(self):
        s = ChangePointSet([5, 9])
        d = build_distance_matrix([s, s], MetricSpec("hausdorff"))
        assert np.array_equal(d.values, np.zeros((2, 2)))

    def test_build_against_pairwise_calls(self):
        sets = random_sets(3, count=5)
        spec = MetricSpec("mj", 0.5)
        d = build_distance_matrix(sets, spec)
        assert d.labels == [f"s{i}" for i in range(1, 6)]
        for i in range(5):
            for j in range(5):
                want = set_distance(sets[i], sets[j], spec) if i != j else 0.0
                assert d.values[i, j] == pytest.approx(want, abs=TOL)

    def test_build_shifted_pair_mh2(self):
        d = build_distance_matrix(
            [ChangePointSet([0, 999]), ChangePointSet([1, 1000])], MetricSpec("mh2")
        )
        assert d.values[0, 1] == pytest.approx(4.0, abs=TOL)

    def test_build_needs_two_sets(self):
        with pytest.raises(DataError, match="at least 2"):
            build_distance_matrix([ChangePointSet([1])], MetricSpec("mh1"))

    def test_build_names_offending_series(self):
        good = ChangePointSet([1, 2])
        with pytest.raises(DataError, match="series 'bad'"):
            build_distance_matrix(
                [good, np.asarray([3.0, 1.0])],
                MetricSpec("mh1"),
                labels=["ok", "bad"],
            )

    def test_explicit_labels_override(self):
        sets = random_sets(0, count=3)
        d = build_distance_matrix(sets, MetricSpec("mh1"), labels=["x", "y", "z"])
        assert d.labels == ["x", "y", "z"]


HAND = np.asarray([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])


class TestTripleRatio:
    def test_hand_values(self):
        d = DistanceMatrix(HAND, ["a", "b", "c"])
        assert triple_ratio(d, 0, 1, 2) == pytest.approx(2.5)
        assert triple_ratio(d, 0, 2, 1) == pytest.approx(1.0 / 6.0)

    def test_repeated_indices_rejected(self):
        d = DistanceMatrix(HAND, ["a", "b", "c"])
        with pytest.raises(DataError, match="distinct"):
            triple_ratio(d, 0, 0, 1)

    def test_zero_over_zero_is_zero(self):
        v = np.zeros((3, 3))
        d = DistanceMatrix(v, ["a", "b", "c"])
        assert triple_ratio(d, 0, 1, 2) == 0.0

    def test_zero_denominator_with_positive_numerator(self):
        v = np.asarray([[0.0, 0.0, 3.0], [0.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
        d = DistanceMatrix(v, ["a", "b", "c"])
        with pytest.raises(DataError, match="zero denominator"):
            triple_ratio(d, 0, 1, 2)


class TestTransitivityAudit:
    def test_hand_matrix_counts(self):
        rep = transitivity_audit(DistanceMatrix(HAND, ["a", "b", "c"]))
        assert rep.n_triples == 6
        assert (rep.blue, rep.yellow, rep.red) == (4, 0, 2)
        assert rep.fail_fraction == pytest.approx(1.0 / 3.0)
        assert rep.mean_fail_ratio == pytest.approx(2.5)
        assert rep.max_fail_ratio == pytest.approx(2.5)
        assert rep.classification(0, 1, 2) == "red"
        assert rep.classification(0, 2, 1) == "blue"
        with pytest.raises(DataError, match="distinct"):
            rep.classification(0, 0, 1)

    def test_true_metrics_never_fail(self):
        sets = random_sets(11)
        for kind in ("hausdorff", "wasserstein"):
            d = build_distance_matrix(sets, MetricSpec(kind))
            rep = transitivity_audit(d)
            assert rep.fail_fraction == 0.0
            assert rep.yellow == rep.red == 0
            assert rep.blue == rep.n_triples
            assert rep.mean_fail_ratio is None and rep.max_fail_ratio is None

    def test_needs_three_series(self):
        d = DistanceMatrix(np.asarray([[0.0, 1.0], [1.0, 0.0]]), ["a", "b"])
        with pytest.raises(DataError, match="at least 3"):
            transitivity_audit(d)

    def test_duplicate_sets_classify_blue(self):
        a = ChangePointSet([1])
        b = ChangePointSet([5])
        d = build_distance_matrix([a, a, a, b], MetricSpec("hausdorff"),
                                  labels=["a1", "a2", "a3", "b"])
        rep = transitivity_audit(d)
        assert rep.blue == rep.n_triples == 24
        assert rep.fail_fraction == 0.0
        assert rep.classification(0, 1, 2) == "blue"

    def test_inconsistent_matrix_rejected(self):
        v = np.asarray([[0.0, 0.0, 3.0], [0.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
        with pytest.raises(DataError, match="zero denominator"):
            transitivity_audit(DistanceMatrix(v, ["a", "b", "c"]))

    @pytest.mark.parametrize("seed", [0, 7, 42])
    def test_agrees_with_loop_reference(self, seed):
        sets = random_sets(seed, count=6, max_size=12, high=300)
        d = build_distance_matrix(sets, MetricSpec("mj", 0.5))
        rep = transitivity_audit(d)
        want = oracles.audit_loops(d.values)
        assert (rep.blue, rep.yellow, rep.red) == (
            want["blue"], want["yellow"], want["red"]
        )
        assert rep.fail_fraction == pytest.approx(want["fail_fraction"], abs=TOL)
        if want["mean_fail_ratio"] is None:
            assert rep.mean_fail_ratio is None
        else:
            assert rep.mean_fail_ratio == pytest.approx(want["mean_fail_ratio"])
            assert rep.max_fail_ratio == pytest.approx(want["max_fail_ratio"])

    def test_ratios_invariant_under_scaling(self):
        d = DistanceMatrix(HAND, ["a", "b", "c"])
        scaled = DistanceMatrix(HAND * 7.0, ["a", "b", "c"])
        r1 = transitivity_audit(d)
        r2 = transitivity_audit(scaled)
        assert (r1.blue, r1.yellow, r1.red) == (r2.blue, r2.yellow, r2.red)
        assert r2.mean_fail_ratio == pytest.approx(r1.mean_fail_ratio)

    def test_translation_of_sets_changes_nothing(self):
        sets = random_sets(5, count=5)
        moved = [ChangePointSet(s.points + 1234) for s in sets]
        d1 = build_distance_matrix(sets, MetricSpec("mj", 1.0))
        d2 = build_distance_matrix(moved, MetricSpec("mj", 1.0))
        np.testing.assert_allclose(d1.values, d2.values, atol=TOL)

    def test_json_dict_shape(self):
        rep = transitivity_audit(DistanceMatrix(HAND, ["a", "b", "c"]))
        doc = rep.to_json_dict()
        assert doc["triples"] == 6
        assert doc["counts"] == {"blue": 4, "yellow": 0, "red": 2}
        assert set(doc) == {
            "n", "triples", "counts", "fail_fraction",
            "mean_fail_ratio", "max_fail_ratio",
        }


class TestDivergentConstructions:
    """Bunched sets that drive each semi-metric's triangle ratio sky-high."""

    def test_sum_form_blows_up_with_bunched_endpoints(self):
        # two tight clumps of 10 far apart, probed through their midpoints
        s = ChangePointSet(range(1, 11))
        r = ChangePointSet(range(1001, 1011))
        t = ChangePointSet([0, 1000])
        d = build_distance_matrix([s, t, r], MetricSpec("mh2"))
        rep = transitivity_audit(d)
        assert rep.red == 2
        assert rep.max_fail_ratio == pytest.approx(19910.0 / 2103.0, abs=TOL)
        assert rep.max_fail_ratio > 2.0

    @pytest.mark.parametrize(
        "kind,p,want",
        [
            ("mj", 1.0, 400.0 / 37.0),
            ("mh1", None, 400.0 / 37.0),
            ("mh3", None, 561000.0 / 75120.0),
        ],
    )
    def test_mean_forms_blow_up_with_a_bunched_bridge(self, kind, p, want):
        # T bunches 31 points around 1000 plus one at 0; the ratio grows
        # linearly with the bunch size n
        n = 32
        s = ChangePointSet([0, 1000])
        r = ChangePointSet([1000])
        t = ChangePointSet.from_iterable([0] + list(range(985, 1016)))
        assert len(t) == n
        d = build_distance_matrix([s, t, r], MetricSpec(kind, p))
        rep = transitivity_audit(d)
        assert rep.red == 2
        assert rep.max_fail_ratio == pytest.approx(want, rel=1e-9)
        assert rep.max_fail_ratio >= n / 8.0


class TestEigenReport:
    def test_zero_matrix(self):
        d = DistanceMatrix(np.zeros((4, 4)), list("abcd"))
        rep = eigen_report(d)
        assert rep.operator_norm == 0.0
        assert rep.majority_cluster_size == 4
        np.testing.assert_array_equal(rep.abs_eigenvalues, np.zeros(4))

    def test_two_by_two(self):
        c = 3.5
        d = DistanceMatrix(np.asarray([[0.0, c], [c, 0.0]]), ["a", "b"])
        rep = eigen_report(d)
        np.testing.assert_allclose(sorted(rep.eigenvalues), [-c, c], atol=TOL)
        assert rep.operator_norm == pytest.approx(c)
        assert rep.majority_cluster_size == 1

    def test_near_identical_rows_show_up_as_small_eigenvalues(self):
        # 7 of 10 series coincide up to a perturbation of 1e-3 * scale,
        # so 6 eigenvalues collapse toward zero
        scale = 1000.0
        base = np.asarray([0.0] * 7 + [300.0, 650.0, 1000.0])
        noise = np.random.default_rng(0).uniform(-1.0, 1.0, 7) * 1e-3 * scale
        pts = base.copy()
        pts[:7] += noise
        v = np.abs(pts[:, None] - pts[None, :])
        np.fill_diagonal(v, 0.0)
        d = DistanceMatrix(v, [f"s{i}" for i in range(10)])
        rep = eigen_report(d)
        assert rep.epsilon == pytest.approx(0.05 * rep.operator_norm)
        below = int(np.count_nonzero(rep.abs_eigenvalues < rep.epsilon))
        assert below == 6
        assert rep.majority_cluster_size == 7
        assert abs(rep.eigenvalues.sum()) <= 1e-6 * rep.operator_norm

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_matches_plain_eigendecomposition(self, seed):
        d = symmetric_matrix(seed, 8)
        rep = eigen_report(d)
        want = np.sort(np.abs(np.linalg.eigvalsh(d.values)))
        np.testing.assert_allclose(rep.abs_eigenvalues, want, atol=1e-9)
        assert rep.operator_norm == pytest.approx(want[-1])
        assert abs(rep.eigenvalues.sum()) <= 1e-6 * rep.operator_norm

    def test_epsilon_controls_majority(self):
        d = symmetric_matrix(4, 6)
        tiny = eigen_report(d, epsilon=0.0).majority_cluster_size
        huge = eigen_report(d, epsilon=1e9).majority_cluster_size
        assert tiny == 1
        assert huge == 6
        with pytest.raises(DataError, match="non-negative"):
            eigen_report(d, epsilon=-0.1)

    def test_json_dict_shape(self):
        rep = eigen_report(symmetric_matrix(5, 4))
        doc = rep.to_json_dict()
        assert set(doc) == {
            "abs_eigenvalues", "operator_norm", "epsilon", "majority_cluster_size"
        }
        assert len(doc["abs_eigenvalues"]) == 4
