import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from colloc_cluster.em import NOISE, Assignment, MixtureModel
from colloc_cluster.features import NormalizationParams, PointSet
from colloc_cluster.prune import (
    Row,
    Summary,
    emit_candidates,
    emit_excluded,
    is_retained,
    parse_rows_tsv,
    percent,
    prune,
    rows_to_tsv,
    scatter_csv,
    summarize,
)


def model_with(centroids):
    c = np.asarray(centroids, dtype=float)
    k = len(c)
    return MixtureModel(k, np.full(k, 1 / k), c, np.full_like(c, 0.01), 0.0, 1, 42)


def point_set(bigrams, coords):
    coords = np.asarray(coords, dtype=float)
    n = len(bigrams)
    return PointSet(
        bigrams=list(bigrams),
        counts=np.ones((n, 4), dtype=np.int64),
        raw=coords.copy(),
        coords=coords,
        t_degenerate=np.zeros(n, dtype=bool),
        params=NormalizationParams((0.0,) * 3, (1.0,) * 3),
    )


def assignment(labels, k):
    labels = np.asarray(labels, dtype=np.int64)
    resp = np.full((len(labels), k), 1.0 / k)
    return Assignment(labels, resp, np.zeros(len(labels)), -np.inf)


centroids = st.lists(st.tuples(*[st.floats(0, 1)] * 3), min_size=1, max_size=8)


class TestRule:
    def test_one_high_coordinate_retains(self):
        assert is_retained((0.32, 0.05, 0.02), 0.30)

    def test_all_below_excludes(self):
        assert not is_retained((0.29, 0.29, 0.29), 0.30)

    def test_boundary_is_inclusive(self):
        assert is_retained((0.30, 0.0, 0.0), 0.30)

    def test_threshold_zero_keeps_everything(self):
        assert all(v.retained for v in prune(model_with([[0, 0, 0], [0.1, 0.2, 0.0]]), 0.0))

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            prune(model_with([[0, 0, 0]]), 1.5)
        with pytest.raises(ValueError):
            prune(model_with([[0, 0, 0]]), -0.1)

    @given(centroids, st.floats(0, 1), st.floats(0, 1))
    def test_threshold_monotone(self, cents, a, b):
        lo, hi = sorted((a, b))
        m = model_with(cents)
        for low, high in zip(prune(m, lo), prune(m, hi)):
            assert not (not low.retained and high.retained)

    @given(centroids, st.floats(0, 1), st.randoms())
    def test_verdict_ignores_member_order(self, cents, thr, rnd):
        m = model_with(cents)
        labels = [rnd.randint(0, len(cents)) for _ in range(30)]
        shuffled = labels[:]
        rnd.shuffle(shuffled)
        a = [v.retained for v in prune(m, thr, assignment(labels, len(cents)))]
        b = [v.retained for v in prune(m, thr, assignment(shuffled, len(cents)))]
        assert a == b == [v.retained for v in prune(m, thr)]

    def test_member_counts(self):
        v = prune(model_with([[0.5, 0, 0], [0, 0, 0]]), 0.3, assignment([1, 1, 2, NOISE], 2))
        assert [x.member_count for x in v] == [2, 1]


class TestSummary:
    def test_percentages(self):
        assert percent(13241, 20247) == 65.40
        assert percent(7006, 20247) == 34.60
        assert percent(10, 10) == 100.00

    def test_half_up(self):
        # 100 * 1 / 8 = 12.5 exactly; 100 * 1 / 1600 = 0.0625
        assert percent(1, 8) == 12.50
        assert percent(1, 1600) == 0.06
        assert percent(1, 800) == 0.13

    def test_zero_total(self):
        with pytest.raises(ValueError):
            percent(0, 0)
        with pytest.raises(ValueError):
            summarize([], np.array([], dtype=int), 0)

    def test_counts_and_noise(self):
        verdicts = prune(model_with([[0.9, 0, 0], [0.1, 0.1, 0.1]]), 0.3)
        s = summarize(verdicts, np.array([1, 1, 2, NOISE, 2]), 5)
        assert (s.retained_count, s.excluded_count, s.noise_count) == (2, 2, 1)
        assert s.retained_clusters == (1,) and s.excluded_clusters == (2,)
        assert s.candidate_count == 3
        assert s.candidate_pct == 60.00 and s.excluded_pct == 40.00

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(ValueError):
            Summary(10, (1,), (), 5, 4, 0)

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=300), centroids)
    def test_partition_invariants(self, labels, cents):
        k = len(cents)
        labels = np.array([lab % (k + 1) for lab in labels])
        s = summarize(prune(model_with(cents), 0.3), labels, len(labels))
        assert s.retained_count + s.excluded_count + s.noise_count == s.total_bigrams
        assert abs(s.retained_pct + s.excluded_pct + s.noise_pct - 100.0) <= 0.01 + 1e-9

    def test_tsv(self):
        s = Summary(20247, (1, 2, 3, 5, 7, 9), (4, 6, 8), 13241, 7006, 0)
        lines = s.to_tsv().splitlines()
        assert lines[0].split("\t") == ["total", "candidate", "clusters", "count", "pct"]
        assert lines[1].split("\t") == ["20247", "Yes", "1,2,3,5,7,9", "13241", "65.40"]
        assert lines[3].split("\t") == ["20247", "No", "4,6,8", "7006", "34.60"]


def _fixture():
    bigrams = [("a", "b"), ("c", "d"), ("e", "f"), ("g", "h"), ("i", "j"), ("k", "l")]
    coords = [
        [0.9, 0.8, 0.7],  # cluster 1 (retained)
        [0.5, 0.4, 0.7],  # cluster 1
        [0.1, 0.1, 0.1],  # cluster 2 (excluded)
        [0.2, 0.1, 0.3],  # NOISE
        [0.6, 0.4, 0.7],  # cluster 1, ties (c,d) on llr
        [0.0, 0.2, 0.0],  # cluster 2
    ]
    pts = point_set(bigrams, coords)
    a = assignment([1, 1, 2, NOISE, 1, 2], 2)
    verdicts = prune(model_with([[0.7, 0.6, 0.7], [0.05, 0.15, 0.05]]), 0.3, a)
    return pts, a, verdicts


class TestEmit:
    def test_partition(self):
        pts, a, v = _fixture()
        cand = {(r.w1, r.w2) for r in emit_candidates(pts, a, v)}
        excl = {(r.w1, r.w2) for r in emit_excluded(pts, a, v)}
        assert not cand & excl
        assert cand | excl == set(pts.bigrams)

    def test_candidate_order_and_noise_label(self):
        pts, a, v = _fixture()
        rows = emit_candidates(pts, a, v)
        assert [(r.label, r.w1) for r in rows] == [("1", "a"), ("1", "c"), ("1", "i"), ("NOISE", "g")]

    def test_excluded_only_excluded_clusters(self):
        pts, a, v = _fixture()
        rows = emit_excluded(pts, a, v)
        assert [(r.cluster, r.w1) for r in rows] == [(2, "e"), (2, "k")]

    def test_threshold_zero_excludes_nothing(self):
        pts, a, _ = _fixture()
        v = prune(model_with([[0.7, 0.6, 0.7], [0.05, 0.15, 0.05]]), 0.0, a)
        assert emit_excluded(pts, a, v) == []
        assert len(emit_candidates(pts, a, v)) == len(pts)

    def test_llr_order(self):
        pts, a, v = _fixture()
        rows = emit_candidates(pts, a, v, order="llr")
        assert [r.w1 for r in rows] == ["a", "c", "i", "g"]

    def test_tsv_round_trip(self):
        pts, a, v = _fixture()
        rows = emit_candidates(pts, a, v)
        text = rows_to_tsv(rows)
        assert text.splitlines()[0] == "cluster\tw1\tw2\tmi\tt\tllr"
        assert text.splitlines()[1] == "1\ta\tb\t0.900000\t0.800000\t0.700000"
        assert parse_rows_tsv(text) == rows

    def test_scatter(self):
        pts, a, _ = _fixture()
        lines = scatter_csv(pts, a).splitlines()
        assert lines[0] == "x,y,z,cluster"
        assert lines[4] == "0.200000,0.100000,0.300000,0"
        assert len(lines) == 1 + len(pts)


def test_row_label():
    assert Row(NOISE, "a", "b", 0, 0, 0).label == "NOISE"
    assert Row(3, "a", "b", 0, 0, 0).label == "3"
