import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from susceptibility.graph import (
    MAX_KMAX,
    ComponentTracker,
    MomentOverflowError,
    SnapshotSummary,
    component_sizes,
    density_from_nt,
    derive_seed,
    make_rng,
    moments_from_sizes,
    pair_count,
    sample_distinct_pairs,
    sample_gnp,
    trajectory,
)


def tracker_with(sizes, kmax=6):
    """Tracker whose components have the given sizes (paths on consecutive vertices)."""
    n = sum(sizes)
    tr = ComponentTracker(n, kmax)
    start = 0
    for s in sizes:
        for v in range(start, start + s - 1):
            tr.add_edge(v, v + 1)
        start += s
    return tr


def brute_s_kl(sizes, k, l):
    return sum(
        a**k * b**l for i, a in enumerate(sizes) for j, b in enumerate(sizes) if i != j
    )


def brute_drift(sizes, k):
    # sum over unordered pairs of vertices in distinct components of the jump they cause
    total = Fraction(0)
    for i, a in enumerate(sizes):
        for j, b in enumerate(sizes):
            if i != j:
                total += Fraction(a * b * ((a + b) ** k - a**k - b**k), 2)
    return total


class TestTracker:
    def test_new(self):
        assert ComponentTracker(6, 4).S == [6, 6, 6, 6]
        assert ComponentTracker(1, 2).S == [1, 1]
        tr = ComponentTracker(10**6, 2)
        assert tr.s(2) == 10**6 and tr.chi == 1.0

    def test_bad_args(self):
        with pytest.raises(ValueError):
            ComponentTracker(0, 2)
        with pytest.raises(ValueError):
            ComponentTracker(5, MAX_KMAX + 1)
        with pytest.raises(ValueError):
            ComponentTracker(5, 1)
        tr = ComponentTracker(5, 3)
        with pytest.raises(ValueError):
            tr.add_edge(2, 2)
        with pytest.raises(IndexError):
            tr.add_edge(0, 5)

    def test_jump_examples(self):
        tr = tracker_with([2, 3], kmax=3)
        out = tr.add_edge(0, 2)
        assert out.merged and sorted(out.sizes_before) == [2, 3]
        assert out.deltas[1] == 12
        assert out.deltas[0] == 0
        tr = ComponentTracker(2, 3)
        assert tr.add_edge(0, 1).deltas[2] == 6

    def test_same_component_is_noop(self):
        tr = tracker_with([3, 2])
        before = list(tr.S)
        out = tr.add_edge(0, 2)
        assert not out.merged and out.deltas is None
        assert tr.S == before

    def test_largest(self):
        tr = tracker_with([4, 1, 3, 2])
        assert (tr.largest1, tr.largest2) == (4, 3)
        tr.add_edge(0, 5)
        assert (tr.largest1, tr.largest2) == (7, 2)
        tr.add_edge(0, 8)
        assert (tr.largest1, tr.largest2) == (9, 1)
        assert ComponentTracker(1, 2).largest2 == 0

    def test_s_kl_examples(self):
        tr = tracker_with([3, 2, 1], kmax=4)
        assert tr.s_kl(1, 1) == 22
        assert tr.s_kl(2, 2) == brute_s_kl([3, 2, 1], 2, 2)
        assert tracker_with([5], kmax=4).s_kl(2, 2) == 0
        tr = tracker_with([2, 2], kmax=4)
        assert tr.s(2) == 8 and tr.s(4) == 32 and tr.s_kl(2, 2) == 32
        with pytest.raises(ValueError):
            tr.s_kl(3, 2)

    def test_drift_examples(self):
        n = 50
        assert ComponentTracker(n, 4).drift_v(2) == n * n - n
        assert tracker_with([7], kmax=6).drift_v(3) == 0
        assert tracker_with([2, 1], kmax=4).drift_v(2) == 8
        with pytest.raises(ValueError):
            ComponentTracker(5, 3).drift_v(2)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_drift_matches_pairwise_form(self, k):
        sizes = [5, 3, 3, 1, 1, 2, 7]
        tr = tracker_with(sizes, kmax=k + 2)
        assert tr.drift_v(k) == brute_drift(sizes, k)

    def test_overflow_is_hard_error(self):
        n = 512  # 512^16 = 2^144
        tr = ComponentTracker(n, 16)
        with pytest.raises(MomentOverflowError, match="S_16"):
            for v in range(1, n):
                tr.add_edge(0, v)
        tr = ComponentTracker(n, 16)
        with pytest.raises(MomentOverflowError):
            tr.add_edges([0] * (n - 1), list(range(1, n)))

    def test_fits_when_n_pow_kmax_small(self):
        tr = ComponentTracker(1000, 12)  # 1000^12 < 2^128
        tr.add_edges([0] * 999, list(range(1, 1000)))
        assert tr.s(12) == 1000**12

    def test_copy_is_independent(self):
        tr = tracker_with([2, 2])
        cp = tr.copy()
        cp.add_edge(0, 2)
        assert tr.s(2) == 8 and cp.s(2) == 16


def random_edges(rng, n, m):
    return [tuple(rng.sample(range(n), 2)) for _ in range(m)]


class TestRecomputeOracle:
    def test_random_instances(self):
        rng = random.Random(11)
        for _ in range(60):
            n = rng.randint(1, 400)
            kmax = rng.randint(2, 8)
            m = rng.randint(0, n) if n > 1 else 0
            edges = random_edges(rng, n, m) if n > 1 else []
            tr = ComponentTracker(n, kmax)
            prev = list(tr.S)
            for u, v in edges:
                tr.add_edge(u, v)
                assert all(b >= a for a, b in zip(prev, tr.S))
                prev = list(tr.S)
            sizes = component_sizes(n, edges)
            assert tr.S == moments_from_sizes(sizes, kmax)
            assert tr.recompute() == tr.S
            assert sum(tr.root_sizes()) == n
            assert tr.components == len(sizes)
            s = sorted(sizes, reverse=True) + [0]
            assert (tr.largest1, tr.largest2) == (s[0], s[1])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 60), st.lists(st.tuples(st.integers(0, 59), st.integers(0, 59)),
                                         max_size=80), st.integers(2, 8))
    def test_bulk_equals_single(self, n, raw, kmax):
        edges = [(u % n, v % n) for u, v in raw if u % n != v % n]
        a = ComponentTracker(n, kmax)
        for u, v in edges:
            a.add_edge(u, v)
        b = ComponentTracker(n, kmax)
        b.add_edges([e[0] for e in edges], [e[1] for e in edges])
        assert a.S == b.S
        assert a.S == moments_from_sizes(component_sizes(n, edges), kmax)
        assert a.S[0] == n
        for k in range(2, kmax + 1):
            assert n <= a.s(k) <= n**k
        assert 1 <= a.chi <= n

    def test_s_kl_identity_by_enumeration(self):
        rng = random.Random(5)
        for _ in range(30):
            n = rng.randint(2, 200)
            edges = random_edges(rng, n, rng.randint(0, n))
            tr = ComponentTracker(n, 8)
            for u, v in edges:
                tr.add_edge(u, v)
            sizes = component_sizes(n, edges)
            for k in range(1, 5):
                for l in range(1, 9 - k):
                    assert tr.s_kl(k, l) == brute_s_kl(sizes, k, l)


class TestRandomness:
    def test_derived_seeds(self):
        seeds = {derive_seed(7, i) for i in range(1000)}
        assert len(seeds) == 1000
        assert derive_seed(7, 3) == derive_seed(7, 3)
        assert derive_seed(7, 3) != derive_seed(8, 3)
        assert derive_seed(7, 0, 3) != derive_seed(7, 3)

    def test_distinct_pairs_are_distinct_and_valid(self):
        rng = make_rng(1)
        for n, m in [(10, 45), (10, 5), (1000, 3000), (50, 1000), (2, 1)]:
            u, v = sample_distinct_pairs(rng, n, m)
            assert len(u) == m
            assert np.all(u != v)
            assert np.all((0 <= u) & (u < n) & (0 <= v) & (v < n))
            keys = set(zip(np.minimum(u, v).tolist(), np.maximum(u, v).tolist()))
            assert len(keys) == m
        with pytest.raises(ValueError):
            sample_distinct_pairs(rng, 4, 7)

    @pytest.mark.parametrize("m", [3, 12])
    def test_pairs_uniform(self, m):
        # n = 7 gives 21 pairs; every pair should be chosen with probability m/21
        rng = make_rng(99)
        n, R = 7, 6000
        counts = Counter()
        for _ in range(R):
            u, v = sample_distinct_pairs(rng, n, m)
            counts.update(zip(np.minimum(u, v).tolist(), np.maximum(u, v).tolist()))
        assert len(counts) == 21
        q = m / 21
        se = math.sqrt(R * q * (1 - q))
        for c in counts.values():
            assert abs(c - R * q) < 4.5 * se

    def test_first_pair_uniform_over_order(self):
        # the first pair in the ordered output is itself uniform over all pairs
        rng = make_rng(5)
        n, R = 6, 9000
        counts = Counter()
        for _ in range(R):
            u, v = sample_distinct_pairs(rng, n, 4)
            counts[(min(u[0], v[0]), max(u[0], v[0]))] += 1
        q = 1 / 15
        se = math.sqrt(R * q * (1 - q))
        assert len(counts) == 15
        assert all(abs(c - R * q) < 4.5 * se for c in counts.values())


class TestSamplers:
    def test_empty_and_complete(self):
        s = sample_gnp(50, 0.0, 3, seed=1)
        assert s.S == (50, 50, 50) and s.chi == 1.0 and s.m == 0
        s = sample_gnp(4, 1.0, 3, seed=1)
        assert s.S == (4, 16, 64) and s.chi == 4.0 and s.m == 6

    def test_edge_count_is_binomial(self):
        n, p, R = 200, 0.01, 400
        N = pair_count(n)
        ms = [sample_gnp(n, p, 2, seed=derive_seed(1, i)).m for i in range(R)]
        se = math.sqrt(N * p * (1 - p) / R)
        assert abs(np.mean(ms) - N * p) < 4 * se
        assert np.var(ms, ddof=1) == pytest.approx(N * p * (1 - p), rel=0.25)

    def test_reproducible(self):
        a = sample_gnp(1000, 0.001, 4, seed=42)
        b = sample_gnp(1000, 0.001, 4, seed=42)
        assert a == b

    def test_snapshot_fields(self):
        p, t = density_from_nt(1000, 0.5)
        s = sample_gnp(1000, p, 4, seed=3, replicate=5, t=t)
        assert s.nt == pytest.approx(0.5)
        assert s.replicate == 5 and s.seed == 3
        row = s.csv_row()
        assert len(row) == len(SnapshotSummary.csv_header(4))
        assert SnapshotSummary.csv_header(2) == [
            "n", "m", "p", "t", "nt", "kmax", "S_1", "S_2", "chi", "largest1",
            "largest2", "seed", "replicate",
        ]

    def test_bad_p(self):
        with pytest.raises(ValueError):
            sample_gnp(10, 1.5, 2)


class TestTrajectory:
    def test_checkpoint_zero(self):
        (s,) = trajectory(30, 3, [0], seed=1)
        assert s.S == (30, 30, 30) and s.p == 0.0 and s.t == 0.0

    def test_complete_graph(self):
        n = 12
        snaps = trajectory(n, 3, [10, pair_count(n)], seed=2)
        assert snaps[-1].chi == n
        assert snaps[-1].p == 1.0 and snaps[-1].t == math.inf

    def test_monotone_and_reparametrised(self):
        n = 500
        N = pair_count(n)
        cps = [0, 50, 100, 200, 400]
        snaps = trajectory(n, 4, cps, seed=9)
        for a, b in zip(snaps, snaps[1:]):
            assert all(y >= x for x, y in zip(a.S, b.S))
        for s, m in zip(snaps, cps):
            assert s.m == m
            assert s.p == m / N
            assert s.t == pytest.approx(-math.log(1 - m / N))

    def test_bad_checkpoints(self):
        with pytest.raises(ValueError):
            trajectory(10, 2, [3, 3])
        with pytest.raises(ValueError):
            trajectory(10, 2, [5, 2])
        with pytest.raises(ValueError):
            trajectory(10, 2, [46])

    def test_chi_near_theory(self):
        # nt = 0.3 -> chi concentrates near 1/0.7 with sd about 0.02 at n = 10^4
        n = 10_000
        m = round(pair_count(n) * density_from_nt(n, 0.3)[0])
        (s,) = trajectory(n, 2, [m], seed=17)
        assert s.chi == pytest.approx(1 / 0.7, abs=0.1)
