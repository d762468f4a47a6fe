import math

import numpy as np
import pytest
import scipy.stats

from mcld.errors import InvalidInput
from mcld.frozen_percolation import (
    FPConfig,
    FPTrajectory,
    fp_mcld_compare,
    gnp_component_labels,
    run_fp,
    sample_critical_er,
    scale_trajectory,
)

from helpers import brute_components

SEED = 90210


def component_sizes(labels):
    return np.sort(np.bincount(labels))[::-1]


class TestSampleCriticalEr:
    def test_probability_zero_gives_singletons(self):
        # u = -n^(1/3) forces p = 0
        n = 27
        labels = sample_critical_er(n, -float(n) ** (1.0 / 3.0), SEED)
        assert len(np.unique(labels)) == n

    def test_two_vertices_probability_one(self):
        # n=2: p = (1 + u*2^(-1/3))/2 = 1 at u = 2^(1/3)
        labels = sample_critical_er(2, 2.0 ** (1.0 / 3.0), SEED)
        assert labels[0] == labels[1]

    def test_probability_above_one_rejected(self):
        with pytest.raises(InvalidInput):
            sample_critical_er(2, 10.0, SEED)

    def test_gnp_matches_dense_bernoulli_law(self):
        # small n: compare component-count distribution of the sparse
        # sampler against direct per-pair Bernoulli sampling
        n, p, reps = 12, 0.12, 4000
        rng = np.random.default_rng(SEED)
        sparse_counts = [
            len(np.unique(gnp_component_labels(n, p, rng))) for _ in range(reps)
        ]
        rng2 = np.random.default_rng(SEED + 1)
        dense_counts = []
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        for _ in range(reps):
            edges = [pq for pq in pairs if rng2.uniform() < p]
            dense_counts.append(len(brute_components(range(1, n + 1), edges)))
        bins = np.arange(1, n + 2)
        a, _ = np.histogram(sparse_counts, bins=bins)
        b, _ = np.histogram(dense_counts, bins=bins)
        keep = (a + b) >= 10
        chi = scipy.stats.chi2_contingency(np.vstack([a[keep], b[keep]]))
        assert chi.pvalue > 0.01

    def test_scaled_largest_component_band(self):
        # coarse sanity band around the known critical scaling constant
        n, seeds = 100_000, 200
        scaled = []
        for s in range(seeds):
            labels = sample_critical_er(n, 0.0, np.random.default_rng([SEED, s]))
            scaled.append(component_sizes(labels)[0] * n ** (-2.0 / 3.0))
        assert 0.9 <= float(np.mean(scaled)) <= 1.6


class TestRunFp:
    def config(self, n, lam, horizon=1.0, seed=SEED):
        return FPConfig(n=n, lightning_rate=lam, u=0.0, horizon=horizon, seed=seed)

    def test_single_vertex_deleted_at_exponential_time(self):
        times = []
        for s in range(3000):
            config = FPConfig(
                n=1, lightning_rate=0.8, u=0.0, horizon=50.0, seed=s
            )
            traj = run_fp(config, np.zeros(1, dtype=np.int64), [], rng=np.random.default_rng(s))
            if traj.events:
                times.append(traj.events[0][0])
        # horizon is 50 * 1^(1/3) so nearly every strike lands inside it
        stat = scipy.stats.kstest(times, scipy.stats.expon(scale=1 / 0.8).cdf)
        assert stat.pvalue > 0.01

    def test_mass_conservation(self):
        n = 500
        labels = sample_critical_er(n, 0.0, SEED)
        config = FPConfig(n=n, lightning_rate=0.05, u=0.0, horizon=3.0, seed=SEED)
        raw = run_fp(config, labels, [config.raw_horizon])
        assert raw.deleted_total + int(raw.sizes[0].sum()) == n

    def test_component_law_matches_static_gnp_when_deletion_free(self):
        # from the empty graph, the component process at raw time s has the
        # same law as a G(n, 1 - exp(-s/n)) snapshot
        n, reps = 50, 10_000
        s = -n * math.log(1 - 1.2 / n)  # so p = 1.2/n
        p = 1.0 - math.exp(-s / n)
        singletons = np.arange(n, dtype=np.int64)
        largest_dyn = []
        for r in range(reps):
            config = FPConfig(
                n=n, lightning_rate=0.0, u=0.0, horizon=s * n ** (1 / 3.0), seed=r
            )
            raw = run_fp(config, singletons, [s], rng=np.random.default_rng([1, r]))
            largest_dyn.append(int(raw.sizes[0][0]))
        rng = np.random.default_rng([2, SEED])
        largest_static = [
            int(component_sizes(gnp_component_labels(n, p, rng))[0])
            for _ in range(reps)
        ]
        bins = np.arange(1, n + 2)
        a, _ = np.histogram(largest_dyn, bins=bins)
        b, _ = np.histogram(largest_static, bins=bins)
        keep = (a + b) >= 10
        chi = scipy.stats.chi2_contingency(np.vstack([a[keep], b[keep]]))
        assert chi.pvalue > 0.01

    def test_first_event_law_from_fixed_partition(self):
        # sizes (3,2,1), lam=0.7: cross-pair merge rate (3*2+3*1+2*1)/6 =
        # 11/6 (intra arrivals are no-ops), deletions 2.1/1.4/0.7
        labels = np.array([0, 0, 0, 1, 1, 2], dtype=np.int64)
        lam = 0.7
        counts = {"merge": 0, 3: 0, 2: 0, 1: 0}
        reps = 8000
        for r in range(reps):
            config = FPConfig(
                n=6, lightning_rate=lam, u=0.0, horizon=1000.0, seed=r
            )
            raw = run_fp(config, labels, [], rng=np.random.default_rng([3, r]))
            assert raw.events
            t0, kind, size = raw.events[0]
            if kind == "merge":
                counts["merge"] += 1
            else:
                counts[size] += 1
        cross_rate = (3 * 2 + 3 * 1 + 2 * 1) / 6
        total_rate = cross_rate + lam * 6
        expected = np.array([cross_rate, 2.1, 1.4, 0.7]) / total_rate * reps
        observed = np.array([counts["merge"], counts[3], counts[2], counts[1]])
        chi = scipy.stats.chisquare(observed, expected)
        assert chi.pvalue > 0.01

    def test_fullgraph_oracle_dual_run(self):
        # replay the same rng stream in a simulator that tracks the actual
        # edge set (arrivals only between non-adjacent alive pairs change
        # the graph); component trajectories must coincide exactly
        n = 60
        rng_init = np.random.default_rng([4, SEED])
        labels = sample_critical_er(n, 0.5, rng_init)
        init_edges = []  # rebuild an edge set compatible with the partition
        by_label: dict[int, list[int]] = {}
        for v, lab in enumerate(labels.tolist()):
            by_label.setdefault(lab, []).append(v)
        for group in by_label.values():
            init_edges.extend(zip(group, group[1:]))  # spanning path
        lam = 0.02
        config = FPConfig(n=n, lightning_rate=lam, u=0.5, horizon=4.0, seed=SEED)
        record = [config.raw_horizon * k / 4 for k in range(1, 5)]
        raw = run_fp(config, labels, record, rng=np.random.default_rng([5, SEED]))
        oracle = _fullgraph_fp(
            n, lam, labels, init_edges, record, np.random.default_rng([5, SEED]),
            config.raw_horizon,
        )
        for ours, theirs in zip(raw.sizes, oracle):
            assert ours.tolist() == sorted(theirs, reverse=True)


def _fullgraph_fp(n, lam, labels, init_edges, record, rng, horizon):
    """Independent reference: explicit adjacency, same draw order as run_fp."""
    edges = {tuple(sorted(e)) for e in init_edges}
    burnt_v = [False] * n
    alive = n

    def comps():
        vertices = [v for v in range(n) if not burnt_v[v]]
        live_edges = [e for e in edges if not burnt_v[e[0]] and not burnt_v[e[1]]]
        return brute_components(vertices, live_edges)

    def find_comp(v, partition):
        for c in partition:
            if v in c:
                return c
        raise AssertionError

    def draw_alive():
        while True:
            v = int(rng.integers(0, n))
            if not burnt_v[v]:
                return v

    out = []
    now = 0.0
    k = 0
    while True:
        edge_rate = alive * (alive - 1) / (2.0 * n)
        strike_rate = lam * alive
        total = edge_rate + strike_rate
        if total <= 0:
            break
        now += rng.exponential(1.0 / total)
        if now > horizon:
            break
        while k < len(record) and record[k] < now:
            out.append([len(c) for c in comps()])
            k += 1
        if rng.uniform() * total < edge_rate:
            v1 = draw_alive()
            v2 = draw_alive()
            while v2 == v1:
                v2 = draw_alive()
            edges.add(tuple(sorted((v1, v2))))
        else:
            v = draw_alive()
            comp = find_comp(v, comps())
            for w in comp:
                burnt_v[w] = True
            alive -= len(comp)
    while k < len(record):
        out.append([len(c) for c in comps()])
        k += 1
    return out


class TestScaleTrajectory:
    def test_formula(self):
        n = 10 ** 6
        raw = FPTrajectory(
            n=n,
            times=(10 ** -2,),
            sizes=(np.array([10 ** 4], dtype=np.int64),),
            events=(),
            deleted_total=0,
        )
        sample = scale_trajectory(raw, n, [1.0])[0]
        assert sample.t == 1.0
        assert sample.state.masses[0] == pytest.approx(1.0, rel=1e-12)

    def test_time_zero(self):
        raw = FPTrajectory(
            n=8,
            times=(0.0,),
            sizes=(np.array([3, 2, 1], dtype=np.int64),),
            events=(),
            deleted_total=0,
        )
        sample = scale_trajectory(raw, 8, [0.0])[0]
        assert sample.state.masses == tuple(
            np.array([3.0, 2.0, 1.0]) * 8 ** (-2.0 / 3.0)
        )

    def test_ordering_preserved(self):
        raw = FPTrajectory(
            n=27,
            times=(1.0,),
            sizes=(np.array([5, 5, 2], dtype=np.int64),),
            events=(),
            deleted_total=0,
        )
        state = scale_trajectory(raw, 27, [27 ** (1.0 / 3.0)])[0].state
        assert state.masses[0] == state.masses[1] >= state.masses[2]

    def test_uncovered_time_rejected(self):
        raw = FPTrajectory(
            n=8, times=(0.5,), sizes=(np.array([8]),), events=(), deleted_total=0
        )
        with pytest.raises(InvalidInput):
            scale_trajectory(raw, 8, [99.0])


class TestScaledSquaredNormBounded:
    def test_initial_scaled_s2_means_stay_bounded_across_n(self):
        # the rescaled states must live in the square-summable regime: the
        # mean squared norm at u=0, t=0 is O(1) uniformly in n
        means = []
        for n in (2_000, 8_000, 32_000):
            vals = []
            for s in range(40):
                labels = sample_critical_er(n, 0.0, np.random.default_rng([7, n, s]))
                sizes = np.bincount(labels).astype(np.float64)
                vals.append(float(np.sum((sizes * n ** (-2.0 / 3.0)) ** 2)))
            means.append(float(np.mean(vals)))
        assert all(0.1 <= m <= 5.0 for m in means)
        assert max(means) / min(means) <= 2.0


class TestAggregatedReferenceSampler:
    def test_matches_clocked_engine_in_law(self):
        # initial (1,1,1), lam=1, t=0.3: same comparison as the gillespie
        # cross-check, but for the dust-scale aggregated sampler
        from mcld.clock_field import ClockField
        from mcld.events import run_clocked
        from mcld.frozen_percolation import _aggregate_mcld_top
        from mcld.mass_state import ordered

        reps = 8000
        weights = np.array([1.0, 1.0, 1.0])
        rng = np.random.default_rng(188)
        counts_a: dict[tuple, int] = {}
        for _ in range(reps):
            top = _aggregate_mcld_top(weights, 1.0, [0.3], rng, 3)[0]
            key = tuple(top[top > 0].tolist())
            counts_a[key] = counts_a.get(key, 0) + 1
        base = ClockField(188)
        counts_b: dict[tuple, int] = {}
        for r in range(reps):
            s = run_clocked(ordered(weights), base.child(r), 1.0, 0.3).states[-1]
            counts_b[s.masses] = counts_b.get(s.masses, 0) + 1
        keys = sorted(set(counts_a) | set(counts_b))
        a = np.array([counts_a.get(k, 0) for k in keys])
        b = np.array([counts_b.get(k, 0) for k in keys])
        keep = (a + b) >= 10
        chi = scipy.stats.chi2_contingency(np.vstack([a[keep], b[keep]]))
        assert chi.pvalue > 0.01

    def test_merge_pair_law_asymmetric(self):
        from mcld.frozen_percolation import _aggregate_mcld_top

        # (3,2,1) run just long enough for one event, lam=0: first merge has
        # pair law 6:3:2; read the outcome off the surviving multiset
        rng = np.random.default_rng(77)
        counts = {5.0: 0, 4.0: 0, 3.0: 0}
        trials = 6000
        while sum(counts.values()) < trials:
            top = _aggregate_mcld_top(np.array([3.0, 2.0, 1.0]), 0.0, [0.02], rng, 3)[0]
            if len(top[top > 0]) == 2:
                counts[float(max(top))] += 1
        observed = np.array([counts[5.0], counts[4.0], counts[3.0]])
        expected = np.array([6.0, 3.0, 2.0]) / 11.0 * trials
        chi = scipy.stats.chisquare(observed, expected)
        assert chi.pvalue > 0.01


class TestCompareReport:
    def test_time_zero_reduces_to_initial_scaled_laws(self):
        # no dynamics: the comparison is between scaled critical component
        # laws across sizes, which nearly coincide
        rep = fp_mcld_compare(
            n_list=[2000, 4000],
            lam_rescaled=0.0,
            u=0.0,
            t=0.0,
            replicas=60,
            top_r=1,
            seed=SEED,
            n_ref=8000,
        )
        for n in (2000, 4000):
            assert rep.ks_vs_reference[n][0] <= 0.35

    def test_small_smoke_and_determinism(self):
        kwargs = dict(
            n_list=[300, 900],
            lam_rescaled=1.0,
            u=0.0,
            t=0.5,
            replicas=12,
            top_r=2,
            seed=SEED,
            n_ref=2000,
            budget_eps=4.0,
        )
        rep1 = fp_mcld_compare(**kwargs)
        rep2 = fp_mcld_compare(**kwargs)
        assert rep1.ks_vs_reference == rep2.ks_vs_reference
        assert rep1.samples[300].shape == (12, 2)
        for stats in rep1.ks_vs_reference.values():
            assert all(0.0 <= s <= 1.0 for s in stats)
        assert (300, 900) in rep1.ks_between
        d = rep1.to_json_dict()
        assert d["n_list"] == [300, 900]
