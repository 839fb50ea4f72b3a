import itertools
from fractions import Fraction as Q

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chamber_walks import models
from chamber_walks.arrangements import Arrangement, Graph, enumerate_chambers
from chamber_walks.linalg import bareiss_solve, charpoly_fraction, crt_symmetric, primes_below, traces_of_powers
from chamber_walks.verify import random_measure, random_weights
from chamber_walks.walks import (
    Distribution,
    FaceMeasure,
    InvalidMeasure,
    NonUniqueStationary,
    TransitionMatrix,
    build_transition,
    coupling_bound_mc,
    coupling_curve_mc,
    distribution_after,
    eigenvalue_bound,
    exact_traces,
    exact_tv_curve,
    is_separating,
    luce_stationary,
    simulate,
    spectrum,
    stationary,
    tv_distance,
    verify_spectrum_by_traces,
)

import oracles


def poly_from_roots(pairs):
    """Coefficients (leading first) of prod (x - lam)^m."""
    c = [Q(1)]
    for lam, m in pairs:
        for _ in range(m):
            c = [a - lam * b for a, b in zip(c + [Q(0)], [Q(0)] + c)]
    return c


# --------------------------------------------------------------------------
# measures and transition matrices


def test_measure_validation():
    A = Arrangement.boolean(1)
    with pytest.raises(InvalidMeasure):
        FaceMeasure(A, {(1,): Q(1, 2)})
    with pytest.raises(InvalidMeasure):
        FaceMeasure(A, {(1,): Q(3, 2), (-1,): Q(-1, 2)})
    with pytest.raises(InvalidMeasure):
        FaceMeasure(A, {(2,): Q(1)})
    with pytest.raises(TypeError):
        FaceMeasure(A, {(1,): 0.5, (-1,): 0.5})
    w = FaceMeasure(A, {(1,): Q(1), (-1,): Q(0)})
    assert w.support == [(1,)]


def test_zero_face_measure_gives_identity():
    K = build_transition(FaceMeasure(Arrangement.boolean(1), {(0,): 1}))
    assert K.entries == [[1, 0], [0, 1]]


def test_tsetlin_two_cards():
    w1, w2 = Q(2, 7), Q(5, 7)
    K = build_transition(models.tsetlin_measure([w1, w2]))
    assert K.states == [(1, 2), (2, 1)]
    assert K.entries == [[w1, w2], [w1, w2]]


def test_tsetlin_matches_move_to_front_oracle():
    w = [Q(1, 10), Q(2, 10), Q(3, 10), Q(4, 10)]
    K = build_transition(models.tsetlin_measure(w))
    perms, ref = oracles.tsetlin_matrix(w)
    assert K.states == perms and K.entries == ref


def test_nearest_neighbor_matrix():
    weights = [(Q(1, 10), Q(2, 10)), (Q(3, 10), Q(4, 10))]
    K = build_transition(models.nearest_neighbor_measure(weights))
    for x in K.states:
        hold = sum(weights[i][0 if x[i] < 0 else 1] for i in range(2))
        assert K(x, x) == hold
        for i in range(2):
            y = tuple(-v if k == i else v for k, v in enumerate(x))
            assert K(x, y) == weights[i][0 if y[i] < 0 else 1]
    assert K.check_stochastic()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_boolean_rows_stochastic(seed):
    w = random_measure(Arrangement.boolean(3), np.random.default_rng(seed))
    assert build_transition(w).check_stochastic()


# --------------------------------------------------------------------------
# spectra


def test_tsetlin3_uniform_char_poly_and_traces():
    w = models.tsetlin_measure(models.uniform_weights(3))
    K = build_transition(w)
    s = spectrum(w)
    assert s.merged() == [(1, 1), (Q(1, 3), 3), (0, 2)]
    assert K.char_poly() == poly_from_roots([(1, 1), (Q(1, 3), 3), (0, 2)])
    assert verify_spectrum_by_traces(K, s)
    assert exact_traces(K, 6) == oracles.traces_by_powers(K.entries, 6)


def test_a_shuffle_n3():
    s = spectrum(models.a_shuffle_measure(2, 3))
    assert s.merged() == [(1, 1), (Q(1, 2), 3), (Q(1, 4), 2)]


@pytest.mark.parametrize("n", range(1, 7))
def test_ehrenfest_spectrum(n):
    s = spectrum(models.ehrenfest(n))
    assert s.merged() == [(Q(j, n), __import__("math").comb(n, j)) for j in range(n, -1, -1)]


def test_identity_walk_traces():
    K = build_transition(FaceMeasure(Arrangement.boolean(2), {(0, 0): 1}))
    assert exact_traces(K, 4) == [4, 4, 4, 4]


@pytest.mark.parametrize("seed", range(20))
def test_random_boolean3_traces_against_matrix_powers(seed):
    rng = np.random.default_rng(seed)
    w = random_measure(Arrangement.boolean(3), rng)
    K = build_transition(w)
    s = spectrum(w)
    assert verify_spectrum_by_traces(K, s)
    direct = oracles.traces_by_powers(K.entries, K.size)
    assert direct == [s.power_sum(l) for l in range(1, K.size + 1)]


def test_trace_check_rejects_wrong_spectrum():
    w = models.tsetlin_measure(models.uniform_weights(3))
    K = build_transition(w)
    s = spectrum(w)
    bad = type(s)([(Q(1), 1), (Q(1, 3), 2), (Q(1, 2), 1), (Q(0), 2)])
    assert not verify_spectrum_by_traces(K, bad)
    assert not verify_spectrum_by_traces(K, type(s)([(Q(1), 1)]))


def test_spectrum_invariants_on_random_braid():
    rng = np.random.default_rng(11)
    for _ in range(5):
        w = random_measure(Arrangement.braid(4), rng)
        s = spectrum(w)
        assert s.total == 24
        assert all(0 <= lam <= 1 for lam, _ in s.pairs) and all(m >= 0 for _, m in s.pairs)


# --------------------------------------------------------------------------
# linear algebra helpers


def test_crt_and_primes():
    ps = primes_below(1 << 20, 3)
    assert all(p < 1 << 20 for p in ps) and len(set(ps)) == 3
    x = -123456789
    N = ps[0] * ps[1] * ps[2]
    assert crt_symmetric([x % p for p in ps], ps) == x if abs(x) < N // 2 else True


def test_traces_of_powers_large_entries():
    M = [[7, 3], [5, 9]]
    ref = oracles.traces_by_powers([[Q(v) for v in r] for r in M], 12)
    assert traces_of_powers(M, 12, 80) == [int(t) for t in ref]


def test_bareiss_and_charpoly():
    A = [[2, 1], [1, 3]]
    assert bareiss_solve(A, [3, 5]) == [Q(4, 5), Q(7, 5)]
    assert charpoly_fraction([[Q(2), Q(1)], [Q(1), Q(3)]]) == [1, -5, 5]


# --------------------------------------------------------------------------
# separation and stationary laws


def test_separating_examples():
    assert models.tsetlin_measure([Q(1, 2), Q(1, 2), 0]).weights and is_separating(
        models.tsetlin_measure([Q(1, 2), Q(1, 2), 0]))
    assert not is_separating(models.tsetlin_measure([1, 0, 0]))
    assert not is_separating(FaceMeasure(Arrangement.boolean(2), {(0, 0): 1}))
    G = Graph.path(3)
    w = models.tsetlin_measure([Q(1, 2), 0, Q(1, 2)])
    assert is_separating(w, Arrangement.graphical(G))
    w = models.tsetlin_measure([Q(1), 0, 0])
    assert not is_separating(w, Arrangement.graphical(G))


def test_stationary_uniform_and_luce():
    K = build_transition(models.tsetlin_measure(models.uniform_weights(3)))
    assert stationary(K).probs == [Q(1, 6)] * 6
    w = [Q(1, 2), Q(1, 3), Q(1, 6)]
    pi = stationary(build_transition(models.tsetlin_measure(w)))
    assert pi == luce_stationary(w)
    for tau, p in luce_stationary(w).as_dict().items():
        assert p == oracles.luce_probability(w, tau)


def test_luce_two_states_and_uniform():
    p = Q(2, 9)
    assert luce_stationary([p, 1 - p]).as_dict() == {(1, 2): p, (2, 1): 1 - p}
    assert set(luce_stationary(models.uniform_weights(4)).probs) == {Q(1, 24)}
    with pytest.raises(InvalidMeasure):
        luce_stationary([1, 0, 0])


def test_stationary_with_transient_states():
    # one weight zero: the chain never leaves the decks with card 3 last
    w = [Q(1, 2), Q(1, 2), 0]
    pi = stationary(build_transition(models.tsetlin_measure(w)))
    assert pi == luce_stationary(w)
    assert pi[(1, 3, 2)] == 0


def test_non_unique_stationary_reported():
    K = build_transition(FaceMeasure(Arrangement.boolean(1), {(0,): 1}))
    with pytest.raises(NonUniqueStationary):
        stationary(K)


def test_nearest_neighbor_product_formula():
    rng = np.random.default_rng(3)
    for n in range(1, 5):
        raw = [int(v) for v in rng.integers(1, 6, size=2 * n)]
        tot = sum(raw)
        weights = [(Q(raw[2 * i], tot), Q(raw[2 * i + 1], tot)) for i in range(n)]
        K = build_transition(models.nearest_neighbor_measure(weights))
        assert stationary(K) == models.nearest_neighbor_stationary(weights)


def test_ehrenfest_stationary_uniform():
    pi = stationary(build_transition(models.ehrenfest(3)))
    assert set(pi.probs) == {Q(1, 8)}


# --------------------------------------------------------------------------
# total variation and bounds


def test_tv_examples():
    s = [(1,), (2,)]
    p = Distribution(s, [Q(1), Q(0)])
    assert tv_distance(p, p) == 0
    assert tv_distance(p, Distribution(s, [Q(0), Q(1)])) == 1
    assert tv_distance(p, Distribution(s, [Q(1, 2), Q(1, 2)])) == Q(1, 2)
    with pytest.raises(ValueError):
        tv_distance(p, Distribution([(3,)], [Q(1)]))


def test_exact_tv_curve_matches_distribution_after():
    w = models.tsetlin_measure([Q(1, 2), Q(1, 3), Q(1, 6)])
    K = build_transition(w)
    pi = stationary(K)
    curve = exact_tv_curve(K, (3, 2, 1), 6, pi)
    assert curve[0] == 1 - pi[(3, 2, 1)]
    for l in range(7):
        assert curve[l] == tv_distance(distribution_after(K, (3, 2, 1), l), pi)


def test_tsetlin_bound_forms():
    w = [Q(1, 2), Q(1, 3), Q(1, 6)]
    m = models.tsetlin_measure(w)
    for l in range(6):
        expect = sum((1 - w[i] - w[j]) ** l for i, j in itertools.combinations(range(3), 2))
        assert eigenvalue_bound(m, l) == expect
    assert eigenvalue_bound(models.a_shuffle_measure(3, 4), 2) == 6 * Q(1, 9)


def test_uniform_tsetlin_n4_curve_under_bound_and_monotone():
    w = models.tsetlin_measure(models.uniform_weights(4))
    K = build_transition(w)
    curve = exact_tv_curve(K, (1, 2, 3, 4), 30)
    for l, tv in enumerate(curve):
        assert tv <= eigenvalue_bound(w, l)
    assert all(a >= b for a, b in zip(curve, curve[1:]))


def test_coupling_estimator_basics():
    w = models.tsetlin_measure(models.uniform_weights(4))
    est, err = coupling_curve_mc(w, None, 10, 5000, seed=1)
    assert est[0] == 1.0 and len(est) == 11
    assert all(a >= b for a, b in zip(est, est[1:]))
    est2, _ = coupling_curve_mc(w, None, 10, 5000, seed=1)
    assert np.array_equal(est, est2)
    with pytest.raises(ValueError):
        coupling_curve_mc(w, None, 3, 0, seed=1)
    e, s = coupling_bound_mc(w, None, 4, 5000, seed=1)
    assert e == est[4]


def test_coupling_matches_coupon_collector():
    """Uniform Tsetlin couples once n-1 distinct cards have been picked."""
    n, L = 4, 12
    w = models.tsetlin_measure(models.uniform_weights(n))
    est, err = coupling_curve_mc(w, None, L, 40000, seed=5)
    for l in range(L + 1):
        hit = 0
        for seq in itertools.product(range(n), repeat=l):
            hit += len(set(seq)) < n - 1
        exact = hit / n**l
        assert abs(est[l] - exact) <= 4 * err[l] + 1e-12


def test_orientation_coupling_is_non_dominating_probability():
    G = Graph.path(3)
    w = models.tsetlin_measure(models.uniform_weights(3))
    est, err = coupling_curve_mc(w, Arrangement.graphical(G), 5, 40000, seed=2)
    for l in range(6):
        bad = 0
        for seq in itertools.product(range(1, 4), repeat=l):
            dom = set()
            for v in seq:
                dom |= G.closed_neighborhood(v)
            # an edge is separated once one of its ends is picked
            bad += not all(a in seq or b in seq for a, b in G.edges)
        assert abs(est[l] - bad / 3**l) <= 4 * err[l] + 1e-12


def test_block_seeding_is_order_independent():
    w = models.ehrenfest(3)
    a, _ = coupling_curve_mc(w, None, 5, 3000, seed=9)
    b, _ = coupling_curve_mc(w, None, 5, 2048, seed=9)
    # the first two blocks of both runs are the same draws
    ca = np.rint(a * 3000).astype(int)
    cb = np.rint(b * 2048).astype(int)
    assert np.all(ca >= cb)


# --------------------------------------------------------------------------
# simulation


def test_simulate_constant_and_replay():
    w = FaceMeasure(Arrangement.boolean(2), {(0, 0): 1})
    assert simulate(w, (1, -1), 5, seed=0) == [(1, -1)] * 6
    w = models.tsetlin_measure([Q(1, 2), Q(1, 3), Q(1, 6)])
    assert simulate(w, (1, 2, 3), 20, seed=4) == simulate(w, (1, 2, 3), 20, seed=4)
    with pytest.raises(ValueError):
        simulate(w, (1, 1, 3), 2, seed=0)


def test_simulate_one_step_frequencies():
    w = models.tsetlin_measure([Q(1, 2), Q(1, 3), Q(1, 6)])
    K = build_transition(w)
    N = 100_000
    start = (2, 3, 1)
    rng_seeds = np.random.SeedSequence(123).generate_state(1)
    from chamber_walks.walks import sample_faces
    from chamber_walks.arrangements import project
    rng = np.random.default_rng(int(rng_seeds[0]))
    picks = sample_faces(w, rng, N)
    faces = w.support
    counts = {}
    for k, c in zip(*np.unique(picks, return_counts=True)):
        t = project(w.arr, faces[k], start)
        counts[t] = counts.get(t, 0) + int(c)
    for t in K.states:
        p = float(K(start, t))
        f = counts.get(t, 0) / N
        assert abs(f - p) <= 4 * max((p * (1 - p) / N) ** 0.5, 1 / N)


def test_transition_matrix_helpers():
    K = build_transition(models.tsetlin_measure(models.uniform_weights(3)))
    sub = K.restrict([(1, 2, 3), (2, 1, 3)])
    assert sub.size == 2
    rel = K.relabel(lambda s: tuple(reversed(s)))
    assert rel.states == sorted(rel.states)
    with pytest.raises(ValueError):
        K.relabel(lambda s: 0)
    assert np.allclose(K.dense_float().sum(axis=1), 1)
    with pytest.raises(ValueError):
        TransitionMatrix([1, 1], [[1, 0], [0, 1]])
