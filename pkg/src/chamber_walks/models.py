"""Named chains: library shuffles, cube walks, attacks, orientations."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .arrangements import (
    MINUS,
    PLUS,
    ZERO,
    Arrangement,
    Graph,
    check_cap,
    enumerate_chambers,
    ordered_set_partitions,
)
from .induction import SubarrangementPair, induced_measure
from .walks import (
    Distribution,
    FaceMeasure,
    InvalidMeasure,
    TransitionMatrix,
    ZERO_Q,
    as_fraction,
    build_transition,
)


def _weights(weights: Sequence, n: int | None = None) -> list[Fraction]:
    w = [as_fraction(x) for x in weights]
    if n is not None and len(w) != n:
        raise InvalidMeasure(f"expected {n} weights, got {len(w)}")
    if any(x < 0 for x in w) or sum(w) != 1:
        raise InvalidMeasure("weights must be nonnegative and sum to 1")
    return w


def uniform_weights(n: int) -> list[Fraction]:
    return [Fraction(1, n)] * n


# --------------------------------------------------------------------------
# braid arrangement


def tsetlin_face(n: int, i: int) -> tuple:
    if n == 1:
        return ((1,),)
    return ((i,), tuple(j for j in range(1, n + 1) if j != i))


def tsetlin_measure(weights: Sequence) -> FaceMeasure:
    """Move-to-front: mass w_i on the ordered partition ({i}, [n] minus i)."""
    w = _weights(weights)
    n = len(w)
    out: dict = {}
    for i, wi in enumerate(w, start=1):
        F = tsetlin_face(n, i)
        out[F] = out.get(F, ZERO_Q) + wi
    return FaceMeasure(Arrangement.braid(n), out)


def a_shuffle_measure(a: int, n: int) -> FaceMeasure:
    """Inverse a-shuffles: an ordered partition with k blocks has mass C(a, k)/a^n."""
    if a < 2:
        raise ValueError("a must be at least 2")
    total = Fraction(1, a**n)
    out = {}
    for F in ordered_set_partitions(n):
        k = len(F)
        if k <= a:
            out[F] = math.comb(a, k) * total
    return FaceMeasure(Arrangement.braid(n), out)


def a_shuffle_measure_by_enumeration(a: int, n: int) -> FaceMeasure:
    """Same measure, by labelling each card with one of a digits."""
    total = Fraction(1, a**n)
    out: dict = {}
    for labels in itertools.product(range(a), repeat=n):
        F = tuple(tuple(i + 1 for i in range(n) if labels[i] == d) for d in range(a))
        F = tuple(b for b in F if b)
        out[F] = out.get(F, ZERO_Q) + total
    return FaceMeasure(Arrangement.braid(n), out)


def phat_eigenvalues(weights: Sequence) -> list[Fraction]:
    """sum of w_i over fixed points of tau, one value per permutation tau."""
    w = _weights(weights)
    n = len(w)
    return [sum((w[i] for i in range(n) if tau[i] == i + 1), ZERO_Q)
            for tau in itertools.permutations(range(1, n + 1))]


def stirling_first_unsigned(n: int, k: int) -> int:
    c = [[0] * (n + 1) for _ in range(n + 1)]
    c[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, i + 1):
            c[i][j] = c[i - 1][j - 1] + (i - 1) * c[i - 1][j]
    return c[n][k]


# --------------------------------------------------------------------------
# Boolean arrangement


def nearest_neighbor_measure(weights: Sequence[tuple]) -> FaceMeasure:
    """``weights[i-1] = (w_i^-, w_i^+)``; mass w_i^e on the face E_i^e."""
    n = len(weights)
    out: dict = {}
    total = ZERO_Q
    for i, pair in enumerate(weights):
        for eps, v in zip((MINUS, PLUS), pair):
            v = as_fraction(v)
            if v < 0:
                raise InvalidMeasure("negative weight")
            total += v
            if v:
                F = tuple(eps if k == i else ZERO for k in range(n))
                out[F] = v
    if total != 1:
        raise InvalidMeasure(f"weights sum to {total}, not 1")
    return FaceMeasure(Arrangement.boolean(n), out)


def ehrenfest(n: int) -> FaceMeasure:
    h = Fraction(1, 2 * n)
    return nearest_neighbor_measure([(h, h)] * n)


def nearest_neighbor_stationary(weights: Sequence[tuple]) -> Distribution:
    """pi(x) = product of w_i^{x_i} / w_i."""
    n = len(weights)
    w = [(as_fraction(a), as_fraction(b)) for a, b in weights]
    states = enumerate_chambers(Arrangement.boolean(n))
    probs = []
    for x in states:
        p = Fraction(1)
        for (wm, wp), e in zip(w, x):
            p *= (wp if e == PLUS else wm) / (wm + wp)
        probs.append(p)
    return Distribution(states, probs)


def neighborhood_attack_measure(G: Graph, weights: Sequence | None = None) -> FaceMeasure:
    """Node i (probability w_i, default uniform) sets its closed neighbourhood
    to + or - with probability 1/2 each."""
    n = G.n
    w = uniform_weights(n) if weights is None else _weights(weights, n)
    out: dict = {}
    for i in range(1, n + 1):
        hood = G.closed_neighborhood(i)
        for eps in (MINUS, PLUS):
            F = tuple(eps if j in hood else ZERO for j in range(1, n + 1))
            out[F] = out.get(F, ZERO_Q) + w[i - 1] / 2
    return FaceMeasure(Arrangement.boolean(n), out)


def attack_alpha(G: Graph, S) -> int:
    """Nodes neither equal nor adjacent to any node of S."""
    hit = set()
    for v in S:
        hit |= G.closed_neighborhood(v)
    return G.n - len(hit)


# --------------------------------------------------------------------------
# orientations


def orientation_face(G: Graph, i: int) -> tuple:
    """Edges at i pointed towards i, others 0."""
    out = []
    for a, b in G.edges:
        out.append(PLUS if a == i else MINUS if b == i else ZERO)
    return tuple(out)


def orientation_measure(G: Graph, weights: Sequence | None = None) -> FaceMeasure:
    """The face measure on Boolean(m) behind the orientation chain.

    Isolated nodes put their weight on the zero face.
    """
    w = uniform_weights(G.n) if weights is None else _weights(weights, G.n)
    out: dict = {}
    for i in range(1, G.n + 1):
        F = orientation_face(G, i)
        out[F] = out.get(F, ZERO_Q) + w[i - 1]
    return FaceMeasure(Arrangement.boolean(G.m), out)


def reorient_towards(G: Graph, o: tuple, i: int) -> tuple:
    return tuple(PLUS if a == i else MINUS if b == i else s for (a, b), s in zip(G.edges, o))


def orientation_chain(G: Graph, weights: Sequence | None = None,
                      cap: int | None = None) -> TransitionMatrix:
    """K(o, o') = sum of w_i over nodes i whose reorientation sends o to o'.

    States are all 2^m orientations in lex order.
    """
    w = uniform_weights(G.n) if weights is None else _weights(weights, G.n)
    check_cap(2**G.m, cap, f"orientations of a graph with {G.m} edges", 1)
    states = list(itertools.product((MINUS, PLUS), repeat=G.m))
    index = {s: k for k, s in enumerate(states)}
    rows = []
    for o in states:
        row = [ZERO_Q] * len(states)
        for i in range(1, G.n + 1):
            if w[i - 1]:
                row[index[reorient_towards(G, o, i)]] += w[i - 1]
        rows.append(row)
    return TransitionMatrix(states, rows)


def orientation_eigenvalues(G: Graph, weights: Sequence | None = None) -> list[Fraction]:
    """lambda_S = sum of w_i over nodes not on any edge indexed by S, for S ⊆ [m]."""
    w = uniform_weights(G.n) if weights is None else _weights(weights, G.n)
    out = []
    for mask in range(2**G.m):
        touched = set()
        for k, e in enumerate(G.edges):
            if mask >> k & 1:
                touched.update(e)
        out.append(sum((w[i - 1] for i in range(1, G.n + 1) if i not in touched), ZERO_Q))
    return out


def base_measure(n: int, base) -> FaceMeasure:
    """``base`` is ``("tsetlin", weights-or-None)`` or ``("a_shuffle", a)``."""
    kind, param = base
    if kind == "tsetlin":
        return tsetlin_measure(uniform_weights(n) if param is None else param)
    if kind == "a_shuffle":
        return a_shuffle_measure(int(param), n)
    raise ValueError(f"unknown base walk {kind!r}")


def ao_pair(G: Graph, cap: int | None = None) -> SubarrangementPair:
    return SubarrangementPair.build(Arrangement.braid(G.n), Arrangement.graphical(G), cap)


def ao_chain_via_induction(G: Graph, base=("tsetlin", None), cap: int | None = None) -> TransitionMatrix:
    """The chain on acyclic orientations induced from a braid walk."""
    pair = ao_pair(G, cap)
    return build_transition(induced_measure(pair, base_measure(G.n, base)), cap)


def a_shuffle_ao_direct(G: Graph, a: int) -> TransitionMatrix:
    """K*(o, o') = nu*(o, o')/a^n with nu* counting digit labellings of the
    nodes that turn o into o'."""
    arr = Arrangement.graphical(G)
    states = enumerate_chambers(arr)
    index = {s: k for k, s in enumerate(states)}
    moves: dict[tuple, int] = {}
    for labels in itertools.product(range(a), repeat=G.n):
        F = tuple(PLUS if labels[i - 1] < labels[j - 1] else MINUS if labels[i - 1] > labels[j - 1] else ZERO
                  for i, j in G.edges)
        moves[F] = moves.get(F, 0) + 1
    unit = Fraction(1, a**G.n)
    rows = []
    for o in states:
        row = [ZERO_Q] * len(states)
        for F, c in moves.items():
            row[index[tuple(f if f else s for f, s in zip(F, o))]] += c * unit
        rows.append(row)
    return TransitionMatrix(states, rows)


# --------------------------------------------------------------------------
# statistics of the library chain


def _subset_key(S: tuple) -> int:
    return sum(1 << (i - 1) for i in S)


def statistic_graph(kind: str, n: int, param: int | None = None) -> Graph:
    if kind == "top_k":
        k = int(param)
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        return Graph(n, tuple(itertools.combinations(range(1, k + 1), 2)))
    if kind == "tagged_preceders":
        m = n - 1 if param is None else int(param)
        return Graph.star(n, m)
    if kind == "descent_set":
        return Graph.path(n)
    if kind == "cyclic_descent_set":
        return Graph.cycle(n)
    raise ValueError(f"unknown statistic {kind!r}")


def statistic_label(kind: str, G: Graph, o: tuple, param: int | None = None):
    """Map an acyclic orientation to the statistic it records."""
    sign = dict(zip(G.edges, o))
    if kind == "top_k":
        k = int(param)
        # i precedes j exactly when the edge (i, j), i < j, has sign +
        before = {i: sum(1 for j in range(1, k + 1) if j != i and
                         sign[(min(i, j), max(i, j))] == (PLUS if j < i else MINUS))
                  for i in range(1, k + 1)}
        return tuple(sorted(range(1, k + 1), key=before.__getitem__))
    n = G.n
    if kind == "tagged_preceders":
        return tuple(i for (i, j), s in sign.items() if s == PLUS)
    if kind == "descent_set":
        return tuple(i for i in range(1, n) if sign[(i, i + 1)] == MINUS)
    if kind == "cyclic_descent_set":
        S = [i for i in range(1, n) if sign[(i, i + 1)] == MINUS]
        if sign[(1, n)] == PLUS:
            S.append(n)
        return tuple(S)
    raise ValueError(f"unknown statistic {kind!r}")


def statistic_chain(kind: str, n: int, base=("tsetlin", None), param: int | None = None,
                    cap: int | None = None) -> TransitionMatrix:
    """Induced chain relabelled by the recorded statistic.

    top_k states are permutations of [k] (lex); the subset statistics use
    ascending tuples ordered by their bitmask.
    """
    G = statistic_graph(kind, n, param)
    K = ao_chain_via_induction(G, base, cap)
    key = None if kind == "top_k" else _subset_key
    return K.relabel(lambda o: statistic_label(kind, G, o, param), key=key)


def descent_set(tau: Sequence[int]) -> tuple:
    return tuple(i for i in range(1, len(tau)) if tau[i - 1] > tau[i])


def cyclic_descent_set(tau: Sequence[int]) -> tuple:
    """Positions i (mod n) with tau(i) > tau(i+1), tau(n+1) = tau(1)."""
    n = len(tau)
    return tuple(i for i in range(1, n + 1) if tau[i - 1] > tau[i % n])


def star_stationary(m: int) -> dict[tuple, Fraction]:
    """pi(S) = 1 / ((m+1) C(m, |S|)) for S ⊆ [m]."""
    out = {}
    for k in range(m + 1):
        for S in itertools.combinations(range(1, m + 1), k):
            out[S] = Fraction(1, (m + 1) * math.comb(m, k))
    return out


def star_count_chain(n: int) -> TransitionMatrix:
    """Number of leaves preceding the centre, star with m = n - 1 leaves,
    uniform library chain.  From k: to k+1 w.p. (m-k)/n, to 0 w.p. 1/n."""
    m = n - 1
    rows = []
    for k in range(m + 1):
        row = [ZERO_Q] * (m + 1)
        row[0] += Fraction(1, n)
        if k < m:
            row[k + 1] += Fraction(m - k, n)
        row[k] += Fraction(k, n)
        rows.append(row)
    return TransitionMatrix(list(range(m + 1)), rows)


def birth_extinction_expectation(n: int, l: int) -> Fraction:
    """Expected number of + coordinates after l steps from all minus.

    Each leaf becomes + w.p. 1/n (it is picked) and every leaf becomes -
    w.p. 1/n (the centre is picked), so p_{t+1} = p_t (1 - 2/n) + 1/n.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    p = ZERO_Q
    for _ in range(l):
        p = p * (1 - Fraction(2, n)) + Fraction(1, n)
    return (n - 1) * p


# --------------------------------------------------------------------------
# closed-form bounds


def closed_form_bound(model: str, l: int, **p) -> Fraction:
    """Bounds written in closed form for the named chains.

    models: tsetlin_uniform(n), a_shuffle(n, a), top_k_uniform(n, k),
    orientation_uniform(graph), star_coupling(n), a_shuffle_star(n, a),
    descent_uniform(n), cyclic_descent_uniform(n), nearest_neighbor(weights),
    neighborhood_attack(graph).
    """
    q = Fraction
    if model == "tsetlin_uniform":
        n = p["n"]
        return math.comb(n, 2) * (1 - q(2, n)) ** l
    if model == "a_shuffle":
        return math.comb(p["n"], 2) * q(1, p["a"]) ** l
    if model == "top_k_uniform":
        return math.comb(p["k"], 2) * (1 - q(2, p["n"])) ** l
    if model == "orientation_uniform":
        G = p["graph"]
        return G.m * (1 - q(2, G.n)) ** l
    if model == "star_coupling":
        return (1 - q(1, p["n"])) ** l
    if model == "a_shuffle_star":
        return (p["n"] - 1) * q(1, p["a"]) ** l
    if model == "descent_uniform":
        return (p["n"] - 1) * (1 - q(2, p["n"])) ** l
    if model == "cyclic_descent_uniform":
        return p["n"] * (1 - q(2, p["n"])) ** l
    if model == "nearest_neighbor":
        return sum(((1 - as_fraction(a) - as_fraction(b)) ** l for a, b in p["weights"]), ZERO_Q)
    if model == "neighborhood_attack":
        G = p["graph"]
        return sum(((1 - q(G.degree(i) + 1, G.n)) ** l for i in range(1, G.n + 1)), ZERO_Q)
    raise ValueError(f"unknown model {model!r}")
