"""Hyperplane walks: transition matrices, spectra, stationary laws, bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .arrangements import (
    Arrangement,
    ZERO,
    enumerate_chambers,
    face_in_flat,
    face_in_hyperplane,
    intersection_lattice,
    is_chamber,
    is_face,
    project,
    as_permutation,
)
from .linalg import SingularSystem, bareiss_solve, common_denominator, traces_of_powers

ZERO_Q = Fraction(0)
ONE_Q = Fraction(1)


class InvalidMeasure(ValueError):
    pass


class NonUniqueStationary(ValueError):
    """The chain has more than one stationary distribution."""


class NonSeparating(ValueError):
    pass


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted on the exact path; use 'p/q' strings")
    return Fraction(x)


# --------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class FaceMeasure:
    """Probability measure on the faces of an arrangement (zero masses dropped)."""

    arr: Arrangement
    weights: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean: dict = {}
        for F, v in dict(self.weights).items():
            v = as_fraction(v)
            if v < 0:
                raise InvalidMeasure(f"negative weight {v} on face {F}")
            if not is_face(self.arr, F):
                raise InvalidMeasure(f"{F!r} is not a face of {self.arr}")
            if self.arr.kind == "braid" and F and not isinstance(F[0], tuple):
                F = tuple((x,) for x in F)
            if v:
                clean[F] = clean.get(F, ZERO_Q) + v
        total = sum(clean.values(), ZERO_Q)
        if total != 1:
            raise InvalidMeasure(f"weights sum to {total}, not 1")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @property
    def support(self) -> list:
        return list(self.weights)

    def __getitem__(self, F) -> Fraction:
        return self.weights.get(F, ZERO_Q)


@dataclass
class TransitionMatrix:
    """Dense exact stochastic matrix over an ordered state list."""

    states: list
    entries: list[list[Fraction]]

    def __post_init__(self):
        self.index = {s: k for k, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("duplicate states")
        self._int = None

    @property
    def size(self) -> int:
        return len(self.states)

    def check_stochastic(self) -> bool:
        return all(sum(r, ZERO_Q) == 1 and all(v >= 0 for v in r) for r in self.entries)

    def __call__(self, s, t) -> Fraction:
        return self.entries[self.index[s]][self.index[t]]

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.states == other.states and self.entries == other.entries

    def integer_form(self) -> tuple[int, list[dict[int, int]]]:
        """(D, rows) with K = M / D and M's rows as sparse {column: int}."""
        if self._int is None:
            D = common_denominator(v for r in self.entries for v in r if v)
            rows = [{j: int(v * D) for j, v in enumerate(r) if v} for r in self.entries]
            self._int = (D, rows)
        return self._int

    def restrict(self, states: Sequence) -> "TransitionMatrix":
        """Principal submatrix on ``states`` (kept in the given order)."""
        idx = [self.index[s] for s in states]
        return TransitionMatrix(list(states), [[self.entries[i][j] for j in idx] for i in idx])

    def relabel(self, mapping, key=None) -> "TransitionMatrix":
        """Rename states through a bijection and re-sort them by ``key``."""
        new = [mapping(s) if callable(mapping) else mapping[s] for s in self.states]
        if len(set(new)) != len(new):
            raise ValueError("relabelling is not injective")
        order = sorted(range(len(new)), key=(lambda k: key(new[k])) if key else (lambda k: new[k]))
        return TransitionMatrix([new[k] for k in order],
                                [[self.entries[i][j] for j in order] for i in order])

    def dense_float(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.entries])

    def char_poly(self) -> list[Fraction]:
        from .linalg import charpoly_fraction
        return charpoly_fraction(self.entries)


@dataclass
class Spectrum:
    """Eigenvalue data: one (lambda, multiplicity) pair per lattice element."""

    pairs: list[tuple[Fraction, int]]
    labels: list | None = None

    @property
    def total(self) -> int:
        return sum(m for _, m in self.pairs)

    def merged(self) -> list[tuple[Fraction, int]]:
        """Pairs merged by value, multiplicity-0 dropped, descending."""
        acc: dict[Fraction, int] = {}
        for lam, m in self.pairs:
            if m:
                acc[lam] = acc.get(lam, 0) + m
        return sorted(acc.items(), key=lambda t: -t[0])

    def power_sum(self, l: int) -> Fraction:
        return sum((m * lam**l for lam, m in self.pairs), ZERO_Q)

    def multiplicity(self, lam) -> int:
        lam = as_fraction(lam)
        return sum(m for v, m in self.pairs if v == lam)


@dataclass
class Distribution:
    states: list
    probs: list[Fraction]

    def __post_init__(self):
        self.index = {s: k for k, s in enumerate(self.states)}

    def __getitem__(self, s) -> Fraction:
        k = self.index.get(s)
        return self.probs[k] if k is not None else ZERO_Q

    def as_dict(self) -> dict:
        return dict(zip(self.states, self.probs))

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    @classmethod
    def point_mass(cls, states: Sequence, s) -> "Distribution":
        return cls(list(states), [ONE_Q if t == s else ZERO_Q for t in states])


# --------------------------------------------------------------------------
# construction and spectra


def _start_state(arr: Arrangement, C):
    if arr.kind == "braid":
        return as_permutation(C)
    return tuple(C)


def build_transition(w: FaceMeasure, cap: int | None = None) -> TransitionMatrix:
    """K(C, C') = sum of w(F) over faces F with FC = C'."""
    arr = w.arr
    chambers = enumerate_chambers(arr, cap)
    index = {C: k for k, C in enumerate(chambers)}
    N = len(chambers)
    support = list(w.weights.items())
    rows = []
    for C in chambers:
        row = [ZERO_Q] * N
        for F, v in support:
            j = index[project(arr, F, C)]
            row[j] += v
        rows.append(row)
    return TransitionMatrix(chambers, rows)


def face_eigenvalue(w: FaceMeasure, payload) -> Fraction:
    """lambda_W = sum of w(F) over faces F contained in W."""
    return sum((v for F, v in w.weights.items() if face_in_flat(w.arr, F, payload)), ZERO_Q)


def spectrum(w: FaceMeasure) -> Spectrum:
    lattice = intersection_lattice(w.arr)
    pairs = [(face_eigenvalue(w, W.payload), W.eigen_mult) for W in lattice]
    return Spectrum(pairs, [W.payload for W in lattice])


def exact_traces(K: TransitionMatrix, L: int) -> list[Fraction]:
    """tr(K**l) for l = 1..L, exactly."""
    D, rows = K.integer_form()
    N = K.size
    dense = [[r.get(j, 0) for j in range(N)] for r in rows]
    bits = math.ceil(math.log2(N + 1)) + L * max(1, math.ceil(math.log2(D + 1))) + 2
    raw = traces_of_powers(dense, L, bits)
    return [Fraction(t, D**l) for l, t in enumerate(raw, start=1)]


def verify_spectrum_by_traces(K: TransitionMatrix, s: Spectrum, L: int | None = None) -> bool:
    """tr(K**l) == sum m_W lambda_W**l for l = 1..L (default L = #states)."""
    if s.total != K.size:
        return False
    L = K.size if L is None else L
    D, rows = K.integer_form()
    D = D * common_denominator(lam for lam, _ in s.pairs) // math.gcd(
        D, common_denominator(lam for lam, _ in s.pairs))
    N = K.size
    dense = [[0] * N for _ in range(N)]
    for i, r in enumerate(K.entries):
        for j, v in enumerate(r):
            if v:
                dense[i][j] = int(v * D)
    scaled = [(int(lam * D), m) for lam, m in s.pairs if m]
    bits = math.ceil(math.log2(N + 1)) + L * max(1, math.ceil(math.log2(D + 1))) + 2
    traces = traces_of_powers(dense, L, bits)
    for l, t in enumerate(traces, start=1):
        if t != sum(m * lam**l for lam, m in scaled):
            return False
    return True


def is_separating(w: FaceMeasure, target: Arrangement | None = None) -> bool:
    """Every hyperplane of ``target`` (default: w's arrangement) has a
    positive-weight face off it."""
    target = w.arr if target is None else target
    return all(any(not face_in_hyperplane(w.arr, F, H) for F in w.weights)
               for H in target.hyperplanes)


# --------------------------------------------------------------------------
# stationary distributions


def closed_classes(K: TransitionMatrix) -> list[list[int]]:
    """Closed communicating classes as sorted index lists."""
    D, rows = K.integer_form()
    N = K.size
    ri, ci = [], []
    for i, r in enumerate(rows):
        for j in r:
            ri.append(i)
            ci.append(j)
    graph = csr_matrix((np.ones(len(ri)), (ri, ci)), shape=(N, N))
    _, labels = connected_components(graph, directed=True, connection="strong")
    leaks = set()
    for i, j in zip(ri, ci):
        if labels[i] != labels[j]:
            leaks.add(labels[i])
    out: dict[int, list[int]] = {}
    for k, lab in enumerate(labels):
        if lab not in leaks:
            out.setdefault(int(lab), []).append(k)
    return sorted(out.values())


def stationary(K: TransitionMatrix) -> Distribution:
    """The unique stationary distribution, solved exactly.

    The support of a unique stationary law is the single closed class; the
    fraction-free solve is done on that class and the rest is zero.
    """
    classes = closed_classes(K)
    if len(classes) != 1:
        raise NonUniqueStationary(f"{len(classes)} closed classes; stationary law is not unique")
    cls = classes[0]
    D, rows = K.integer_form()
    pos = {i: k for k, i in enumerate(cls)}
    c = len(cls)
    # unknowns pi_C; equations sum_i pi_i (M_ij - D delta_ij) = 0 and sum pi = 1
    A = [[0] * c for _ in range(c)]
    for i in cls:
        for j, v in rows[i].items():
            A[pos[j]][pos[i]] += v
    for k in range(c):
        A[k][k] -= D
    A = A[:-1] + [[1] * c]
    b = [0] * (c - 1) + [1]
    try:
        x = bareiss_solve(A, b)
    except SingularSystem as e:  # pragma: no cover - closed class is irreducible
        raise NonUniqueStationary(str(e))
    probs = [ZERO_Q] * K.size
    for i in cls:
        probs[i] = x[pos[i]]
    return Distribution(list(K.states), probs)


def luce_stationary(weights: Sequence, n: int | None = None) -> Distribution:
    """Law of sampling [n] without replacement with probabilities ``weights``."""
    import itertools

    w = [as_fraction(x) for x in weights]
    n = len(w) if n is None else n
    if len(w) != n:
        raise InvalidMeasure("weight vector length differs from n")
    if any(x < 0 for x in w) or sum(w) != 1:
        raise InvalidMeasure("weights must be nonnegative and sum to 1")
    if sum(1 for x in w if x == 0) > 1:
        raise InvalidMeasure("at most one weight may vanish")
    perms = list(itertools.permutations(range(1, n + 1)))
    probs = []
    for tau in perms:
        p = ONE_Q
        used = ZERO_Q
        for k in range(n - 1):
            wi = w[tau[k] - 1]
            p *= wi / (1 - used)
            used += wi
            if p == 0:
                break
        probs.append(p)
    return Distribution(perms, probs)


def tv_distance(p: Distribution, q: Distribution) -> Fraction:
    if set(p.states) != set(q.states):
        raise ValueError("distributions live on different state spaces")
    return sum((abs(p[s] - q[s]) for s in p.states), ZERO_Q) / 2


# --------------------------------------------------------------------------
# bounds


def hyperplane_eigenvalues(w: FaceMeasure, target: Arrangement | None = None) -> list[Fraction]:
    target = w.arr if target is None else target
    return [sum((v for F, v in w.weights.items() if face_in_hyperplane(w.arr, F, H)), ZERO_Q)
            for H in target.hyperplanes]


def eigenvalue_bound(w: FaceMeasure, l: int, target: Arrangement | None = None) -> Fraction:
    """sum over hyperplanes H of target of lambda_H**l."""
    return sum((lam**l for lam in hyperplane_eigenvalues(w, target)), ZERO_Q)


def sample_faces(w: FaceMeasure, rng: np.random.Generator, size) -> np.ndarray:
    """Indices into ``w.support`` drawn i.i.d. from w."""
    p = np.array([float(v) for v in w.weights.values()])
    p /= p.sum()
    return rng.choice(len(p), size=size, p=p)


def _separation_masks(w: FaceMeasure, target: Arrangement) -> np.ndarray:
    masks = np.zeros(len(w.weights), dtype=np.int64)
    for k, F in enumerate(w.weights):
        m = 0
        for b, H in enumerate(target.hyperplanes):
            if not face_in_hyperplane(w.arr, F, H):
                m |= 1 << b
        masks[k] = m
    return masks


MC_BLOCK = 1024


def coupling_curve_mc(w: FaceMeasure, target: Arrangement | None, L: int, trials: int,
                      seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Estimates of P(T > l) for l = 0..L, T the first time every hyperplane
    of ``target`` is separated by the sampled faces, with standard errors.

    Trials run in blocks of MC_BLOCK; block b draws from the generator seeded
    by SeedSequence(seed, spawn_key=(b,)), so results do not depend on the
    order in which blocks are evaluated.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    target = w.arr if target is None else target
    h = len(target.hyperplanes)
    if h > 62:
        raise ValueError("too many hyperplanes for the bitmask estimator")
    full = (1 << h) - 1
    masks = _separation_masks(w, target)
    counts = np.zeros(L + 1, dtype=np.int64)
    for b in range(math.ceil(trials / MC_BLOCK)):
        size = min(MC_BLOCK, trials - b * MC_BLOCK)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        # one column per step, so a longer horizon extends the same draws
        acc = np.zeros(size, dtype=np.int64)
        for l in range(1, L + 1):
            acc |= masks[sample_faces(w, rng, size)]
            counts[l] += int((acc != full).sum())
        counts[0] += size if full else 0
    est = counts / trials
    smooth = (counts + 1) / (trials + 2)
    err = np.sqrt(smooth * (1 - smooth) / trials)
    return est, err


def coupling_bound_mc(w: FaceMeasure, target: Arrangement | None, l: int, trials: int,
                      seed: int) -> tuple[float, float]:
    est, err = coupling_curve_mc(w, target, l, trials, seed)
    return float(est[l]), float(err[l])


def exact_tv_curve(K: TransitionMatrix, start, L: int, pi: Distribution | None = None) -> list[Fraction]:
    """TV distance between K^l(start, .) and pi for l = 0..L."""
    pi = stationary(K) if pi is None else pi
    D, rows = K.integer_form()
    N = K.size
    Q = common_denominator(pi.probs)
    target = [int(p * Q) for p in (pi[s] for s in K.states)]
    v = {K.index[start]: 1}
    out = []
    scale = 1
    for l in range(L + 1):
        if l:
            nv: dict[int, int] = {}
            for i, a in v.items():
                for j, m in rows[i].items():
                    nv[j] = nv.get(j, 0) + a * m
            v = nv
            scale *= D
        s = sum(abs(v.get(j, 0) * Q - target[j] * scale) for j in range(N))
        out.append(Fraction(s, 2 * Q * scale))
    return out


def distribution_after(K: TransitionMatrix, start, l: int) -> Distribution:
    D, rows = K.integer_form()
    v = {K.index[start]: 1}
    for _ in range(l):
        nv: dict[int, int] = {}
        for i, a in v.items():
            for j, m in rows[i].items():
                nv[j] = nv.get(j, 0) + a * m
        v = nv
    scale = D**l
    return Distribution(list(K.states), [Fraction(v.get(j, 0), scale) for j in range(K.size)])


def simulate(w: FaceMeasure, start, steps: int, seed: int) -> list:
    """Trajectory [C_0, ..., C_steps] of the walk from ``start``."""
    arr = w.arr
    if not is_chamber(arr, start):
        raise ValueError(f"{start!r} is not a chamber of {arr}")
    C = _start_state(arr, start)
    rng = np.random.default_rng(seed)
    faces = w.support
    picks = sample_faces(w, rng, steps) if steps else []
    out = [C]
    for k in picks:
        C = project(arr, faces[k], C)
        out.append(C)
    return out
