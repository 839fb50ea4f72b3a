"""Walks on finite left-regular bands."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .arrangements import Arrangement, enumerate_faces, face_product
from .walks import Spectrum, TransitionMatrix, ZERO_Q, as_fraction


class BandAxiomError(ValueError):
    """A multiplication table violates a band axiom; ``witness`` names the elements."""

    def __init__(self, axiom: str, witness: tuple, detail: str):
        super().__init__(f"{axiom} fails at {witness}: {detail}")
        self.axiom = axiom
        self.witness = witness


class NotAnEpimorphism(ValueError):
    pass


@dataclass
class LeftRegularBand:
    labels: list
    table: np.ndarray

    @property
    def size(self) -> int:
        return len(self.labels)

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def index(self, label) -> int:
        return self.labels.index(label)

    def identity(self) -> int | None:
        idx = np.arange(self.size)
        for e in range(self.size):
            if (self.table[e] == idx).all() and (self.table[:, e] == idx).all():
                return e
        return None


def build_band(table, labels: Sequence | None = None) -> LeftRegularBand:
    """Validate a multiplication table as a left-regular band."""
    T = np.asarray(table, dtype=np.int64)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("table must be square")
    k = T.shape[0]
    if k == 0:
        raise ValueError("empty table")
    if T.min() < 0 or T.max() >= k:
        raise ValueError("table entries must be element indices")
    labels = list(range(k)) if labels is None else list(labels)
    if len(labels) != k:
        raise ValueError("one label per element is required")
    lab = lambda *xs: tuple(labels[x] for x in xs)  # noqa: E731
    d = T[np.arange(k), np.arange(k)]
    bad = np.nonzero(d != np.arange(k))[0]
    if bad.size:
        x = int(bad[0])
        raise BandAxiomError("idempotence", lab(x), f"x*x = {labels[int(d[x])]!r}")
    left = T[T, :]                      # left[x, y, z] = (xy)z
    right = T[:, T]                     # right[x, y, z] = x(yz)
    bad = np.argwhere(left != right)
    if bad.size:
        x, y, z = map(int, bad[0])
        raise BandAxiomError("associativity", lab(x, y, z),
                             f"(xy)z = {labels[int(left[x, y, z])]!r}, x(yz) = {labels[int(right[x, y, z])]!r}")
    xyx = T[T, np.arange(k)[:, None]]   # (xy)x
    bad = np.argwhere(xyx != T)
    if bad.size:
        x, y = map(int, bad[0])
        raise BandAxiomError("left-regularity", lab(x, y),
                             f"xyx = {labels[int(xyx[x, y])]!r}, xy = {labels[int(T[x, y])]!r}")
    return LeftRegularBand(labels, T)


def face_semigroup(arr: Arrangement, cap: int | None = None) -> LeftRegularBand:
    faces = enumerate_faces(arr, cap)
    index = {F: k for k, F in enumerate(faces)}
    T = [[index[face_product(arr, F, G)] for G in faces] for F in faces]
    return build_band(T, faces)


def left_zero_band(k: int) -> LeftRegularBand:
    return build_band([[x] * k for x in range(k)])


def direct_product(a: LeftRegularBand, b: LeftRegularBand) -> LeftRegularBand:
    labels = [(x, y) for x in a.labels for y in b.labels]
    nb = b.size
    T = [[a.mul(i // nb, j // nb) * nb + b.mul(i % nb, j % nb) for j in range(len(labels))]
         for i in range(len(labels))]
    return build_band(T, labels)


def adjoin_identity(band: LeftRegularBand) -> LeftRegularBand:
    """S with a new identity element appended (label ``"1"``)."""
    k = band.size
    T = np.empty((k + 1, k + 1), dtype=np.int64)
    T[:k, :k] = band.table
    T[k, :] = np.arange(k + 1)
    T[:, k] = np.arange(k + 1)
    return build_band(T, band.labels + ["1"])


# --------------------------------------------------------------------------
# support lattice


@dataclass
class SupportLattice:
    classes: list[list[int]]
    supp: list[int]
    leq: np.ndarray                 # leq[u, v]: u <= v
    join: np.ndarray
    top: int

    @property
    def size(self) -> int:
        return len(self.classes)

    def above(self, u: int) -> list[int]:
        return [v for v in range(self.size) if self.leq[u, v]]

    def mobius(self, u: int, v: int) -> int:
        return self._mobius_from(u).get(v, 0)

    def _mobius_from(self, u: int) -> dict[int, int]:
        cache = self.__dict__.setdefault("_mu", {})
        if u not in cache:
            up = sorted(self.above(u), key=lambda v: int(self.leq[:, v].sum()))
            mu: dict[int, int] = {}
            for v in up:
                mu[v] = 1 if v == u else -sum(mu[z] for z in mu if self.leq[z, v] and z != v)
            cache[u] = mu
        return cache[u]


def support_lattice(band: LeftRegularBand) -> SupportLattice:
    T = band.table
    k = band.size
    # le[x, y]: yx = y, i.e. supp x <= supp y
    le = T.T == np.arange(k)[None, :]
    classes: list[list[int]] = []
    supp = [-1] * k
    for x in range(k):
        if supp[x] >= 0:
            continue
        cls = [y for y in range(k) if le[x, y] and le[y, x]]
        for y in cls:
            supp[y] = len(classes)
        classes.append(cls)
    r = [c[0] for c in classes]
    n = len(classes)
    leq = np.array([[bool(le[r[u], r[v]]) for v in range(n)] for u in range(n)])
    # partial order sanity
    if not all(leq[u, u] for u in range(n)):
        raise ValueError("support relation is not reflexive")
    for u in range(n):
        for v in range(n):
            if u != v and leq[u, v] and leq[v, u]:
                raise ValueError("support relation is not antisymmetric")
    # order must not depend on representatives
    for u in range(n):
        for v in range(n):
            if any(bool(le[x, y]) != leq[u, v] for x in classes[u] for y in classes[v]):
                raise ValueError("support order depends on the representative")
    join = np.array([[supp[int(T[r[u], r[v]])] for v in range(n)] for u in range(n)],
                    dtype=np.int64)
    for x in range(k):
        for y in range(k):
            if supp[int(T[x, y])] != join[supp[x], supp[y]]:
                raise ValueError("supp(xy) is not a function of supp(x), supp(y)")
    for u in range(n):
        for v in range(n):
            j = join[u, v]
            ups = [z for z in range(n) if leq[u, z] and leq[v, z]]
            if not (leq[u, j] and leq[v, j] and all(leq[j, z] for z in ups)):
                raise ValueError("supp(xy) is not the join of supp(x) and supp(y)")
    tops = [u for u in range(n) if leq[:, u].all()]
    if len(tops) != 1:
        raise ValueError("support lattice has no maximum")
    return SupportLattice(classes, supp, leq, join, tops[0])


# --------------------------------------------------------------------------
# walks


@dataclass
class BandWalk:
    band: LeftRegularBand
    measure: Mapping[int, Fraction]
    lattice: SupportLattice = field(init=False)
    chambers: list[int] = field(init=False)

    def __post_init__(self):
        m = {}
        for x, v in dict(self.measure).items():
            v = as_fraction(v)
            if v < 0:
                raise ValueError("negative weight")
            if not 0 <= x < self.band.size:
                raise ValueError(f"{x} is not an element index")
            if v:
                m[int(x)] = v
        if sum(m.values(), ZERO_Q) != 1:
            raise ValueError("band measure must sum to 1")
        self.measure = dict(sorted(m.items()))
        self.lattice = support_lattice(self.band)
        top = self.lattice.top
        self.chambers = [x for x in range(self.band.size) if self.lattice.supp[x] == top]
        cs = set(self.chambers)
        T = self.band.table
        if any(int(T[x, c]) not in cs for x in range(self.band.size) for c in self.chambers):
            raise ValueError("chambers do not form a left ideal")
        # maximal elements of x <= y iff xy = y
        maximal = [x for x in range(self.band.size)
                   if all(int(T[x, y]) != y or x == y or int(T[y, x]) == x
                          for y in range(self.band.size))]
        if sorted(maximal) != self.chambers:
            raise ValueError("chambers are not the maximal elements")

    @classmethod
    def from_labels(cls, band: LeftRegularBand, measure: Mapping) -> "BandWalk":
        return cls(band, {band.index(k): v for k, v in measure.items()})


def band_walk_transition(walk: BandWalk) -> TransitionMatrix:
    """K(c, c') = sum of w(x) over x with xc = c'."""
    pos = {c: k for k, c in enumerate(walk.chambers)}
    T = walk.band.table
    rows = []
    for c in walk.chambers:
        row = [ZERO_Q] * len(pos)
        for x, v in walk.measure.items():
            row[pos[int(T[x, c])]] += v
        rows.append(row)
    return TransitionMatrix([walk.band.labels[c] for c in walk.chambers], rows)


def fixed_chambers(walk: BandWalk, x: int) -> int:
    T = walk.band.table
    return sum(1 for c in walk.chambers if int(T[x, c]) == c)


def brown_spectrum(walk: BandWalk) -> Spectrum:
    """lambda_u = sum of w(x) with supp x <= u; m_u = sum_{v >= u} mu(u, v) n(v).

    When the band has no identity one is adjoined with weight 0 first, so
    that the lattice has the bottom element the multiplicity formula needs.
    """
    band = walk.band
    if band.identity() is None:
        band = adjoin_identity(band)
        walk = BandWalk(band, walk.measure)
    L = walk.lattice
    nv = []
    for u, cls in enumerate(L.classes):
        counts = {fixed_chambers(walk, x) for x in cls}
        if len(counts) != 1:
            raise AssertionError(f"fixed-chamber count depends on the representative of class {u}")
        nv.append(counts.pop())
    pairs, labels = [], []
    for u in range(L.size):
        lam = sum((v for x, v in walk.measure.items() if L.leq[L.supp[x], u]), ZERO_Q)
        mu = L._mobius_from(u)
        mult = sum(mu[v] * nv[v] for v in mu)
        pairs.append((lam, mult))
        labels.append(band.labels[L.classes[u][0]])
    return Spectrum(pairs, labels)


def fixed_point_identity(walk: BandWalk) -> bool:
    """#{c : xc = c} equals the sum of m_u over u >= supp(x), for every x."""
    s = brown_spectrum(walk)
    band = walk.band if walk.band.identity() is not None else adjoin_identity(walk.band)
    w2 = BandWalk(band, walk.measure)
    L = w2.lattice
    for x in range(walk.band.size):
        u = L.supp[x]
        if fixed_chambers(w2, x) != sum(s.pairs[v][1] for v in range(L.size) if L.leq[u, v]):
            return False
    return True


def generated_subsemigroup(band: LeftRegularBand, gens: Sequence[int]) -> set[int]:
    out = set(int(g) for g in gens)
    frontier = set(out)
    T = band.table
    while frontier:
        new = set()
        for x in out:
            for y in frontier:
                for z in (int(T[x, y]), int(T[y, x])):
                    if z not in out:
                        new.add(z)
        out |= new
        frontier = new
    return out


def support_generates(walk: BandWalk) -> bool:
    """Whether {x : w(x) > 0} generates the whole band."""
    return len(generated_subsemigroup(walk.band, list(walk.measure))) == walk.band.size


def epimorphism_induced_walk(phi: Sequence[int], walk_a: BandWalk, band_b: LeftRegularBand):
    """Push a walk forward along a surjective homomorphism ``phi`` (as an index list).

    Returns ``(walk_b, blocks)`` where ``blocks`` lists, for each chamber of B,
    the labels of the chambers of A mapped onto it.
    """
    A = walk_a.band
    phi = [int(p) for p in phi]
    if len(phi) != A.size or any(not 0 <= p < band_b.size for p in phi):
        raise NotAnEpimorphism("phi must map every element of A to an element of B")
    if set(phi) != set(range(band_b.size)):
        missing = sorted(set(range(band_b.size)) - set(phi))
        raise NotAnEpimorphism(f"phi is not surjective; misses {band_b.labels[missing[0]]!r}")
    TA, TB = A.table, band_b.table
    for x in range(A.size):
        for y in range(A.size):
            if phi[int(TA[x, y])] != int(TB[phi[x], phi[y]]):
                raise NotAnEpimorphism(f"phi(xy) != phi(x)phi(y) at {(A.labels[x], A.labels[y])}")
    m: dict[int, Fraction] = {}
    for x, v in walk_a.measure.items():
        m[phi[x]] = m.get(phi[x], ZERO_Q) + v
    walk_b = BandWalk(band_b, m)
    image = {phi[c] for c in walk_a.chambers}
    if image != set(walk_b.chambers):
        raise AssertionError("phi does not carry chambers onto chambers")
    blocks = [[A.labels[c] for c in walk_a.chambers if phi[c] == d] for d in walk_b.chambers]
    return walk_b, blocks
