"""Boolean, braid and graphical arrangements.

Faces are plain tuples:

* Boolean kinds: a sign vector over the arrangement's coordinates, entries
  in {-1, 0, 1}.  A sign vector with no zero is a chamber.
* Braid: an ordered set partition, a tuple of ascending tuples.  Chambers
  are permutations in one-line notation (a flat tuple of ints); the
  all-singletons partition is accepted wherever a chamber is expected.
* Graphical: a sign vector over the edges of the graph.  For an edge
  ``(i, j)`` with ``i < j`` the sign is ``+1`` when ``i`` precedes ``j``
  (the edge points ``j -> i``), ``-1`` when ``j`` precedes ``i`` and ``0``
  when they lie in a common block.
"""

from __future__ import annotations

import itertools
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

MINUS, ZERO, PLUS = -1, 0, 1

DEFAULT_FACE_CAP = 3**13
DEFAULT_CHAMBER_CAP = math.factorial(8)
CAP_ENV = "CHAMBER_WALKS_CAP"


class CapExceeded(ValueError):
    """An enumeration would exceed the configured cap."""


class NotAFace(ValueError):
    pass


class NotASubarrangement(ValueError):
    pass


_cap_override: list[int | None] = [None, None]


@contextmanager
def caps(faces: int | None = None, chambers: int | None = None):
    """Temporarily override the enumeration caps (None keeps the current value)."""
    saved = list(_cap_override)
    if faces is not None:
        _cap_override[0] = int(faces)
    if chambers is not None:
        _cap_override[1] = int(chambers)
    try:
        yield
    finally:
        _cap_override[:] = saved


def default_caps() -> tuple[int, int]:
    """Return ``(face_cap, chamber_cap)``.

    Overrides from ``caps()`` win; otherwise ``CHAMBER_WALKS_CAP`` may hold
    one integer (used for both) or ``FACES,CHAMBERS``.
    """
    env = _env_caps()
    return tuple(o if o is not None else e for o, e in zip(_cap_override, env))


def _env_caps() -> tuple[int, int]:
    raw = os.environ.get(CAP_ENV, "").strip()
    if not raw:
        return DEFAULT_FACE_CAP, DEFAULT_CHAMBER_CAP
    parts = [p.strip() for p in raw.split(",")]
    try:
        if len(parts) == 1:
            v = int(parts[0])
            return v, v
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"{CAP_ENV} must be an integer or 'FACES,CHAMBERS', got {raw!r}")


def check_cap(count: int, cap: int | None, what: str, index: int) -> None:
    if cap is None:
        cap = default_caps()[index]
    if count > cap:
        raise CapExceeded(f"{what}: {count} exceeds cap {cap}")


# --------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class Graph:
    """Simple graph on nodes 1..n; edges stored as sorted ``(min, max)`` pairs."""

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        norm = []
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError(f"loop at node {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge {e} outside nodes 1..{self.n}")
            norm.append((min(i, j), max(i, j)))
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple(itertools.combinations(range(1, n + 1), 2)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, tuple((i, i + 1) for i in range(1, n)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ValueError("a cycle needs at least 3 nodes")
        return cls(n, tuple((i, i % n + 1) for i in range(1, n + 1)))

    @classmethod
    def star(cls, n: int, m: int | None = None) -> "Graph":
        """Edges ``{i, n}`` for ``1 <= i <= m`` (default ``m = n - 1``)."""
        m = n - 1 if m is None else m
        if not 0 <= m <= n - 1:
            raise ValueError("need 0 <= m <= n - 1")
        return cls(n, tuple((i, n) for i in range(1, m + 1)))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, ())

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> set[int]:
        return {j if i == v else i for i, j in self.edges if v in (i, j)}

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def closed_neighborhood(self, v: int) -> set[int]:
        return self.neighbors(v) | {v}

    def isolated(self) -> list[int]:
        used = {x for e in self.edges for x in e}
        return [v for v in range(1, self.n + 1) if v not in used]

    def delete_nodes(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph on the remaining nodes, relabelled 1..n' in order."""
        gone = set(nodes)
        keep = [v for v in range(1, self.n + 1) if v not in gone]
        relabel = {v: k + 1 for k, v in enumerate(keep)}
        edges = tuple((relabel[i], relabel[j]) for i, j in self.edges
                      if i in relabel and j in relabel)
        return Graph(len(keep), edges)

    def is_connected_on(self, block: Iterable[int]) -> bool:
        block = set(block)
        if len(block) <= 1:
            return True
        start = next(iter(block))
        seen = {start}
        stack = [start]
        adj = {v: set() for v in block}
        for i, j in self.edges:
            if i in block and j in block:
                adj[i].add(j)
                adj[j].add(i)
        while stack:
            v = stack.pop()
            for u in adj[v] - seen:
                seen.add(u)
                stack.append(u)
        return seen == block


# --------------------------------------------------------------------------
# arrangements


@dataclass(frozen=True)
class Arrangement:
    """One of Boolean(n), BooleanSub(n, S), Braid(n), Graphical(G)."""

    kind: str
    n: int
    coords: tuple[int, ...] = ()
    graph: Graph | None = field(default=None)

    def __post_init__(self):
        if self.kind not in ("boolean", "boolean_sub", "braid", "graphical"):
            raise ValueError(f"unknown arrangement kind {self.kind!r}")
        if self.n < 0:
            raise ValueError("negative dimension")
        if self.kind == "boolean":
            object.__setattr__(self, "coords", tuple(range(1, self.n + 1)))
        elif self.kind == "boolean_sub":
            cs = tuple(sorted(set(self.coords)))
            if any(not 1 <= c <= self.n for c in cs):
                raise ValueError(f"coordinates {cs} outside 1..{self.n}")
            object.__setattr__(self, "coords", cs)
        elif self.kind == "graphical":
            if self.graph is None or self.graph.n != self.n:
                raise ValueError("graphical arrangement needs a graph on n nodes")

    @classmethod
    def boolean(cls, n: int) -> "Arrangement":
        return cls("boolean", n)

    @classmethod
    def boolean_sub(cls, n: int, coords: Iterable[int]) -> "Arrangement":
        return cls("boolean_sub", n, tuple(coords))

    @classmethod
    def braid(cls, n: int) -> "Arrangement":
        return cls("braid", n)

    @classmethod
    def graphical(cls, graph: Graph) -> "Arrangement":
        return cls("graphical", graph.n, (), graph)

    @property
    def is_boolean(self) -> bool:
        return self.kind in ("boolean", "boolean_sub")

    @property
    def sign_length(self) -> int:
        """Length of face sign vectors (not meaningful for braid)."""
        if self.is_boolean:
            return len(self.coords)
        if self.kind == "graphical":
            return self.graph.m
        raise TypeError("braid faces are ordered partitions")

    @property
    def hyperplanes(self) -> tuple:
        """Coordinates ``i`` (Boolean kinds) or pairs ``(i, j)`` (braid, graphical)."""
        if self.is_boolean:
            return self.coords
        if self.kind == "braid":
            return tuple(itertools.combinations(range(1, self.n + 1), 2))
        return self.graph.edges

    def __str__(self):
        if self.kind == "boolean":
            return f"Boolean({self.n})"
        if self.kind == "boolean_sub":
            return f"BooleanSub({self.n}, {set(self.coords) or '{}'})"
        if self.kind == "braid":
            return f"Braid({self.n})"
        return f"Graphical(n={self.n}, edges={list(self.graph.edges)})"


# --------------------------------------------------------------------------
# face validation and helpers


def is_permutation(x, n: int) -> bool:
    return (isinstance(x, tuple) and len(x) == n
            and all(isinstance(v, int) for v in x) and sorted(x) == list(range(1, n + 1)))


def is_ordered_partition(x, n: int) -> bool:
    if not isinstance(x, tuple) or not all(isinstance(b, tuple) and b for b in x):
        return False
    flat = [v for b in x for v in b]
    return sorted(flat) == list(range(1, n + 1)) and all(list(b) == sorted(b) for b in x)


def canonical_partition(blocks: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    """Sort within each block, keep the block order."""
    return tuple(tuple(sorted(b)) for b in blocks)


def _sign_vector(x, length: int) -> bool:
    return (isinstance(x, tuple) and len(x) == length
            and all(v in (MINUS, ZERO, PLUS) for v in x))


def _zero_components(arr: Arrangement, F: tuple) -> list[set[int]]:
    """Components of the graph formed by the zero edges of a graphical face."""
    parent = list(range(arr.n + 1))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for (i, j), s in zip(arr.graph.edges, F):
        if s == ZERO:
            parent[find(i)] = find(j)
    comps: dict[int, set[int]] = {}
    for v in range(1, arr.n + 1):
        comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def _is_acyclic_digraph(nodes: Iterable, arcs: Iterable[tuple]) -> bool:
    nodes = list(nodes)
    indeg = {v: 0 for v in nodes}
    out: dict = {v: [] for v in nodes}
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    queue = [v for v in nodes if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for u in out[v]:
            indeg[u] -= 1
            if indeg[u] == 0:
                queue.append(u)
    return seen == len(nodes)


def orientation_arcs(graph: Graph, signs: Sequence[int]) -> list[tuple[int, int]]:
    """Directed arcs ``(tail, head)`` of an edge-sign vector (zeros skipped)."""
    arcs = []
    for (i, j), s in zip(graph.edges, signs):
        if s == PLUS:
            arcs.append((j, i))
        elif s == MINUS:
            arcs.append((i, j))
    return arcs


def is_acyclic_orientation(graph: Graph, signs: Sequence[int]) -> bool:
    return _is_acyclic_digraph(range(1, graph.n + 1), orientation_arcs(graph, signs))


def is_face(arr: Arrangement, F) -> bool:
    if arr.is_boolean:
        return _sign_vector(F, len(arr.coords))
    if arr.kind == "braid":
        return is_permutation(F, arr.n) or is_ordered_partition(F, arr.n)
    if not _sign_vector(F, arr.graph.m):
        return False
    comps = _zero_components(arr, F)
    where = {v: k for k, c in enumerate(comps) for v in c}
    arcs = []
    for (i, j), s in zip(arr.graph.edges, F):
        if s != ZERO:
            if where[i] == where[j]:
                return False
            arcs.append((where[j], where[i]) if s == PLUS else (where[i], where[j]))
    return _is_acyclic_digraph(range(len(comps)), arcs)


def is_chamber(arr: Arrangement, F) -> bool:
    if arr.kind == "braid":
        return is_permutation(F, arr.n) or (
            is_ordered_partition(F, arr.n) and all(len(b) == 1 for b in F))
    return is_face(arr, F) and ZERO not in F


def as_permutation(F) -> tuple[int, ...]:
    """Braid chamber in either form -> one-line permutation."""
    if F and isinstance(F[0], tuple):
        if any(len(b) != 1 for b in F):
            raise NotAFace(f"{F} is not a chamber")
        return tuple(b[0] for b in F)
    return tuple(F)


def _require_face(arr: Arrangement, F) -> None:
    if not is_face(arr, F):
        raise NotAFace(f"{F!r} is not a face of {arr}")


def face_product(arr: Arrangement, F, G):
    """The product ``FG``; for a chamber ``G`` this is the Tits projection.

    Sign-vector kinds take F's coordinate when nonzero, else G's.  For the
    braid arrangement each block of F is split by the ordered blocks of G it
    meets.  A braid chamber given as a permutation yields a permutation.
    """
    _require_face(arr, F)
    _require_face(arr, G)
    if arr.kind != "braid":
        return tuple(f if f != ZERO else g for f, g in zip(F, G))
    return _braid_product(F, G)


def _braid_product(F, G):
    perm_out = not (G and isinstance(G[0], tuple))
    if perm_out:
        rank = {v: k for k, v in enumerate(G)}
    else:
        rank = {v: k for k, b in enumerate(G) for v in b}
    if F and not isinstance(F[0], tuple):
        F = tuple((v,) for v in F)
    if perm_out:
        return tuple(v for b in F for v in sorted(b, key=rank.__getitem__))
    out = []
    for b in F:
        groups: dict[int, list[int]] = {}
        for v in b:
            groups.setdefault(rank[v], []).append(v)
        out.extend(tuple(sorted(groups[k])) for k in sorted(groups))
    return tuple(out)


def project(arr: Arrangement, F, C):
    """Move chamber ``C`` by face ``F`` (no validation; used on hot paths)."""
    if arr.kind != "braid":
        return tuple(f if f != ZERO else c for f, c in zip(F, C))
    rank = {v: k for k, v in enumerate(C)}
    return tuple(v for b in F for v in sorted(b, key=rank.__getitem__))


def face_in_hyperplane(arr: Arrangement, F, H) -> bool:
    """Whether face F lies in hyperplane H of ``arr`` (H as in ``arr.hyperplanes``)."""
    if arr.is_boolean:
        return F[arr.coords.index(H)] == ZERO
    i, j = H
    if arr.kind == "braid":
        if F and not isinstance(F[0], tuple):
            return False
        return any(i in b and j in b for b in F)
    return F[arr.graph.edges.index(H)] == ZERO


def face_in_flat(arr: Arrangement, F, payload) -> bool:
    """Whether face F lies in the intersection subspace with the given payload."""
    if arr.is_boolean:
        pos = {c: k for k, c in enumerate(arr.coords)}
        return all(F[pos[i]] == ZERO for i in payload)
    if arr.kind == "braid":
        if F and not isinstance(F[0], tuple):
            F = tuple((v,) for v in F)
        where = {v: k for k, b in enumerate(F) for v in b}
    else:
        where = {v: k for k, c in enumerate(_zero_components(arr, F)) for v in c}
    return all(len({where[v] for v in block}) == 1 for block in payload)


# --------------------------------------------------------------------------
# enumeration


def set_partitions(items: Sequence[int]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All set partitions of ``items``; blocks ascending, ordered by least element."""
    items = list(items)
    if not items:
        yield ()
        return

    def rec(k: int, blocks: list[list[int]]):
        if k == len(items):
            yield tuple(tuple(b) for b in blocks)
            return
        x = items[k]
        for b in blocks:
            b.append(x)
            yield from rec(k + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from rec(k + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def ordered_set_partitions(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    for p in set_partitions(range(1, n + 1)):
        for perm in itertools.permutations(p):
            yield perm


@lru_cache(maxsize=None)
def fubini(n: int) -> int:
    """Number of ordered set partitions of an n-set."""
    if n == 0:
        return 1
    return sum(math.comb(n, k) * fubini(n - k) for k in range(1, n + 1))


def enumerate_faces(arr: Arrangement, cap: int | None = None) -> list:
    """All faces in a fixed order.

    Graphical faces are obtained as the images of braid faces (they are the
    edge-sign vectors that some ordered partition induces).
    """
    if arr.is_boolean:
        k = len(arr.coords)
        check_cap(3**k, cap, f"faces of {arr}", 0)
        return list(itertools.product((MINUS, ZERO, PLUS), repeat=k))
    check_cap(fubini(arr.n), cap, f"faces of {arr}", 0)
    braid = sorted(ordered_set_partitions(arr.n), key=lambda p: (len(p), p))
    if arr.kind == "braid":
        return braid
    return sorted({containing_face(Arrangement.braid(arr.n), arr, F) for F in braid})


def enumerate_chambers(arr: Arrangement, cap: int | None = None) -> list:
    """Chambers in canonical (lex) order; this order indexes every matrix."""
    if arr.is_boolean:
        k = len(arr.coords)
        check_cap(2**k, cap, f"chambers of {arr}", 1)
        return list(itertools.product((MINUS, PLUS), repeat=k))
    if arr.kind == "braid":
        check_cap(math.factorial(arr.n), cap, f"chambers of {arr}", 1)
        return list(itertools.permutations(range(1, arr.n + 1)))
    g = arr.graph
    work = min(2**g.m, math.factorial(g.n))
    check_cap(work, cap, f"chambers of {arr} (enumeration work)", 1)
    if 2**g.m <= math.factorial(g.n):
        return [s for s in itertools.product((MINUS, PLUS), repeat=g.m)
                if is_acyclic_orientation(g, s)]
    braid = Arrangement.braid(g.n)
    return sorted({containing_chamber(braid, arr, t)
                   for t in itertools.permutations(range(1, g.n + 1))})


# --------------------------------------------------------------------------
# subarrangements


def is_subarrangement(A: Arrangement, B: Arrangement) -> bool:
    if A.n != B.n:
        return False
    if A.is_boolean and B.is_boolean:
        return set(B.coords) <= set(A.coords)
    if A.kind in ("braid", "graphical") and B.kind in ("braid", "graphical"):
        if B.kind == "braid":
            return A.kind == "braid"
        return set(B.graph.edges) <= set(A.hyperplanes)
    return False


def _require_sub(A: Arrangement, B: Arrangement) -> None:
    if not is_subarrangement(A, B):
        raise NotASubarrangement(f"{B} is not a subarrangement of {A}")


def containing_face(A: Arrangement, B: Arrangement, F):
    """The unique face of subarrangement B containing the face F of A."""
    _require_sub(A, B)
    if A == B:
        return F
    if A.is_boolean:
        pos = {c: k for k, c in enumerate(A.coords)}
        return tuple(F[pos[c]] for c in B.coords)
    if A.kind == "graphical":
        pos = {e: k for k, e in enumerate(A.graph.edges)}
        return tuple(F[pos[e]] for e in B.graph.edges)
    if F and isinstance(F[0], tuple):
        where = {v: k for k, b in enumerate(F) for v in b}
    else:
        where = {v: k for k, v in enumerate(F)}
    out = []
    for i, j in B.graph.edges:
        a, b = where[i], where[j]
        out.append(PLUS if a < b else MINUS if a > b else ZERO)
    return tuple(out)


def containing_chamber(A: Arrangement, B: Arrangement, C):
    """The unique chamber of B containing chamber C of A."""
    if A.kind == "braid" and A == B:
        return as_permutation(C)
    return containing_face(A, B, C)


# --------------------------------------------------------------------------
# intersection lattice


@dataclass(frozen=True)
class IntersectionElement:
    payload: tuple
    codim: int
    mobius: int

    @property
    def eigen_mult(self) -> int:
        return abs(self.mobius)


def refines(sigma, tau) -> bool:
    """Whether partition sigma refines tau (sigma <= tau in the lattice)."""
    where = {v: k for k, b in enumerate(tau) for v in b}
    return all(len({where[v] for v in b}) == 1 for b in sigma)


def mobius_from_bottom(elements: Sequence, leq) -> list[int]:
    """Möbius values mu(bottom, x) for ``elements`` listed in a linear extension.

    ``elements[0]`` must be the minimum.  Uses mu(b, b) = 1 and
    sum_{b <= y <= x} mu(b, y) = 0 for x > b.
    """
    mu = [0] * len(elements)
    mu[0] = 1
    for k in range(1, len(elements)):
        x = elements[k]
        mu[k] = -sum(mu[j] for j in range(k) if leq(elements[j], x))
    return mu


def _partition_mobius(p) -> int:
    out = 1
    for b in p:
        out *= (-1) ** (len(b) - 1) * math.factorial(len(b) - 1)
    return out


def intersection_lattice(arr: Arrangement) -> list[IntersectionElement]:
    """The intersection poset with mu(V, W) for every element W.

    Boolean payloads are subsets (sorted tuples) of the coordinates;
    braid/graphical payloads are set partitions of [n] (G-connected ones for
    a graphical arrangement).  Ordered by codimension, then payload.
    """
    if arr.is_boolean:
        out = []
        for k in range(len(arr.coords) + 1):
            for S in itertools.combinations(arr.coords, k):
                out.append(IntersectionElement(S, k, (-1) ** k))
        return out
    parts = list(set_partitions(range(1, arr.n + 1)))
    if arr.kind == "graphical":
        parts = [p for p in parts if all(arr.graph.is_connected_on(b) for b in p)]
    parts.sort(key=lambda p: (arr.n - len(p), p))
    if arr.kind == "braid":
        mus = [_partition_mobius(p) for p in parts]
    else:
        mus = mobius_from_bottom(parts, refines)
    return [IntersectionElement(p, arr.n - len(p), mu) for p, mu in zip(parts, mus)]


def zaslavsky_check(arr: Arrangement, faces: bool = True) -> bool:
    """Sum of |mu| equals #chambers, and #{C : FC = C} = sum_{W ⊇ F} m_W per face."""
    lattice = intersection_lattice(arr)
    chambers = enumerate_chambers(arr)
    if sum(W.eigen_mult for W in lattice) != len(chambers):
        return False
    if not faces:
        return True
    for F in enumerate_faces(arr):
        fixed = sum(1 for C in chambers if project(arr, F, C) == C)
        if fixed != sum(W.eigen_mult for W in lattice if face_in_flat(arr, F, W.payload)):
            return False
    return True


# --------------------------------------------------------------------------
# chromatic polynomial


def chromatic_polynomial(graph: Graph) -> list[int]:
    """Coefficients ``[c_0, ..., c_n]`` of q^n, ..., q^0 by deletion–contraction."""
    asc = _chromatic(graph.n, frozenset(graph.edges))
    asc = list(asc) + [0] * (graph.n + 1 - len(asc))
    return asc[::-1]


@lru_cache(maxsize=None)
def _chromatic(k: int, edges: frozenset) -> tuple[int, ...]:
    # ascending coefficients; k = number of vertices
    if not edges:
        return (0,) * k + (1,)
    e = max(edges)
    u, v = e
    rest = edges - {e}
    deleted = _chromatic(k, rest)
    merged = set()
    for a, b in rest:
        a = u if a == v else a
        b = u if b == v else b
        if a != b:
            merged.add((min(a, b), max(a, b)))
    contracted = _chromatic(k - 1, frozenset(merged))
    size = max(len(deleted), len(contracted))
    d = list(deleted) + [0] * (size - len(deleted))
    c = list(contracted) + [0] * (size - len(contracted))
    return tuple(x - y for x, y in zip(d, c))


def evaluate_polynomial(coeffs_desc: Sequence[int], q):
    out = 0
    for c in coeffs_desc:
        out = out * q + c
    return out


def count_acyclic_orientations(graph: Graph) -> int:
    """#AO(G) = |chi_G(-1)|; the graph with no nodes has one."""
    return abs(evaluate_polynomial(chromatic_polynomial(graph), -1))
