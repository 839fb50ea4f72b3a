"""Lumped walks on subarrangements."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

from .arrangements import (
    Arrangement,
    Graph,
    NotASubarrangement,
    containing_chamber,
    containing_face,
    count_acyclic_orientations,
    enumerate_chambers,
    face_in_flat,
    intersection_lattice,
    is_subarrangement,
)
from .walks import (
    Distribution,
    FaceMeasure,
    Spectrum,
    TransitionMatrix,
    ZERO_Q,
    build_transition,
)


class DynkinViolation(ValueError):
    pass


@dataclass
class SubarrangementPair:
    A: Arrangement
    B: Arrangement
    lump: dict
    states_A: list
    states_B: list

    @classmethod
    def build(cls, A: Arrangement, B: Arrangement, cap: int | None = None) -> "SubarrangementPair":
        if not is_subarrangement(A, B):
            raise NotASubarrangement(f"{B} is not a subarrangement of {A}")
        states_A = enumerate_chambers(A, cap)
        lump = {C: containing_chamber(A, B, C) for C in states_A}
        states_B = enumerate_chambers(B, cap)
        if set(lump.values()) != set(states_B):
            raise AssertionError("lump map is not onto the chambers of B")
        return cls(A, B, lump, states_A, states_B)

    def blocks(self) -> list[list]:
        """The fibres of the lump map, in the order of states_B."""
        out: dict = {D: [] for D in self.states_B}
        for C in self.states_A:
            out[self.lump[C]].append(C)
        return [out[D] for D in self.states_B]


def induced_measure(pair: SubarrangementPair, w: FaceMeasure) -> FaceMeasure:
    """w*(G) = sum of w(F) over faces F of A contained in the face G of B."""
    if w.arr != pair.A:
        raise ValueError("measure lives on a different arrangement")
    out: dict = {}
    for F, v in w.weights.items():
        G = containing_face(pair.A, pair.B, F)
        out[G] = out.get(G, ZERO_Q) + v
    return FaceMeasure(pair.B, out)


def block_masses(K: TransitionMatrix, blocks: Sequence[Sequence]) -> list[list[Fraction]]:
    """Q(C, block) for every state C (rows in K's state order)."""
    where = {}
    for b, blk in enumerate(blocks):
        for s in blk:
            where[K.index[s]] = b
    if len(where) != K.size:
        raise ValueError("blocks do not partition the state list")
    out = []
    for row in K.entries:
        acc = [ZERO_Q] * len(blocks)
        for j, v in enumerate(row):
            if v:
                acc[where[j]] += v
        out.append(acc)
    return out


def dynkin_check(K: TransitionMatrix, blocks: Sequence[Sequence]) -> bool:
    """Block-to-block mass is the same from every member of a source block."""
    masses = block_masses(K, blocks)
    for blk in blocks:
        rows = [masses[K.index[s]] for s in blk]
        if any(r != rows[0] for r in rows[1:]):
            return False
    return True


def dynkin_witness(K: TransitionMatrix, blocks: Sequence[Sequence]):
    """Two states of one block with different block masses, or None."""
    masses = block_masses(K, blocks)
    for blk in blocks:
        first = masses[K.index[blk[0]]]
        for s in blk[1:]:
            if masses[K.index[s]] != first:
                return blk[0], s
    return None


def lump_matrix(K: TransitionMatrix, blocks: Sequence[Sequence], labels: Sequence) -> TransitionMatrix:
    """Lumped chain using the first state of each block as representative."""
    bad = dynkin_witness(K, blocks)
    if bad is not None:
        raise DynkinViolation(f"states {bad[0]} and {bad[1]} give different block masses")
    masses = block_masses(K, blocks)
    return TransitionMatrix(list(labels), [masses[K.index[blk[0]]] for blk in blocks])


def induced_transition_by_lumping(pair: SubarrangementPair, K: TransitionMatrix) -> TransitionMatrix:
    if K.states != pair.states_A:
        raise ValueError("matrix is not indexed by the chambers of A")
    return lump_matrix(K, pair.blocks(), pair.states_B)


def induced_spectrum(pair: SubarrangementPair, w: FaceMeasure) -> Spectrum:
    """lambda_W from w on A, multiplicities |mu_B(V, W)| over the lattice of B."""
    lattice = intersection_lattice(pair.B)
    pairs = []
    for W in lattice:
        lam = sum((v for F, v in w.weights.items() if face_in_flat(pair.A, F, W.payload)), ZERO_Q)
        pairs.append((lam, W.eigen_mult))
    return Spectrum(pairs, [W.payload for W in lattice])


def pushforward_stationary(pair: SubarrangementPair, pi: Distribution) -> Distribution:
    acc = {D: ZERO_Q for D in pair.states_B}
    for C in pair.states_A:
        acc[pair.lump[C]] += pi[C]
    return Distribution(list(pair.states_B), [acc[D] for D in pair.states_B])


def induced_walk(pair: SubarrangementPair, w: FaceMeasure) -> TransitionMatrix:
    """Walk of the induced measure w* on the chambers of B."""
    return build_transition(induced_measure(pair, w))


# --------------------------------------------------------------------------
# acyclic-orientation multiplicities


def ao_multiplicity_inclusion_exclusion(G: Graph, S: Sequence[int]) -> int:
    """m_S = sum over S ⊆ T ⊆ [n] of (-1)^|T \\ S| #AO(G minus T)."""
    S = set(S)
    rest = [v for v in range(1, G.n + 1) if v not in S]
    total = 0
    for k in range(len(rest) + 1):
        for extra in itertools.combinations(rest, k):
            total += (-1) ** k * count_acyclic_orientations(G.delete_nodes(S | set(extra)))
    return total


def ao_multiplicities_bond_lattice(G: Graph) -> dict[frozenset, int]:
    """m_S grouped from the bond lattice: sum of |mu| over G-connected
    partitions whose singleton blocks are exactly S."""
    out: dict[frozenset, int] = {}
    for W in intersection_lattice(Arrangement.graphical(G)):
        S = frozenset(b[0] for b in W.payload if len(b) == 1)
        out[S] = out.get(S, 0) + W.eigen_mult
    return out
