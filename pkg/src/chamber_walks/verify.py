"""Invariant checks over the built-in corpus (backs ``chamber-walks verify``)."""

from __future__ import annotations

import itertools
import json
from fractions import Fraction
from importlib import resources
from typing import Callable, Iterable

import numpy as np

from . import models
from .arrangements import (
    Arrangement,
    Graph,
    enumerate_chambers,
    enumerate_faces,
    face_product,
    zaslavsky_check,
)
from .chainspec import Chain, ChainSpec, build_chain
from .induction import (
    dynkin_check,
    induced_measure,
    induced_transition_by_lumping,
    pushforward_stationary,
)
from .semigroup import BandWalk, brown_spectrum, face_semigroup, fixed_point_identity
from .walks import (
    FaceMeasure,
    build_transition,
    exact_tv_curve,
    spectrum,
    stationary,
    verify_spectrum_by_traces,
)

Result = tuple[str, bool, str]

TRACE_LIMIT = 128
TV_STEPS = 30


def random_measure(arr: Arrangement, rng: np.random.Generator, max_weight: int = 5,
                   density: float = 0.6) -> FaceMeasure:
    """Random rational measure: integer weights 0..max_weight on a random
    subset of faces, normalised.  Always puts weight on some face."""
    faces = enumerate_faces(arr)
    raw = {}
    for F in faces:
        if rng.random() < density:
            v = int(rng.integers(1, max_weight + 1))
            raw[F] = v
    if not raw:
        raw[faces[int(rng.integers(len(faces)))]] = 1
    total = sum(raw.values())
    return FaceMeasure(arr, {F: Fraction(v, total) for F, v in raw.items()})


def random_weights(n: int, rng: np.random.Generator, max_weight: int = 6,
                   positive: bool = True) -> list[Fraction]:
    lo = 1 if positive else 0
    raw = [int(rng.integers(lo, max_weight + 1)) for _ in range(n)]
    if sum(raw) == 0:
        raw[0] = 1
    return [Fraction(v, sum(raw)) for v in raw]


def corpus_specs() -> list[tuple[str, ChainSpec]]:
    out = []
    folder = resources.files("chamber_walks") / "corpus"
    for entry in sorted(folder.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            out.append((entry.name, ChainSpec.from_json(entry.read_text())))
    return out


def _check(name: str, fn: Callable[[], tuple[bool, str] | bool]) -> Result:
    try:
        r = fn()
    except Exception as e:  # a crash is a failed check with its reason
        return name, False, f"{type(e).__name__}: {e}"
    if isinstance(r, tuple):
        return name, bool(r[0]), r[1]
    return name, bool(r), ""


def verify_chain(chain: Chain, name: str | None = None, coupling_trials: int = 4000,
                 seed: int = 0) -> list[Result]:
    name = name or chain.name
    K = chain.K
    out = [
        _check(f"{name}: rows stochastic", K.check_stochastic),
        _check(f"{name}: multiplicities sum to #states", lambda: (
            chain.spectrum.total == K.size, f"{chain.spectrum.total} vs {K.size}")),
        _check(f"{name}: eigenvalues in [0,1]", lambda: all(0 <= l <= 1 for l, _ in chain.spectrum.pairs)),
    ]
    if K.size <= TRACE_LIMIT:
        out.append(_check(f"{name}: trace identity", lambda: verify_spectrum_by_traces(K, chain.spectrum)))
    if chain.pair is not None and chain.measure is not None and len(chain.pair.states_A) <= 720:
        out += _induction_checks(chain, name)
    if chain.separating:
        def bounds():
            pi = chain.stationary()
            tv = exact_tv_curve(K, chain.start, TV_STEPS, pi)
            est, err = chain.coupling(TV_STEPS, coupling_trials, seed)
            for l in range(TV_STEPS + 1):
                b = chain.eigen_bound(l)
                if tv[l] > b:
                    return False, f"l={l}: exact {float(tv[l])} > eigen bound {float(b)}"
                if float(tv[l]) > est[l] + 4 * err[l]:
                    return False, f"l={l}: exact {float(tv[l])} > coupling {est[l]} + 4*{err[l]}"
            return True, ""
        out.append(_check(f"{name}: stationary is one multiplicity-1 eigenvector",
                          lambda: chain.spectrum.multiplicity(1) == 1))
        out.append(_check(f"{name}: exact TV <= coupling <= eigen bound", bounds))
    return out


def _induction_checks(chain: Chain, name: str) -> list[Result]:
    pair, w = chain.pair, chain.measure
    K_A = build_transition(w)
    blocks = pair.blocks()
    res = [_check(f"{name}: Dynkin criterion over all representatives", lambda: dynkin_check(K_A, blocks))]

    def cross():
        lumped = induced_transition_by_lumping(pair, K_A)
        return lumped == build_transition(induced_measure(pair, w))
    res.append(_check(f"{name}: lumped matrix equals walk of induced measure", cross))
    if chain.separating and w is not None:
        from .walks import is_separating
        if is_separating(w):
            res.append(_check(f"{name}: pushed-forward stationary", lambda: (
                pushforward_stationary(pair, stationary(K_A)).probs
                == stationary(induced_transition_by_lumping(pair, K_A)).probs)))
    return res


def _arrangement_checks() -> list[Result]:
    out = []
    arrs = [Arrangement.boolean(n) for n in range(1, 4)] + [Arrangement.braid(n) for n in range(1, 5)]
    arrs += [Arrangement.graphical(G) for G in (Graph.complete(3), Graph.path(4), Graph.cycle(4), Graph.star(4))]
    for arr in arrs:
        out.append(_check(f"{arr}: Zaslavsky and fixed-chamber counts", lambda arr=arr: zaslavsky_check(arr)))
    for arr in (Arrangement.boolean(2), Arrangement.braid(3)):
        def axioms(arr=arr):
            faces = enumerate_faces(arr)
            for F, G in itertools.product(faces, repeat=2):
                FG = face_product(arr, F, G)
                if face_product(arr, FG, F) != FG:
                    return False, f"left-regularity fails at {F}, {G}"
                for H in faces:
                    if face_product(arr, FG, H) != face_product(arr, F, face_product(arr, G, H)):
                        return False, f"associativity fails at {F}, {G}, {H}"
            return True, ""
        out.append(_check(f"{arr}: face product is a left-regular band", axioms))
    return out


def _band_checks() -> list[Result]:
    out = []
    rng = np.random.default_rng(7)
    for arr in (Arrangement.boolean(2), Arrangement.boolean(3), Arrangement.braid(3)):
        w = random_measure(arr, rng)

        def same(arr=arr, w=w):
            band = face_semigroup(arr)
            walk = BandWalk.from_labels(band, w.weights)
            return brown_spectrum(walk).merged() == spectrum(w).merged() and fixed_point_identity(walk)
        out.append(_check(f"{arr}: band spectrum equals hyperplane spectrum", same))
    return out


def _generated_chains(quick: bool) -> Iterable[tuple[str, Chain]]:
    rng = np.random.default_rng(2024)
    sizes_bool = (2, 3) if quick else (2, 3, 4)
    for n in sizes_bool:
        w = random_measure(Arrangement.boolean(n), rng)
        K = build_transition(w)
        yield f"random Boolean({n})", Chain(f"random Boolean({n})", K, spectrum(w), K.states[0], w, w.arr,
                                             state_kind="signs")
    for n in ((3,) if quick else (3, 4)):
        w = random_measure(Arrangement.braid(n), rng)
        K = build_transition(w)
        yield f"random Braid({n})", Chain(f"random Braid({n})", K, spectrum(w), K.states[0], w, w.arr,
                                           state_kind="permutation")


def run_corpus(selector: str = "default") -> list[Result]:
    if selector not in ("default", "quick"):
        return [("corpus selector", False, f"unknown corpus {selector!r}; use 'default' or 'quick'")]
    quick = selector == "quick"
    results = _arrangement_checks() + _band_checks()
    for name, spec in corpus_specs():
        try:
            chain = build_chain(spec)
        except Exception as e:
            results.append((f"{name}: build", False, f"{type(e).__name__}: {e}"))
            continue
        results += verify_chain(chain, name, coupling_trials=2000 if quick else 4000)
    for name, chain in _generated_chains(quick):
        results += verify_chain(chain, name, coupling_trials=2000 if quick else 4000)
    return results


def verify_spec(spec: ChainSpec) -> list[Result]:
    return verify_chain(build_chain(spec))
