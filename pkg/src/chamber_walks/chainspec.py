"""JSON chain specifications and the chains they describe."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np
from jsonschema import Draft202012Validator

from . import models
from .arrangements import (
    Arrangement,
    Graph,
    NotAFace,
    as_permutation,
    caps,
    containing_chamber,
    is_chamber,
)
from .induction import SubarrangementPair, induced_measure, induced_spectrum
from .semigroup import BandWalk, adjoin_identity, band_walk_transition, brown_spectrum, build_band
from .walks import (
    Distribution,
    FaceMeasure,
    InvalidMeasure,
    Spectrum,
    TransitionMatrix,
    ZERO_Q,
    build_transition,
    coupling_curve_mc,
    eigenvalue_bound,
    is_separating,
    spectrum,
    stationary,
)


class SpecError(ValueError):
    """Invalid chain spec; ``path`` is a JSON pointer into the document."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
        self.message = message


RATIONAL = {
    "oneOf": [
        {"type": "integer", "minimum": 0},
        {"type": "string", "pattern": r"^\s*\d+\s*(/\s*\d+\s*)?$"},
    ]
}

GRAPH = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "n": {"type": "integer", "minimum": 0},
                "edges": {"type": "array", "items": {
                    "type": "array", "items": {"type": "integer", "minimum": 1},
                    "minItems": 2, "maxItems": 2}},
            },
            "required": ["n", "edges"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "family": {"enum": ["complete", "path", "cycle", "star", "empty"]},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 0},
            },
            "required": ["family", "n"],
            "additionalProperties": False,
        },
    ],
}

ARRANGEMENT = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["boolean", "boolean_sub", "braid", "graphical"]},
        "n": {"type": "integer", "minimum": 0},
        "coords": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "graph": {"$ref": "#/$defs/graph"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

BASE = {
    "type": "object",
    "properties": {
        "name": {"enum": ["tsetlin", "a_shuffle"]},
        "weights": {"type": "array", "items": {"$ref": "#/$defs/rational"}},
        "a": {"type": "integer", "minimum": 2},
    },
    "required": ["name"],
    "additionalProperties": False,
}

MODEL_NAMES = ["tsetlin", "a_shuffle", "nearest_neighbor", "ehrenfest", "neighborhood_attack",
               "orientation", "ao", "top_k", "tagged_preceders", "descent_set",
               "cyclic_descent_set"]

MODEL = {
    "type": "object",
    "properties": {
        "name": {"enum": MODEL_NAMES},
        "n": {"type": "integer", "minimum": 1},
        "a": {"type": "integer", "minimum": 2},
        "k": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 0},
        "weights": {"type": "array", "items": {"oneOf": [
            {"$ref": "#/$defs/rational"},
            {"type": "array", "items": {"$ref": "#/$defs/rational"}, "minItems": 2, "maxItems": 2},
        ]}},
        "graph": {"$ref": "#/$defs/graph"},
        "base": {"$ref": "#/$defs/base"},
    },
    "required": ["name"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "$defs": {"rational": RATIONAL, "graph": GRAPH, "arrangement": ARRANGEMENT,
              "base": BASE, "model": MODEL},
    "properties": {
        "name": {"type": "string"},
        "arrangement": {"$ref": "#/$defs/arrangement"},
        "measure": {
            "type": "object",
            "properties": {"faces": {"type": "array", "items": {
                "type": "object",
                "properties": {"face": {"type": "array"}, "weight": {"$ref": "#/$defs/rational"}},
                "required": ["face", "weight"],
                "additionalProperties": False,
            }}},
            "required": ["faces"],
            "additionalProperties": False,
        },
        "model": {"$ref": "#/$defs/model"},
        "subarrangement": {"$ref": "#/$defs/arrangement"},
        "band": {
            "type": "object",
            "properties": {
                "elements": {"type": "array", "minItems": 1},
                "table": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                "measure": {"type": "object", "additionalProperties": {"$ref": "#/$defs/rational"}},
            },
            "required": ["elements", "table", "measure"],
            "additionalProperties": False,
        },
        "start": {},
        "steps": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "caps": {
            "type": "object",
            "properties": {"faces": {"type": "integer", "minimum": 1},
                           "chambers": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
    },
    "oneOf": [
        {"required": ["arrangement", "measure"], "not": {"anyOf": [{"required": ["model"]}, {"required": ["band"]}]}},
        {"required": ["model"], "not": {"anyOf": [{"required": ["measure"]}, {"required": ["band"]}]}},
        {"required": ["band"], "not": {"anyOf": [{"required": ["arrangement"]}, {"required": ["model"]},
                                                 {"required": ["measure"]}, {"required": ["subarrangement"]}]}},
    ],
    "additionalProperties": False,
}

_VALIDATOR = Draft202012Validator(SCHEMA)


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def parse_rational(x, path: str = "") -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise SpecError(path, f"rationals must be integers or 'p/q' strings, got {x!r}")
    try:
        q = Fraction(x.replace(" ", "")) if isinstance(x, str) else Fraction(int(x))
    except (ValueError, ZeroDivisionError):
        raise SpecError(path, f"not a rational: {x!r}")
    if q < 0:
        raise SpecError(path, "weights must be nonnegative")
    return q


def render_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def validate(doc: Any) -> None:
    """Raise SpecError for the first schema violation (deepest path first)."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (-len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        best = e
        # descend into oneOf branches for a more specific message
        while best.context:
            best = sorted(best.context, key=lambda c: -len(c.absolute_path))[0]
        path = best.absolute_path if len(best.absolute_path) >= len(e.absolute_path) else e.absolute_path
        raise SpecError(_pointer(path), best.message)


def _canonical(doc):
    """Rationals rendered canonically; used for equivalence of specs."""
    def walk(x, key=None):
        if isinstance(x, dict):
            return {k: walk(v, k) for k, v in sorted(x.items())}
        if isinstance(x, list):
            return [walk(v, key) for v in x]
        if key in ("weight", "weights") and isinstance(x, (str, int)) and not isinstance(x, bool):
            return render_rational(Fraction(x.replace(" ", "")) if isinstance(x, str) else Fraction(x))
        return x
    out = walk(doc)
    if "band" in out:
        out["band"]["measure"] = {k: render_rational(Fraction(str(v).replace(" ", "")))
                                  for k, v in sorted(doc["band"]["measure"].items())}
    return out


@dataclass
class ChainSpec:
    doc: dict

    @classmethod
    def from_dict(cls, doc: Any) -> "ChainSpec":
        validate(doc)
        return cls(_canonical(copy.deepcopy(doc)))

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecError("", f"invalid JSON: {e}")
        return cls.from_dict(doc)

    @classmethod
    def from_file(cls, path) -> "ChainSpec":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        return copy.deepcopy(self.doc)

    def to_json(self) -> str:
        return json.dumps(self.doc, indent=2, sort_keys=True)

    def __eq__(self, other):
        return isinstance(other, ChainSpec) and self.doc == other.doc

    def get(self, key, default=None):
        return self.doc.get(key, default)


# --------------------------------------------------------------------------
# descriptors


def parse_graph(d: dict, path: str) -> Graph:
    try:
        if "family" in d:
            fam, n = d["family"], d["n"]
            if fam == "star":
                return Graph.star(n, d.get("m"))
            if "m" in d:
                raise SpecError(path + "/m", "'m' applies to the star family only")
            return {"complete": Graph.complete, "path": Graph.path, "cycle": Graph.cycle,
                    "empty": Graph.empty}[fam](n)
        return Graph(d["n"], tuple(tuple(e) for e in d["edges"]))
    except SpecError:
        raise
    except ValueError as e:
        raise SpecError(path, str(e))


def graph_to_dict(G: Graph) -> dict:
    return {"n": G.n, "edges": [list(e) for e in G.edges]}


def parse_arrangement(d: dict, path: str) -> Arrangement:
    kind = d["kind"]
    try:
        if kind == "graphical":
            if "graph" not in d:
                raise SpecError(path, "graphical arrangement needs 'graph'")
            G = parse_graph(d["graph"], path + "/graph")
            if "n" in d and d["n"] != G.n:
                raise SpecError(path + "/n", "n differs from the graph's node count")
            return Arrangement.graphical(G)
        if "n" not in d:
            raise SpecError(path, "'n' is required")
        if kind == "boolean":
            return Arrangement.boolean(d["n"])
        if kind == "boolean_sub":
            if "coords" not in d:
                raise SpecError(path, "boolean_sub needs 'coords'")
            return Arrangement.boolean_sub(d["n"], d["coords"])
        return Arrangement.braid(d["n"])
    except SpecError:
        raise
    except ValueError as e:
        raise SpecError(path, str(e))


def parse_face(arr: Arrangement, raw, path: str):
    if arr.kind == "braid":
        if raw and all(isinstance(b, list) for b in raw):
            F = tuple(tuple(sorted(b)) for b in raw)
        else:
            F = tuple(raw)
    else:
        F = tuple({"-": -1, "0": 0, "+": 1}.get(v, v) if isinstance(v, str) else v for v in raw)
    from .arrangements import is_face
    if not is_face(arr, F):
        raise SpecError(path, f"{raw!r} is not a face of {arr}")
    return F


def parse_start(raw):
    """Chamber from JSON: lists become tuples, '-'/'+' become signs."""
    return tuple(tuple(v) if isinstance(v, list) else
                 ({"-": -1, "+": 1}.get(v, v) if isinstance(v, str) else v) for v in raw)


# --------------------------------------------------------------------------
# chains


@dataclass
class Chain:
    """Everything a command needs about one chain."""

    name: str
    K: TransitionMatrix
    spectrum: Spectrum
    start: Any
    measure: FaceMeasure | None = None          # face measure driving the walk
    target: Arrangement | None = None           # hyperplanes whose separation couples
    lump: Callable | None = None                # chamber of measure.arr -> state of K
    pair: SubarrangementPair | None = None
    band_walk: BandWalk | None = None
    state_kind: str = "tuple"
    _pi: Distribution | None = field(default=None, repr=False)

    @property
    def separating(self) -> bool:
        if self.measure is not None:
            return is_separating(self.measure, self.target)
        return self.spectrum.multiplicity(1) == 1

    def stationary(self) -> Distribution:
        if self._pi is None:
            self._pi = stationary(self.K)
        return self._pi

    def eigen_bound(self, l: int) -> Fraction:
        if self.measure is not None:
            return eigenvalue_bound(self.measure, l, self.target)
        # band walks: sum over lattice elements covered by the top, on the
        # lattice with an identity adjoined when the band has none
        bw = self.band_walk
        if bw.band.identity() is None:
            bw = BandWalk(adjoin_identity(bw.band), bw.measure)
        L = bw.lattice
        top = L.top
        covered = [u for u in range(L.size) if u != top and L.leq[u, top]
                   and not any(z not in (u, top) and L.leq[u, z] and L.leq[z, top] for z in range(L.size))]
        lam = {}
        for u in covered:
            lam[u] = sum((v for x, v in bw.measure.items() if L.leq[L.supp[x], u]), ZERO_Q)
        return sum((lam[u] ** l for u in covered), ZERO_Q)

    def coupling(self, L: int, trials: int, seed: int):
        if self.measure is not None:
            return coupling_curve_mc(self.measure, self.target, L, trials, seed)
        return band_coupling_curve_mc(self.band_walk, L, trials, seed)

    def simulate(self, steps: int, seed: int) -> list:
        """Trajectory of the chain, by sampling faces (or band elements)."""
        from .walks import sample_faces, project
        rng = np.random.default_rng(seed)
        if self.band_walk is not None:
            bw = self.band_walk
            idx = list(bw.measure)
            p = np.array([float(bw.measure[x]) for x in idx])
            c = bw.band.labels.index(self.start)
            out = [bw.band.labels[c]]
            for k in rng.choice(len(idx), size=steps, p=p / p.sum()) if steps else []:
                c = int(bw.band.table[idx[k], c])
                out.append(bw.band.labels[c])
            return out
        arr = self.measure.arr
        lift = self._lift_start()
        faces = self.measure.support
        picks = sample_faces(self.measure, rng, steps) if steps else []
        C = lift
        out = [self.start]
        for k in picks:
            C = project(arr, faces[k], C)
            out.append(self.lump(C) if self.lump else C)
        return out

    def _lift_start(self):
        if self.lump is None:
            return self.start
        for C in self.pair.states_A if self.pair else []:
            if self.lump(C) == self.start:
                return C
        raise ValueError(f"no chamber maps to {self.start!r}")


def band_coupling_curve_mc(walk: BandWalk, L: int, trials: int, seed: int):
    """P(x_1 ... x_l is not a chamber), tracked through supports."""
    from .walks import MC_BLOCK
    Lat = walk.lattice
    idx = list(walk.measure)
    p = np.array([float(walk.measure[x]) for x in idx])
    p /= p.sum()
    supp = np.array([Lat.supp[x] for x in idx])
    join = np.asarray(Lat.join)
    counts = np.zeros(L + 1, dtype=np.int64)
    for b in range(math.ceil(trials / MC_BLOCK)):
        size = min(MC_BLOCK, trials - b * MC_BLOCK)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        counts[0] += size
        if not L:
            continue
        cur = supp[rng.choice(len(idx), size=size, p=p)]
        counts[1] += (cur != Lat.top).sum()
        for l in range(2, L + 1):
            cur = join[cur, supp[rng.choice(len(idx), size=size, p=p)]]
            counts[l] += (cur != Lat.top).sum()
    est = counts / trials
    smooth = (counts + 1) / (trials + 2)
    return est, np.sqrt(smooth * (1 - smooth) / trials)


def _base_of(model: dict, n: int, path: str):
    b = model.get("base", {"name": "tsetlin"})
    if b["name"] == "tsetlin":
        w = b.get("weights")
        if w is not None:
            w = [parse_rational(x, f"{path}/base/weights/{k}") for k, x in enumerate(w)]
            if len(w) != n:
                raise SpecError(path + "/base/weights", f"expected {n} weights")
            if sum(w) != 1:
                raise SpecError(path + "/base/weights", "weights must sum to 1")
        return ("tsetlin", w)
    if "a" not in b:
        raise SpecError(path + "/base", "a_shuffle base needs 'a'")
    return ("a_shuffle", b["a"])


def _node_weights(model: dict, n: int, path: str):
    w = model.get("weights")
    if w is None:
        return None
    if len(w) != n:
        raise SpecError(path + "/weights", f"expected {n} weights, got {len(w)}")
    out = [parse_rational(x, f"{path}/weights/{k}") for k, x in enumerate(w)]
    if sum(out) != 1:
        raise SpecError(path + "/weights", f"weights sum to {sum(out)}, not 1")
    return out


def _need(model: dict, key: str, path: str):
    if key not in model:
        raise SpecError(path, f"model {model['name']!r} needs {key!r}")
    return model[key]


def _chain_from_measure(name: str, w: FaceMeasure, target_arr: Arrangement | None,
                        start_raw, state_kind: str) -> Chain:
    if target_arr is None or target_arr == w.arr:
        K = build_transition(w)
        start = K.states[0] if start_raw is None else _resolve_start(w.arr, start_raw, K.states)
        return Chain(name, K, spectrum(w), start, w, w.arr, state_kind=state_kind)
    pair = SubarrangementPair.build(w.arr, target_arr)
    state_kind = "signs"
    K = build_transition(induced_measure(pair, w))
    start = K.states[0] if start_raw is None else _resolve_start(target_arr, start_raw, K.states)
    return Chain(name, K, induced_spectrum(pair, w), start, w, target_arr,
                 lump=pair.lump.__getitem__, pair=pair, state_kind=state_kind)


def _resolve_start(arr: Arrangement, raw, states):
    st = parse_start(raw)
    if arr.kind == "braid" and st and isinstance(st[0], tuple):
        st = as_permutation(st)
    if st not in set(states):
        raise SpecError("/start", f"{raw!r} is not a state of the chain")
    return st


def build_chain(spec: ChainSpec) -> Chain:
    d = spec.doc
    c = d.get("caps", {})
    with caps(c.get("faces"), c.get("chambers")):
        return _build_chain(d)


def _build_chain(d: dict) -> Chain:
    name = d.get("name", "chain")
    start_raw = d.get("start")
    if "band" in d:
        b = d["band"]
        labels = b["elements"]
        try:
            band = build_band(b["table"], labels)
        except ValueError as e:
            raise SpecError("/band/table", str(e))
        m = {}
        for lab, v in b["measure"].items():
            hits = [k for k, x in enumerate(labels) if str(x) == lab]
            if not hits:
                raise SpecError(f"/band/measure/{lab}", "unknown element label")
            m[hits[0]] = parse_rational(v, f"/band/measure/{lab}")
        if sum(m.values()) != 1:
            raise SpecError("/band/measure", "band measure must sum to 1")
        try:
            walk = BandWalk(band, m)
        except ValueError as e:
            raise SpecError("/band", str(e))
        K = band_walk_transition(walk)
        start = K.states[0] if start_raw is None else start_raw
        if start not in K.states:
            raise SpecError("/start", f"{start_raw!r} is not a chamber of the band")
        return Chain(name, K, brown_spectrum(walk), start, band_walk=walk, state_kind="label")

    sub = None
    if "subarrangement" in d:
        sub = parse_arrangement(d["subarrangement"], "/subarrangement")

    if "measure" in d:
        arr = parse_arrangement(d["arrangement"], "/arrangement")
        weights = {}
        for k, item in enumerate(d["measure"]["faces"]):
            F = parse_face(arr, item["face"], f"/measure/faces/{k}/face")
            if arr.kind == "braid" and F and not isinstance(F[0], tuple):
                F = tuple((v,) for v in F)
            weights[F] = weights.get(F, ZERO_Q) + parse_rational(item["weight"], f"/measure/faces/{k}/weight")
        try:
            w = FaceMeasure(arr, weights)
        except InvalidMeasure as e:
            raise SpecError("/measure/faces", str(e))
        if sub is not None and not _is_sub(arr, sub):
            raise SpecError("/subarrangement", f"{sub} is not a subarrangement of {arr}")
        return _chain_from_measure(name, w, sub, start_raw, "signs" if arr.kind != "braid" else "permutation")

    model = d["model"]
    path = "/model"
    mname = model["name"]
    try:
        return _model_chain(name, model, path, mname, sub, start_raw, d)
    except InvalidMeasure as e:
        raise SpecError(path, str(e))


def _is_sub(A, B) -> bool:
    from .arrangements import is_subarrangement
    return is_subarrangement(A, B)


def _model_chain(name, model, path, mname, sub, start_raw, d) -> Chain:
    if mname in ("tsetlin", "a_shuffle"):
        n = _need(model, "n", path)
        if mname == "tsetlin":
            w = models.tsetlin_measure(_node_weights(model, n, path) or models.uniform_weights(n))
        else:
            w = models.a_shuffle_measure(_need(model, "a", path), n)
        if sub is not None and not _is_sub(w.arr, sub):
            raise SpecError("/subarrangement", f"{sub} is not a subarrangement of {w.arr}")
        return _chain_from_measure(name, w, sub, start_raw, "permutation" if sub is None else "signs")
    if mname in ("nearest_neighbor", "ehrenfest", "neighborhood_attack"):
        if mname == "nearest_neighbor":
            raw = _need(model, "weights", path)
            pairs = []
            for k, pr in enumerate(raw):
                if not isinstance(pr, list):
                    raise SpecError(f"{path}/weights/{k}", "expected a pair [w-, w+]")
                pairs.append(tuple(parse_rational(x, f"{path}/weights/{k}/{j}") for j, x in enumerate(pr)))
            w = models.nearest_neighbor_measure(pairs)
        elif mname == "ehrenfest":
            w = models.ehrenfest(_need(model, "n", path))
        else:
            G = parse_graph(_need(model, "graph", path), path + "/graph")
            w = models.neighborhood_attack_measure(G, _node_weights(model, G.n, path))
        if sub is not None and not _is_sub(w.arr, sub):
            raise SpecError("/subarrangement", f"{sub} is not a subarrangement of {w.arr}")
        return _chain_from_measure(name, w, sub, start_raw, "signs")
    if mname == "orientation":
        G = parse_graph(_need(model, "graph", path), path + "/graph")
        nw = _node_weights(model, G.n, path)
        w = models.orientation_measure(G, nw)
        K = models.orientation_chain(G, nw)
        start = K.states[0] if start_raw is None else _resolve_start(w.arr, start_raw, K.states)
        return Chain(name, K, spectrum(w), start, w, w.arr, state_kind="signs")
    if sub is not None:
        raise SpecError("/subarrangement", f"model {mname!r} fixes its own subarrangement")
    if mname == "ao":
        G = parse_graph(_need(model, "graph", path), path + "/graph")
        base = _base_of(model, G.n, path)
        w = models.base_measure(G.n, base)
        return _chain_from_measure(name, w, Arrangement.graphical(G), start_raw, "signs")
    # statistics of the library / shuffle chain
    n = _need(model, "n", path)
    param = {"top_k": model.get("k"), "tagged_preceders": model.get("m")}.get(mname)
    if mname == "top_k" and param is None:
        raise SpecError(path, "top_k needs 'k'")
    try:
        G = models.statistic_graph(mname, n, param)
    except ValueError as e:
        raise SpecError(path, str(e))
    base = _base_of(model, n, path)
    w = models.base_measure(n, base)
    pair = SubarrangementPair.build(w.arr, Arrangement.graphical(G))
    Kg = build_transition(induced_measure(pair, w))
    label = lambda o: models.statistic_label(mname, G, o, param)  # noqa: E731
    K = Kg.relabel(label, key=None if mname == "top_k" else models._subset_key)
    if start_raw is None:
        start = K.states[0]
    else:
        start = tuple(start_raw)
        if start not in K.index:
            raise SpecError("/start", f"{start_raw!r} is not a state of the chain")
    s = induced_spectrum(pair, w)
    lump = lambda C: label(pair.lump[C])  # noqa: E731
    return Chain(name, K, s, start, w, pair.B, lump=lump, pair=pair,
                 state_kind="permutation" if mname == "top_k" else "subset")
