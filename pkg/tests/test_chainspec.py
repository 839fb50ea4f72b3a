import json
from fractions import Fraction as Q

import pytest

from chamber_walks.chainspec import (
    ChainSpec,
    SpecError,
    build_chain,
    parse_rational,
    render_rational,
)
from chamber_walks.verify import corpus_specs
from chamber_walks.walks import verify_spectrum_by_traces


def spec(doc):
    return ChainSpec.from_dict(doc)


def test_rationals():
    assert parse_rational("3/6") == Q(1, 2)
    assert parse_rational(2) == 2
    assert render_rational(Q(2, 4)) == "1/2" and render_rational(Q(3)) == "3"
    for bad in (0.5, True, "1/0", "x"):
        with pytest.raises(SpecError):
            parse_rational(bad, "/w")


@pytest.mark.parametrize("doc,path", [
    ({"model": {"name": "tsetlin", "n": 0}}, "/model/n"),
    ({"model": {"name": "warp"}}, "/model/name"),
    ({"model": {"name": "tsetlin", "n": 3, "weights": [0.5, "1/4", "1/4"]}}, "/model/weights/0"),
    ({"arrangement": {"kind": "boolean", "n": 1}, "measure": {"faces": [{"face": ["+"]}]}}, "/measure/faces/0"),
    ({"model": {"name": "tsetlin", "n": 3}, "steps": -1}, "/steps"),
    ({"model": {"name": "tsetlin", "n": 3}, "colour": "red"}, "/"),
])
def test_schema_errors_carry_pointers(doc, path):
    with pytest.raises(SpecError) as e:
        spec(doc)
    assert e.value.path == path


@pytest.mark.parametrize("doc,path", [
    ({"model": {"name": "tsetlin", "n": 3, "weights": ["1/2", "1/4", "1/8"]}}, "/model/weights"),
    ({"model": {"name": "tsetlin", "n": 3, "weights": ["1/2", "1/2"]}}, "/model/weights"),
    ({"arrangement": {"kind": "boolean", "n": 2},
      "measure": {"faces": [{"face": ["+", "+", "+"], "weight": 1}]}}, "/measure/faces/0/face"),
    ({"arrangement": {"kind": "boolean", "n": 2},
      "measure": {"faces": [{"face": ["+", "0"], "weight": "1/2"}]}}, "/measure/faces"),
    ({"arrangement": {"kind": "boolean", "n": 2}, "measure": {"faces": [{"face": ["+", "0"], "weight": 1}]},
      "subarrangement": {"kind": "braid", "n": 2}}, "/subarrangement"),
    ({"model": {"name": "top_k", "n": 4}}, "/model"),
    ({"model": {"name": "ao", "graph": {"family": "path", "n": 3}, "base": {"name": "a_shuffle"}}}, "/model/base"),
    ({"model": {"name": "tsetlin", "n": 3}, "start": [1, 1, 2]}, "/start"),
    ({"band": {"elements": ["a", "b"], "table": [[1, 0], [0, 1]], "measure": {"a": 1}}}, "/band/table"),
    ({"band": {"elements": ["a"], "table": [[0]], "measure": {"z": 1}}}, "/band/measure/z"),
    ({"model": {"name": "neighborhood_attack", "graph": {"n": 3, "edges": [[1, 4]]}}}, "/model/graph"),
])
def test_semantic_errors_carry_pointers(doc, path):
    with pytest.raises(SpecError) as e:
        build_chain(spec(doc))
    assert e.value.path == path


def test_invalid_json():
    with pytest.raises(SpecError) as e:
        ChainSpec.from_json("{not json")
    assert e.value.path == "/"


def test_corpus_round_trip():
    specs = corpus_specs()
    assert len(specs) >= 15
    for name, s in specs:
        again = ChainSpec.from_json(s.to_json())
        assert again == s, name
        chain = build_chain(again)
        assert chain.K.check_stochastic()
        assert chain.spectrum.total == chain.K.size
        if chain.K.size <= 64:
            assert verify_spectrum_by_traces(chain.K, chain.spectrum), name


def test_equivalent_rational_spellings():
    a = spec({"model": {"name": "tsetlin", "n": 2, "weights": ["2/4", "1/2"]}})
    b = spec({"model": {"name": "tsetlin", "n": 2, "weights": ["1/2", "1/2"]}})
    assert a == b


def test_every_model_name_builds():
    docs = [
        {"model": {"name": "tsetlin", "n": 3}},
        {"model": {"name": "a_shuffle", "n": 3, "a": 2}},
        {"model": {"name": "nearest_neighbor", "weights": [["1/4", "1/4"], ["1/4", "1/4"]]}},
        {"model": {"name": "ehrenfest", "n": 3}},
        {"model": {"name": "neighborhood_attack", "graph": {"family": "cycle", "n": 4}}},
        {"model": {"name": "orientation", "graph": {"family": "path", "n": 3}}},
        {"model": {"name": "ao", "graph": {"family": "complete", "n": 3}, "base": {"name": "a_shuffle", "a": 2}}},
        {"model": {"name": "top_k", "n": 4, "k": 2}},
        {"model": {"name": "tagged_preceders", "n": 4, "m": 2}},
        {"model": {"name": "descent_set", "n": 4}},
        {"model": {"name": "cyclic_descent_set", "n": 4}},
        {"model": {"name": "tsetlin", "n": 3}, "subarrangement": {"kind": "graphical", "graph": {"family": "path", "n": 3}}},
        {"model": {"name": "ehrenfest", "n": 3}, "subarrangement": {"kind": "boolean_sub", "n": 3, "coords": [1, 2]}},
    ]
    for d in docs:
        chain = build_chain(spec(d))
        assert chain.K.check_stochastic()
        assert verify_spectrum_by_traces(chain.K, chain.spectrum)


def test_start_states():
    c = build_chain(spec({"model": {"name": "tsetlin", "n": 3}, "start": [3, 1, 2]}))
    assert c.start == (3, 1, 2)
    c = build_chain(spec({"model": {"name": "ehrenfest", "n": 2}, "start": ["+", "-"]}))
    assert c.start == (1, -1)
    c = build_chain(spec({"model": {"name": "descent_set", "n": 3}, "start": [1, 2]}))
    assert c.start == (1, 2)


def test_caps_in_spec():
    from chamber_walks.arrangements import CapExceeded
    with pytest.raises(CapExceeded):
        build_chain(spec({"model": {"name": "tsetlin", "n": 4}, "caps": {"chambers": 10}}))


def test_simulate_statistic_chain():
    c = build_chain(spec({"model": {"name": "tagged_preceders", "n": 4}}))
    traj = c.simulate(20, seed=1)
    assert len(traj) == 21 and all(s in c.K.index for s in traj)
    assert traj == c.simulate(20, seed=1)


def test_band_chain():
    c = build_chain(spec({"band": {"elements": ["a", "b", "c"], "table": [[0, 0, 0], [1, 1, 1], [2, 2, 2]],
                                   "measure": {"a": "1/3", "b": "1/3", "c": "1/3"}}}))
    assert c.spectrum.merged() == [(1, 1), (0, 2)]
    assert c.eigen_bound(0) == 1 and c.eigen_bound(1) == 0
    est, err = c.coupling(3, 1000, seed=0)
    assert est[0] == 1 and est[1] == 0
    assert json.loads(ChainSpec.from_dict({"band": {"elements": ["x"], "table": [[0]], "measure": {"x": 1}}}).to_json())


def test_band_coupling_prefix_consistent():
    from chamber_walks.chainspec import band_coupling_curve_mc
    c = build_chain(spec({"band": {"elements": ["0", "-", "+"], "table": [[0, 1, 2], [1, 1, 1], [2, 2, 2]],
                                   "measure": {"0": "1/2", "-": "1/4", "+": "1/4"}}}))
    long, _ = band_coupling_curve_mc(c.band_walk, 10, 3000, seed=4)
    short, _ = band_coupling_curve_mc(c.band_walk, 4, 3000, seed=4)
    assert list(short) == list(long[:5])
    # the walk stays uncoupled while only the identity has been drawn
    assert all(abs(long[l] - 0.5**l) < 0.05 for l in range(1, 6))
