import json
import math

import numpy as np
import pytest

from chern_simons_graph import GraphError, dumps, load_solution, write_solution
from chern_simons_graph.fixtures import fixture
from chern_simons_graph.serialize import to_jsonable, to_tsv


def test_solution_roundtrip_is_bit_exact(tmp_path, rng):
    g = fixture("torus4x4_weighted")
    v = rng.standard_normal(g.n) * 10.0 ** rng.integers(-20, 20, g.n)
    path = tmp_path / "v.json"
    write_solution(g, v, path)
    assert np.array_equal(load_solution(g, path), v)


def test_load_solution_errors(tmp_path):
    g = fixture("k2")
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"x1": 1.0}))
    with pytest.raises(GraphError, match="x2"):
        load_solution(g, path)
    path.write_text('{"x1": 1.0, "x2": "NaN"}')
    with pytest.raises(GraphError, match="x2"):
        load_solution(g, path)
    path.write_text('{"x1": 1.0, "x2": NaN}')
    with pytest.raises(GraphError, match="x2"):
        load_solution(g, path)
    path.write_text('{"x1": 1.0, "x2": 2.0, "x9": 0.0}')
    with pytest.raises(GraphError, match="x9"):
        load_solution(g, path)
    path.write_text("[1, 2]")
    with pytest.raises(GraphError):
        load_solution(g, path)
    path.write_text("{")
    with pytest.raises(GraphError, match="invalid JSON"):
        load_solution(g, path)


def test_report_with_v_map_is_accepted(tmp_path):
    g = fixture("k2")
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"status": "converged", "v": {"x1": 0.5, "x2": -0.5}}))
    assert load_solution(g, path).tolist() == [0.5, -0.5]


def test_jsonable_conversions():
    g = fixture("k2")
    out = to_jsonable({"a": np.array([1.0, math.inf]), "b": np.int64(3), "c": (np.float64(0.1),), "d": np.ones(3)}, g)
    assert out == {"a": {"x1": 1.0, "x2": None}, "b": 3, "c": [0.1], "d": [1.0, 1.0, 1.0]}
    text = dumps({"z": np.array([0.1, 1 / 3])}, g)
    assert json.loads(text)["z"]["x2"] == 1 / 3
    assert dumps({"z": 1.0}) == dumps({"z": 1.0})


def test_tsv_layout():
    text = to_tsv([{"a": 1.5, "b": "x"}, {"a": None, "b": 2}], ["a", "b"])
    assert text == "a\tb\n1.5\tx\nnan\t2\n"
