import json
import os

import pytest

import metrocover

TRIANGLE = """
station A 48.0 2.0
station B 48.1 2.1
station C 48.2 2.0
line L1
line L2
line L3
segment L1 A B
segment L2 B C
segment L3 C A
"""

STAR = """
station H
station A
station B
station C
line L1
line L2
line L3
segment L1 H A
segment L2 H B
segment L3 H C
"""


def solver_cmd():
    root = os.environ.get("METROCOVER_DATA", os.path.dirname(os.path.dirname(os.path.dirname(__file__))))
    return f"python3 {root}/tools/solve_lp.py {{model}} {{solution}}"


def test_parse_and_introspect():
    net = metrocover.parse_network(TRIANGLE)
    assert net.stations == ["A", "B", "C"]
    assert net.lines == ["L1", "L2", "L3"]
    assert net.arc_count == 6
    assert "Network" in repr(net)


def test_solve_walk_oracle():
    net = metrocover.parse_network(TRIANGLE)
    report = metrocover.solve(net, backend="oracle")
    assert report["objective"] == 3
    steps = report["steps"]
    assert len(steps) == 3
    for (dep, arr, line), (ndep, narr, nline) in zip(steps, steps[1:]):
        assert arr == ndep
    assert metrocover.validate(net, steps) == []


def test_solve_walk_milp_subprocess():
    net = metrocover.parse_network(STAR)
    report = metrocover.solve(net, backend="milp", solver_cmd=solver_cmd())
    assert report["objective"] == 4
    assert report["backend"] == "milp"


def test_infeasible_path_raises():
    net = metrocover.parse_network(STAR)
    with pytest.raises(metrocover.InfeasibleError):
        metrocover.solve(net, shape="path", backend="oracle")


def test_enumerate_triangle():
    net = metrocover.parse_network(TRIANGLE)
    out = metrocover.enumerate_solutions(net, backend="oracle")
    assert out["truncated"] is False
    assert len(out["solutions"]) == 2
    assert {s["objective"] for s in out["solutions"]} == {3}


def test_prune_and_canonical_text():
    net = metrocover.parse_network(
        "station A\nstation B\nstation C\nline L1\nline L2\n"
        "segment L1 A B\nsegment L1 B C\nsegment L2 A B\n"
    )
    pruned, removed = metrocover.prune(net)
    assert removed == ["C"]
    text = metrocover.canonical_text(pruned)
    again = metrocover.parse_network(text)
    assert metrocover.canonical_text(again) == text


def test_geojson_export():
    net = metrocover.parse_network(TRIANGLE)
    report = metrocover.solve(net, backend="oracle")
    doc = json.loads(metrocover.export_geojson(net, report["steps"]))
    assert doc["type"] == "FeatureCollection"
    kinds = [f["geometry"]["type"] for f in doc["features"]]
    assert kinds.count("LineString") == 3
    assert kinds.count("Point") == 2
