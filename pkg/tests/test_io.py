import json
import random
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from otgroups import DihedralInf, SignedMeasure, SimplexElement, defect, solve, word_metric_task
from otgroups import io
from otgroups.groups import word_metric_space

from factories import random_mean_zero, random_metric_space


def _through_text(obj):
    return json.loads(io.dumps(obj))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_matrix_space_and_measure_round_trip(seed):
    rng = random.Random(seed)
    space = random_metric_space(rng, rng.randint(2, 12))
    raw = _through_text(io.metric_space_to_json(space))
    back = io.metric_space_from_json(raw)
    assert back.points == space.points
    assert all(back.dist(x, y) == space.dist(x, y) for x in space.points for y in space.points)
    xi = random_mean_zero(rng, space, max_support=8)
    xi2 = io.measure_from_json(_through_text(io.measure_to_json(xi)), back)
    assert xi2.entries == xi.entries
    sol = solve(xi)
    plan = io.plan_from_json(_through_text(io.plan_to_json(sol.plan, space)), back)
    assert plan == sol.plan
    wit = io.witness_from_json(_through_text(io.witness_to_json(sol.witness, space)), back)
    assert wit.values == sol.witness.values


def test_group_space_round_trip():
    D = DihedralInf()
    space = word_metric_space(D, radius_cap=40)
    raw = _through_text(io.metric_space_to_json(space))
    assert raw == {"group": {"type": "dihedral_inf"}, "metric": "word", "generators": ["t", "s"],
                   "radius_cap": 40}
    back = io.metric_space_from_json(raw)
    assert back.dist((3, 1), (0, 0)) == space.dist((3, 1), (0, 0)) == 4
    xi = SignedMeasure({(2, 1): F(1, 3), (-1, 0): F(-1, 3)}, space)
    enc = io.measure_to_json(xi)
    assert enc == {"entries": [{"point": "t^-1", "mass": "-1/3"}, {"point": "t^2 s", "mass": "1/3"}]}
    assert io.measure_from_json(enc, back).entries == xi.entries


def test_simplex_and_report():
    D = DihedralInf()
    beta = SimplexElement({(0, 0): F(1, 2), (1, 1): F(1, 2)}, D)
    assert io.simplex_from_json(_through_text(io.simplex_to_json(beta)), D) == beta
    task = word_metric_task(D, [(0, 0), (1, 0)], 1)
    out = _through_text(io.defect_report_to_json(defect(beta, task), task))
    assert out["defect"] == "1/1" and out["pairs"][0]["certified"] is True


def test_generators_table_and_list():
    space = io.metric_space_from_json({"group": {"type": "Zk", "k": 1}, "generators": {"a": "2", "b": "3"}})
    assert space.dist(0, 7) == 3
    space = io.metric_space_from_json({"group": {"type": "Zk", "k": 2}, "generators": ["(1,0)", "(1,1)"]})
    assert space.dist((0, 0), (0, 1)) == 2


def test_action_from_json():
    data = {"points": [-1, 0, 1], "matrix": [["0", "1", "2"], ["1", "0", "1"], ["2", "1", "0"]],
            "permutations": [[0, 1, 2], [2, 1, 0]]}
    act = io.action_from_json(data)
    assert len(act.elements) == 2
    data2 = {"points": [0, 1, 2], "matrix": [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
             "group": {"type": "cyclic", "m": 3},
             "action_table": {"0": [0, 1, 2], "1": [1, 2, 0], "2": [2, 0, 1]}}
    assert len(io.action_from_json(data2).elements) == 3
