from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from otgroups import (EmptySetError, MetricSpace, euclidean_line, hausdorff_distance,
                      validate_metric)

from factories import random_metric_space


def test_line_is_a_metric(line3):
    assert validate_metric(line3).violations == []


def test_symmetry_violation_reported():
    space = MetricSpace.from_matrix([0, 1], [[0, 5], [3, 0]])
    report = validate_metric(space)
    assert not report.ok
    assert [v.witness for v in report.by_axiom("symmetry")] == [(0, 1)]


def test_triangle_violation_reported():
    space = MetricSpace.from_matrix([0, 1, 2], [[0, 1, 10], [1, 0, 1], [10, 1, 0]])
    report = validate_metric(space)
    assert (0, 1, 2) in [v.witness for v in report.by_axiom("triangle")]
    assert not report.by_axiom("symmetry")


def test_diagonal_and_sign_violations():
    space = MetricSpace.from_matrix(["a", "b"], [[1, -1], [-1, 0]])
    report = validate_metric(space)
    assert report.by_axiom("zero-diagonal")[0].witness == ("a",)
    assert len(report.by_axiom("nonnegativity")) == 2


def test_ecart_zero_distance_allowed():
    space = MetricSpace.from_matrix(["x", "y", "z"], [[0, 0, 2], [0, 0, 2], [2, 2, 0]])
    assert validate_metric(space).ok


def test_float_mode_uses_tolerance():
    M = [[0.0, 0.1 + 0.2, 0.3], [0.3, 0.0, 0.0], [0.3, 0.0, 0.0]]
    assert validate_metric(MetricSpace.from_matrix([0, 1, 2], M, exact=False)).ok
    with pytest.raises(TypeError):
        MetricSpace.from_matrix([0, 1, 2], M)


def test_oracle_needs_probe():
    space = MetricSpace.from_oracle(lambda x, y: abs(x - y))
    with pytest.raises(ValueError):
        validate_metric(space)
    assert validate_metric(space, probe=range(-3, 4)).ok


def test_oracle_validation_sees_asymmetry_through_memo():
    space = MetricSpace.from_oracle(lambda x, y: 2 if x < y else 1, points=[0, 1])
    space.dist(0, 1)
    assert validate_metric(space).by_axiom("symmetry")


def test_hausdorff_examples(Z):
    assert hausdorff_distance([0, 1], [0, 1], Z) == 0
    assert hausdorff_distance([0], [5], Z) == 5
    assert hausdorff_distance([0, 10], [1], Z) == 9


def test_hausdorff_rejects_empty(Z):
    with pytest.raises(EmptySetError):
        hausdorff_distance([], [1], Z)


def test_oracle_matches_explicit_exactly(rng):
    explicit = random_metric_space(rng, 15)
    M = explicit.matrix_of(explicit.points)
    oracle = MetricSpace.from_oracle(lambda x, y: M[x][y], points=explicit.points)
    for x in explicit.points:
        for y in explicit.points:
            a, b = explicit.dist(x, y), oracle.dist(x, y)
            assert a == b and type(a) is type(b) is Fraction
            assert (a.numerator, a.denominator) == (b.numerator, b.denominator)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), data=st.data())
def test_hausdorff_metric_properties(seed, data):
    import random
    space = random_metric_space(random.Random(seed), 12, kind=data.draw(st.sampled_from(["graph", "grid"])))
    subsets = st.sets(st.sampled_from(space.points), min_size=1, max_size=6)
    A, B, C = data.draw(subsets), data.draw(subsets), data.draw(subsets)
    dAB = hausdorff_distance(A, B, space)
    assert dAB == hausdorff_distance(B, A, space)
    assert dAB <= hausdorff_distance(A, C, space) + hausdorff_distance(C, B, space)
    if space.name == "graph":  # a genuine metric: zero exactly on equal sets
        assert (dAB == 0) == (A == B)


def test_random_spaces_validate(rng):
    for _ in range(20):
        assert validate_metric(random_metric_space(rng, rng.randint(1, 40))).ok
