import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from otgroups import (CyclicZ, FiniteAction, MetricSpace, SignedMeasure, arens_eells_norm,
                      hausdorff_distance, lift, orbits, pushforward, quotient_metric, validate_metric)
from otgroups.quotient import ActionError, orbit_hausdorff
from otgroups.transport import MeanNotZero

from factories import random_finite_action, random_mean_zero


@pytest.fixture
def negation():
    space = MetricSpace.from_matrix([-1, 0, 1], [[abs(a - b) for b in (-1, 0, 1)] for a in (-1, 0, 1)])
    return FiniteAction.from_permutations(space, [[0, 1, 2], [2, 1, 0]])


def test_negation_orbits(negation):
    assert orbits(negation) == [(-1, 1), (0,)]
    q = quotient_metric(negation)
    assert q.metric.dist((-1, 1), (0,)) == 1
    assert orbit_hausdorff(q, (-1, 1), (0,)) == 1


def test_negation_pushforward_and_lift(negation):
    q = quotient_metric(negation)
    xi = SignedMeasure({1: 1, -1: -1}, negation.space)
    assert pushforward(xi, q) == SignedMeasure({}, q.metric)
    assert arens_eells_norm(xi)[0] == 2
    zeta = SignedMeasure({(-1, 1): 1, (0,): -1}, q.metric)
    up = lift(zeta, q)
    assert up == SignedMeasure({-1: 1, 0: -1}, negation.space)
    assert pushforward(up, q) == zeta
    assert arens_eells_norm(up)[0] == arens_eells_norm(zeta)[0] == 1


def test_trivial_action_is_identity():
    space = MetricSpace.from_matrix("abc", [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    act = FiniteAction.from_permutations(space, [[0, 1, 2]])
    q = quotient_metric(act)
    assert [q.metric.dist((x,), (y,)) for x in "abc" for y in "abc"] == \
        [space.dist(x, y) for x in "abc" for y in "abc"]


def test_transitive_action_collapses():
    n = 6
    space = MetricSpace.from_matrix(range(n), [[min((i - j) % n, (j - i) % n) for j in range(n)] for i in range(n)])
    act = FiniteAction.from_group(space, CyclicZ(n), lambda g, x: (x + g) % n)
    q = quotient_metric(act)
    assert len(q.orbits) == 1
    xi = SignedMeasure({0: 1, 3: -1}, space)
    assert pushforward(xi, q).total_mass() == 0 and len(pushforward(xi, q).support()) == 0


def test_action_validation():
    space = MetricSpace.from_matrix("abc", [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    with pytest.raises(ActionError):  # swapping a and b is not an isometry
        FiniteAction.from_permutations(space, [[0, 1, 2], [1, 0, 2]])
    with pytest.raises(ActionError):
        FiniteAction.from_permutations(space, [[0, 0, 2]])
    line = MetricSpace.from_matrix(range(3), [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    with pytest.raises(ActionError):  # not closed
        FiniteAction.from_permutations(line, [[0, 1, 2], [1, 2, 0]])


def test_pushforward_errors(negation):
    q = quotient_metric(negation)
    with pytest.raises(MeanNotZero):
        pushforward(SignedMeasure({0: 1}, negation.space), q)
    with pytest.raises(ValueError):
        lift(SignedMeasure({}, q.metric), q, epsilon=-1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_contraction_and_lift(seed):
    rng = random.Random(seed)
    act = random_finite_action(rng)
    q = quotient_metric(act)
    assert validate_metric(q.metric).ok
    for b in q.orbits:
        for c in q.orbits:
            assert q.metric.dist(b, c) == hausdorff_distance(b, c, act.space)
    if len(act.space) < 2:
        return
    xi = random_mean_zero(rng, act.space, max_support=10)
    zeta = pushforward(xi, q)
    assert arens_eells_norm(zeta)[0] <= arens_eells_norm(xi)[0]
    up = lift(zeta, q, epsilon=0)
    assert pushforward(up, q) == zeta
    assert arens_eells_norm(up)[0] == arens_eells_norm(zeta)[0]
