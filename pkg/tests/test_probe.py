import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from otgroups import (CyclicZ, DihedralInf, Failure, Integers, LipschitzWitness, SimplexElement,
                      arens_eells_norm, concentration_count, defect, dihedral_bound, dihedral_folner,
                      dihedral_min_M, dihedral_target_set, dual_obstruction, matching_defect,
                      sequential_minimize, to_uniform_multiset, translate, word_metric_task)
from otgroups.groups import get_word_metric
from otgroups.probe import (CapTooSmall, NotLipschitz, ProbeTask, UniformMultiset, default_pool,
                            dihedral_sweep, homomorphism_obstruction, pair_difference)

D = DihedralInf()
Zg = Integers()
tau, sigma, e = (1, 0), (0, 1), (0, 0)


def z_task(E=(0, 1), eps=F(1, 2), cap=64):
    return word_metric_task(Zg, E, eps, radius_cap=cap)


# -- defect ---------------------------------------------------------------------

def test_dirac_defect_is_distance():
    task = word_metric_task(D, [e, (2, 1)], 1)
    report = defect(SimplexElement.dirac(e, D), task)
    assert report.defect == 3 and report.all_certified


def test_finite_group_uniform_has_zero_defect():
    C = CyclicZ(7)
    task = word_metric_task(C, [0, 2, 3, 6], F(1, 5))
    report = defect(SimplexElement.uniform(C.elements(), C), task)
    assert report.defect == 0


@pytest.mark.parametrize("n", [1, 2, 5, 17])
def test_uniform_interval_defect_one(n):
    beta = SimplexElement.uniform(list(range(n)), Zg)
    report = defect(beta, z_task())
    assert report.defect == 1
    r = report.per_pair[(0, 1)]  # β·δ₀ − β·δ₁
    assert r.certified
    assert [(mv.source, mv.sink, mv.mass) for mv in r.plan.moves] == [(0, n, F(1, n))]


def test_anchored_mode_and_threads():
    task = word_metric_task(D, dihedral_target_set(2), F(1, 2))
    beta = dihedral_folner(2, 6)
    full = defect(beta, task)
    anch = defect(beta, task, mode="anchored")
    assert anch.defect <= full.defect <= 2 * anch.defect
    assert defect(beta, task, threads=4).defect == full.defect
    with pytest.raises(ValueError):
        defect(beta, task, mode="bogus")


def test_task_validation():
    with pytest.raises(ValueError):
        word_metric_task(Zg, [], 1)
    with pytest.raises(ValueError):
        word_metric_task(Zg, [0, 0], 1)
    with pytest.raises(ValueError):
        word_metric_task(Zg, [0, 1], 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.tuples(st.integers(-4, 4), st.integers(0, 1)), st.integers(1, 5)),
                min_size=1, max_size=5),
       st.tuples(st.integers(-6, 6), st.integers(0, 1)))
def test_defect_invariant_under_left_translation(raw, g):
    tot = sum(w for _, w in raw)
    beta = SimplexElement([(x, F(w, tot)) for x, w in raw], D)
    task = word_metric_task(D, dihedral_target_set(1), 1)
    assert defect(translate(beta, g, side="left"), task).defect == defect(beta, task).defect


# -- the dihedral construction -----------------------------------------------

def test_folner_small_cases():
    b0 = dihedral_folner(5, 0)
    assert b0.weights == {e: F(1, 2), sigma: F(1, 2)}
    b1 = dihedral_folner(1, 1)
    assert set(b1.weights) == {(-1, 0), e, tau, (-1, 1), sigma, (1, 1)}
    assert set(b1.weights.values()) == {F(1, 6)}
    with pytest.raises(ValueError):
        dihedral_folner(0, 3)


def test_min_M():
    assert [dihedral_min_M(N) for N in (1, 2, 3)] == [1, 6, 18]
    assert dihedral_bound(3, 18) == F(24, 74)


@pytest.mark.parametrize("N,M,expected", [(1, 1, F(2, 3)), (2, 6, F(6, 13)), (3, 18, F(12, 37))])
def test_folner_defect_hits_bound(N, M, expected):
    # values frozen from the flow solver; they coincide with the bound itself
    task = word_metric_task(D, dihedral_target_set(N), F(1, N))
    report = defect(dihedral_folner(N, M), task)
    assert report.defect == expected == dihedral_bound(N, M)
    assert report.all_certified


def test_sweep_crossing_for_radius_three():
    points = {p.M: p for p in dihedral_sweep(3, [8, 9])}
    assert points[8].defect == F(12, 17) > F(2, 3)
    assert points[9].defect == F(12, 19) < F(2, 3)


# -- multisets, matchings, Markov ------------------------------------------------

def test_to_uniform_multiset_examples():
    a, b, c = e, tau, sigma
    h = to_uniform_multiset(SimplexElement.uniform([a, b], D), 2)
    assert h.elems == (a, b) and h.tv_error == 0
    h = to_uniform_multiset(SimplexElement({a: F(1, 3), b: F(2, 3)}, D), 3)
    assert h.elems == (a, b, b)
    h = to_uniform_multiset(SimplexElement({a: F(1, 2), sigma: F(1, 3), b: F(1, 6)}, D), 6)
    assert [h.elems.count(x) for x in (a, sigma, b)] == [3, 2, 1]
    with pytest.raises(CapTooSmall):
        to_uniform_multiset(SimplexElement.uniform([a, b, c], D), 2)


@settings(max_examples=60)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=8), st.integers(8, 60))
def test_rounded_multiset_error_bound(ws, cap):
    tot = sum(ws)
    beta = SimplexElement([(i, F(w, tot)) for i, w in enumerate(ws)], Zg)
    h = to_uniform_multiset(beta, cap)
    assert len(h) <= cap
    assert h.tv_error <= F(len(beta), cap)
    if h.tv_error == 0:
        assert h.as_simplex() == beta


def test_matching_equals_flow_on_dihedral():
    task = word_metric_task(D, dihedral_target_set(3), F(1, 3))
    beta = dihedral_folner(3, 18)
    h = to_uniform_multiset(beta)
    value, sigma_ = matching_defect(h, tau, e, task.metric)
    assert value == arens_eells_norm(pair_difference(beta, tau, e, task.metric))[0]
    count = concentration_count(h, tau, e, F(1, 3), task.metric)
    assert count <= len(h) * value * 3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_matching_agrees_with_flow_and_markov(seed):
    rng = random.Random(seed)
    elems = [(rng.randint(-6, 6), rng.randint(0, 1)) for _ in range(rng.randint(1, 12))]
    h = UniformMultiset(tuple(elems), D)
    space = word_metric_task(D, [e], 1).metric
    g, f = (rng.randint(-3, 3), rng.randint(0, 1)), (rng.randint(-3, 3), rng.randint(0, 1))
    value, _ = matching_defect(h, g, f, space)
    assert value == arens_eells_norm(pair_difference(h.as_simplex(), g, f, space))[0]
    for t in (F(1, 4), F(1, 2), 1):
        assert concentration_count(h, g, f, t, space) <= len(h) * value / t


# -- obstructions ---------------------------------------------------------------

def _identity_witness(beta, g, f):
    pts = set(translate(beta, g).weights) | set(translate(beta, f).weights)
    return LipschitzWitness({x: F(x) for x in pts})


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(1, 9)), min_size=1, max_size=8))
def test_identity_obstruction_is_one(raw):
    tot = sum(w for _, w in raw)
    beta = SimplexElement([(x, F(w, tot)) for x, w in raw], Zg)
    task = z_task()
    lb = dual_obstruction(beta, 1, 0, _identity_witness(beta, 1, 0), task.metric)
    assert lb == 1
    assert lb <= defect(beta, task).defect


def test_obstruction_trivial_cases():
    beta = SimplexElement.uniform([0, 3, 4], Zg)
    space = z_task().metric
    pts = set(translate(beta, 1).weights) | set(beta.weights)
    assert dual_obstruction(beta, 1, 0, LipschitzWitness({x: F(5) for x in pts}), space) == 0
    assert dual_obstruction(beta, 1, 1, _identity_witness(beta, 1, 1), space) == 0


def test_obstruction_rejects_bad_witness():
    beta = SimplexElement.uniform([0, 1], Zg)
    space = z_task().metric
    with pytest.raises(NotLipschitz):
        dual_obstruction(beta, 1, 0, LipschitzWitness({x: F(2 * x) for x in range(3)}), space)
    with pytest.raises(NotLipschitz):
        dual_obstruction(beta, 1, 0, LipschitzWitness({0: F(0)}), space)


def test_homomorphism_obstruction_on_lattice_free_groups():
    assert homomorphism_obstruction(dihedral_folner(1, 2), word_metric_task(D, [e, tau], 1)) is None
    bound, pair, _ = homomorphism_obstruction(SimplexElement.dirac(0, Zg), z_task(E=(0, 1, 3)))
    assert bound == 3 and set(pair) == {0, 3}


# -- sequential search -------------------------------------------------------

def test_search_cyclic_one_step():
    C = CyclicZ(12)
    task = word_metric_task(C, [0, 1, 5], F(1, 10))
    r = sequential_minimize(task, default_pool(C), budget=5)
    assert r.defect == 0
    assert r.beta == SimplexElement.uniform(C.elements(), C)


def test_search_fails_on_integers_with_certificate():
    r = sequential_minimize(z_task(), default_pool(Zg), budget=20)
    assert isinstance(r, Failure)
    assert r.evaluations == 20
    assert r.best.defect >= 1
    assert r.lower_bound == 1
    assert set(r.obstruction_pair) == {0, 1}


def test_search_dihedral_radius_three():
    ball = get_word_metric(D).ball(3)
    task = word_metric_task(D, ball, F(2, 3), radius_cap=128)
    pool = [dihedral_folner(1, M) for M in range(31)]
    r = sequential_minimize(task, pool, budget=31)
    assert not isinstance(r, Failure)
    assert r.defect < F(2, 3) and r.all_certified
    M = (len(r.beta) - 2) // 4
    assert r.beta == dihedral_folner(1, M) and M >= 18
    # the threshold itself is crossed much earlier
    assert defect(dihedral_folner(1, 9), task).defect == F(12, 19)
    assert defect(dihedral_folner(1, 8), task).defect == F(12, 17)


def test_search_is_deterministic():
    task = word_metric_task(D, dihedral_target_set(1), F(1, 100))
    pool = default_pool(D, max_radius=2, max_M=3)
    a = sequential_minimize(task, pool, budget=8)
    b = sequential_minimize(task, pool, budget=8)
    assert isinstance(a, Failure) and a.best.beta == b.best.beta and a.best.defect == b.best.defect


def test_search_budget_validation():
    with pytest.raises(ValueError):
        sequential_minimize(z_task(), [], budget=0)
    r = sequential_minimize(z_task(), [], budget=3)
    assert isinstance(r, Failure) and r.reason == "empty candidate pool"
