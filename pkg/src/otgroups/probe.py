"""Quantitative amenability probes on finitely generated groups.

The central quantity is the invariance defect of β ∈ ΔG on a finite set E,

    max over g, f in E of ‖βg − βf‖,

computed exactly with a primal plan and a dual 1-Lipschitz witness for every
pair.  Lower bounds come from 1-Lipschitz homomorphisms to ℚ: pairing one
with βg − βf gives h(g) − h(f) whatever β is.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .groups import (DihedralInf, Group, RadiusExceeded, SimplexElement, as_signed_measure,
                     convolve, get_word_metric, translate, uniform_ball)
from .metric import MetricSpace
from .rational import common_denominator, to_fraction
from .transport import (Assignment, LipschitzWitness, TransportPlan, optimal_assignment, solve,
                        verify_certificate)

DEFAULT_SUPPORT_CAP = 10**5
DEFAULT_DENOMINATOR_CAP = 10**4


class NotLipschitz(ValueError):
    pass


class CapTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class ProbeTask:
    group: Group
    metric: MetricSpace
    E: tuple
    epsilon: Fraction
    generators: tuple = ()

    def __post_init__(self):
        if not self.E:
            raise ValueError("E must be non-empty")
        keys = [self.group.canonical(g) for g in self.E]
        if len(set(keys)) != len(keys):
            raise ValueError("E contains repeated elements")
        object.__setattr__(self, "E", tuple(self.E))
        object.__setattr__(self, "epsilon", to_fraction(self.epsilon))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.generators:
            wm = getattr(self.metric, "word_metric", None)
            gens = wm.generators if wm is not None else ()
            object.__setattr__(self, "generators", tuple(gens))


def word_metric_task(group: Group, E: Iterable, epsilon, generators=None, radius_cap=64) -> ProbeTask:
    from .groups import word_metric_space

    space = word_metric_space(group, generators, radius_cap)
    return ProbeTask(group, space, tuple(E), to_fraction(epsilon), space.word_metric.generators)


@dataclass(frozen=True)
class PairResult:
    g: object
    f: object
    value: Fraction
    plan: TransportPlan
    witness: LipschitzWitness
    certified: bool | None  # None in float mode, where certificates are not checked


@dataclass
class DefectReport:
    defect: Fraction
    per_pair: dict
    beta: SimplexElement
    mode: str = "pairs"

    def worst_pair(self) -> tuple:
        best = None
        for key, res in self.per_pair.items():
            if best is None or res.value > self.per_pair[best].value:
                best = key
        return best

    @property
    def all_certified(self) -> bool:
        return all(r.certified is not False for r in self.per_pair.values())


@dataclass
class Failure:
    """Search outcome when no β with defect < ε was found."""

    best: DefectReport
    evaluations: int
    reason: str
    lower_bound: Fraction | None = None
    obstruction_pair: tuple | None = None
    obstruction_witness: LipschitzWitness | None = None


@dataclass(frozen=True)
class UniformMultiset:
    elems: tuple
    group: Group
    tv_error: Fraction = Fraction(0)  # |β − β'|₁ for the β it was expanded from

    def __post_init__(self):
        if not self.elems:
            raise ValueError("multiset must have at least one element")

    def __len__(self) -> int:
        return len(self.elems)

    def as_simplex(self) -> SimplexElement:
        return SimplexElement.uniform(list(self.elems), self.group)


def _threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, threads)
    try:
        return max(1, int(os.environ.get("OTGROUPS_THREADS", "1")))
    except ValueError:
        return 1


def pair_difference(beta: SimplexElement, g, f, space: MetricSpace):
    return as_signed_measure(translate(beta, g), space) - as_signed_measure(translate(beta, f), space)


def _pair_result(beta: SimplexElement, g, f, space: MetricSpace, certify: bool = True) -> PairResult:
    try:
        xi = pair_difference(beta, g, f, space)
        sol = solve(xi)
    except RadiusExceeded as exc:
        raise RadiusExceeded(exc.element, exc.cap, pair=(g, f)) from None
    certified = verify_certificate(xi, sol.plan, sol.witness) if space.exact and certify else None
    return PairResult(g, f, sol.value, sol.plan, sol.witness, certified)


def task_pairs(task: ProbeTask, mode: str = "pairs") -> list[tuple]:
    if mode == "pairs":
        return list(itertools.combinations(task.E, 2))
    if mode == "anchored":
        e = task.group.identity
        return [(g, e) for g in task.E if g != e]
    raise ValueError(f"mode must be 'pairs' or 'anchored', not {mode!r}")


def defect(beta: SimplexElement, task: ProbeTask, mode: str = "pairs",
           threads: int | None = None) -> DefectReport:
    """Invariance defect of β on ``task.E``.

    ``mode="pairs"`` takes every unordered pair of E.  ``mode="anchored"``
    only measures ‖βg − β‖ for g in E; by the triangle inequality the true
    pairwise defect is at most twice the anchored one.
    """
    pairs = task_pairs(task, mode)
    n_threads = _threads(threads)
    if n_threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(lambda p: _pair_result(beta, p[0], p[1], task.metric), pairs))
    else:
        results = [_pair_result(beta, g, f, task.metric) for g, f in pairs]
    per_pair = {(r.g, r.f): r for r in results}
    worst = max((r.value for r in results), default=Fraction(0))
    return DefectReport(worst, per_pair, beta, mode)


# -- the infinite dihedral group ---------------------------------------------

def dihedral_folner(N: int, M: int) -> SimplexElement:
    """Uniform measure on {τⁿ, τⁿσ : |n| ≤ M}.

    ``N`` is the radius of the target set E_N; it does not change β but is
    validated so callers keep the pair (N, M) together, see
    :func:`dihedral_bound`.
    """
    if N < 1 or M < 0:
        raise ValueError("need N >= 1 and M >= 0")
    elems = [(n, s) for n in range(-M, M + 1) for s in (0, 1)]
    return SimplexElement.uniform(elems, DihedralInf())


def dihedral_target_set(N: int) -> list:
    """E_N = {τⁿ, τⁿσ : |n| ≤ N}."""
    return [(n, s) for n in range(-N, N + 1) for s in (0, 1)]


def dihedral_bound(N: int, M: int) -> Fraction:
    return Fraction(2 * N * N + 2 * N, 4 * M + 2)


def dihedral_min_M(N: int) -> int:
    """Least M >= 0 with (2N² + 2N)/(4M + 2) < 1/N."""
    # (2N²+2N)·N < 4M+2  <=>  M > (2N³+2N²-2)/4
    M = max(0, (2 * N**3 + 2 * N**2 - 2) // 4)
    while dihedral_bound(N, M) >= Fraction(1, N):
        M += 1
    while M > 0 and dihedral_bound(N, M - 1) < Fraction(1, N):
        M -= 1
    return M


# -- uniform multisets, matchings and Markov counts ----------------------------

def to_uniform_multiset(beta: SimplexElement, denominator_cap: int = DEFAULT_DENOMINATOR_CAP) -> UniformMultiset:
    """Write β (or a nearby β') as (1/n)(h₁ + ⋯ + hₙ) with n ≤ ``denominator_cap``.

    If the weights share a denominator n ≤ cap the expansion is exact.
    Otherwise n = cap and counts are rounded by largest remainder, which keeps
    |β − β'|₁ ≤ |supp β| / cap.
    """
    supp = beta.support()
    if denominator_cap < len(supp):
        raise CapTooSmall(f"cap {denominator_cap} is below support size {len(supp)}")
    n = common_denominator(beta.weights.values())
    if n <= denominator_cap:
        counts = {g: int(beta[g] * n) for g in supp}
    else:
        n = denominator_cap
        raw = {g: beta[g] * n for g in supp}
        counts = {g: int(raw[g]) for g in supp}
        short = n - sum(counts.values())
        by_remainder = sorted(supp, key=lambda g: (-(raw[g] - counts[g]), supp.index(g)))
        for g in by_remainder[:short]:
            counts[g] += 1
    elems = tuple(g for g in supp for _ in range(counts[g]))
    tv = sum((abs(beta[g] - Fraction(counts[g], n)) for g in supp), Fraction(0))
    return UniformMultiset(elems, beta.group, tv)


def _translated_lists(h: UniformMultiset, g, f):
    G = h.group
    return [G.multiply(x, g) for x in h.elems], [G.multiply(x, f) for x in h.elems]


def matching_defect(h: UniformMultiset, g, f, metric: MetricSpace) -> tuple[Fraction, Assignment]:
    """min over σ of (1/n) Σ d(hᵢg, h_σ(i) f), by optimal assignment."""
    xs, ys = _translated_lists(h, g, f)
    try:
        sigma, cost = optimal_assignment(xs, ys, metric)
    except RadiusExceeded as exc:
        raise RadiusExceeded(exc.element, exc.cap, pair=(g, f)) from None
    return cost / len(h), sigma


def concentration_count(h: UniformMultiset, g, f, threshold, metric: MetricSpace) -> int:
    """#{i : d(hᵢg, h_σ(i) f) ≥ threshold} for the optimal σ of :func:`matching_defect`."""
    threshold = to_fraction(threshold)
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    _, sigma = matching_defect(h, g, f, metric)
    xs, ys = _translated_lists(h, g, f)
    return sum(1 for i, x in enumerate(xs) if metric.dist(x, ys[sigma[i]]) >= threshold)


# -- lower bounds ----------------------------------------------------------------

def dual_obstruction(beta: SimplexElement, g, f, witness: LipschitzWitness, metric: MetricSpace) -> Fraction:
    """Σ_x (βg − βf)(x)·φ(x), a certified lower bound for ‖βg − βf‖.

    Raises NotLipschitz unless φ is defined and 1-Lipschitz on
    supp(βg) ∪ supp(βf).
    """
    bg, bf = translate(beta, g), translate(beta, f)
    pts = metric.sorted(set(bg.weights) | set(bf.weights))
    missing = [p for p in pts if p not in witness.values]
    if missing:
        raise NotLipschitz(f"witness undefined at {missing[:3]!r}")
    bad = witness.lipschitz_violations(metric, pts)
    if bad:
        raise NotLipschitz(f"witness is not 1-Lipschitz on {bad[0]!r}")
    return witness.pair(pair_difference(beta, g, f, metric))


def homomorphism_witness(hom: Callable, points: Iterable, generators: Sequence) -> LipschitzWitness | None:
    """Restrict a homomorphism to ``points``, rescaled so it is 1-Lipschitz
    for the word metric of ``generators``.  None if it vanishes on them."""
    lip = max((abs(to_fraction(hom(s))) for s in generators), default=Fraction(0))
    if lip == 0:
        return None
    return LipschitzWitness({p: to_fraction(hom(p)) / lip for p in points})


def homomorphism_obstruction(beta: SimplexElement, task: ProbeTask):
    """Best lower bound on the defect of β obtainable from the group's homomorphisms.

    Returns (bound, pair, witness) or None when no homomorphism separates a pair.
    """
    if not task.generators:
        return None
    best = None
    for hom in task.group.homomorphisms():
        for g, f in task_pairs(task):
            if to_fraction(hom(g)) == to_fraction(hom(f)):
                continue
            sign = 1 if hom(g) > hom(f) else -1
            pts = set(translate(beta, g).weights) | set(translate(beta, f).weights)
            w = homomorphism_witness(lambda x, hom=hom, sign=sign: sign * to_fraction(hom(x)),
                                     pts, task.generators)
            if w is None:
                continue
            value = dual_obstruction(beta, g, f, w, task.metric)
            if best is None or value > best[0]:
                best = (value, (g, f), w)
    return best


# -- sequential search -------------------------------------------------------

def default_pool(group: Group, generators=None, max_radius: int = 6, max_M: int = 30) -> list[SimplexElement]:
    pool = []
    if group.is_finite():
        pool.append(SimplexElement.uniform(group.elements(), group))
    if isinstance(group, DihedralInf):
        pool += [dihedral_folner(1, M) for M in range(max_M + 1)]
    wm = get_word_metric(group, generators)
    for r in range(1, max_radius + 1):
        pool.append(uniform_ball(group, r, wm.generators, wm.radius_cap))
    return pool


def sequential_minimize(task: ProbeTask, pool: Sequence[SimplexElement], budget: int,
                        mode: str = "pairs", support_cap: int = DEFAULT_SUPPORT_CAP,
                        threads: int | None = None) -> DefectReport | Failure:
    """Greedy defect reduction by repeated convolution β ← βᵢ ∗ β.

    Each round looks at the currently worst pair (g, f) of E and picks the
    pool candidate c minimising ‖(c∗β)g − (c∗β)f‖; the first candidate wins
    ties.  Every candidate looked at costs one unit of ``budget``.  Returns
    the first report with defect < ε, otherwise a :class:`Failure` carrying
    the best report seen and, when available, a homomorphism lower bound.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    pool = list(pool)
    beta = SimplexElement.dirac(task.group.identity, task.group)
    report = defect(beta, task, mode, threads)
    best = report
    if report.defect < task.epsilon:
        return report
    spent = 0
    reason = "budget exhausted"
    while spent < budget and pool:
        g, f = report.worst_pair()
        choice, choice_val = None, None
        for cand in pool:
            if spent >= budget:
                break
            trial = convolve(cand, beta)
            if len(trial) > support_cap:
                reason = f"support exceeded {support_cap} entries"
                spent = budget
                break
            spent += 1
            # scoring only; the accepted β gets a fully certified report below
            val = _pair_result(trial, g, f, task.metric, certify=False).value
            if choice_val is None or val < choice_val:
                choice, choice_val = trial, val
        if choice is None:
            break
        beta = choice
        report = defect(beta, task, mode, threads)
        if report.defect < best.defect:
            best = report
        if report.defect < task.epsilon:
            return report
    if not pool:
        reason = "empty candidate pool"
    obstruction = homomorphism_obstruction(best.beta, task)
    if obstruction is None:
        return Failure(best, spent, reason)
    bound, pair, witness = obstruction
    return Failure(best, spent, reason, bound, pair, witness)


@dataclass
class SweepPoint:
    M: int
    defect: Fraction
    anchored_max: Fraction
    bound: Fraction
    per_element: dict = field(default_factory=dict)


def dihedral_sweep(N: int, Ms: Iterable[int], threads: int | None = None) -> list[SweepPoint]:
    """Exact defects of dihedral_folner(N, M) on E_N for each M."""
    task = word_metric_task(DihedralInf(), dihedral_target_set(N), Fraction(1, N))
    out = []
    for M in Ms:
        beta = dihedral_folner(N, M)
        pairs = defect(beta, task, "pairs", threads)
        anchored = defect(beta, task, "anchored", threads)
        per = {g: r.value for (g, _), r in anchored.per_pair.items()}
        out.append(SweepPoint(M, pairs.defect, anchored.defect, dihedral_bound(N, M), per))
    return out
