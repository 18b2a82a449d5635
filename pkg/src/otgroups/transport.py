"""Exact optimal transport between finitely supported measures.

The Arens–Eells norm of a mean-zero measure is solved as an uncapacitated
transportation problem between its positive part (sources) and negative part
(sinks).  All data are scaled to integers, so the successive-shortest-path
solver below runs on Python ints and the node potentials it maintains are an
exact optimal dual, i.e. a 1-Lipschitz witness for Kantorovich duality.

Assignments (equal-size uniform measures) use a separate Hungarian solver so
that the two routes can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .metric import MetricSpace, Point, UnknownPointError
from .rational import common_denominator, to_fraction


class MeanNotZero(ValueError):
    pass


class MeasureError(ValueError):
    pass


class SignedMeasure:
    """Sparse finitely supported signed measure on the points of ``space``.

    Zero entries are never stored.  Arithmetic between measures requires the
    same space object.
    """

    __slots__ = ("entries", "space")

    def __init__(self, entries: Mapping | Iterable = (), space: MetricSpace | None = None):
        if space is None:
            raise ValueError("a SignedMeasure needs a metric space")
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict = {}
        for p, m in items:
            if p not in space:
                raise UnknownPointError(p)
            acc[p] = acc.get(p, Fraction(0)) + to_fraction(m)
        self.entries = {p: m for p, m in acc.items() if m != 0}
        self.space = space

    @classmethod
    def dirac(cls, x, space: MetricSpace, mass=1) -> SignedMeasure:
        return cls({x: mass}, space)

    @classmethod
    def uniform(cls, points: Sequence, space: MetricSpace) -> SignedMeasure:
        """Uniform probability measure on a list of points; repeats add up."""
        w = Fraction(1, len(points))
        return cls([(p, w) for p in points], space)

    def total_mass(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def support(self) -> list:
        return self.space.sorted(self.entries)

    def items(self) -> list[tuple]:
        return [(p, self.entries[p]) for p in self.support()]

    def positive_part(self) -> SignedMeasure:
        return SignedMeasure({p: m for p, m in self.entries.items() if m > 0}, self.space)

    def negative_part(self) -> SignedMeasure:
        return SignedMeasure({p: -m for p, m in self.entries.items() if m < 0}, self.space)

    def is_nonnegative(self) -> bool:
        return all(m > 0 for m in self.entries.values())

    def __getitem__(self, p) -> Fraction:
        return self.entries.get(p, Fraction(0))

    def __len__(self) -> int:
        return len(self.entries)

    def _check(self, other: SignedMeasure) -> None:
        if not isinstance(other, SignedMeasure):
            raise TypeError(f"expected SignedMeasure, got {type(other).__name__}")
        if other.space is not self.space:
            raise ValueError("measures live on different metric spaces")

    def __add__(self, other: SignedMeasure) -> SignedMeasure:
        self._check(other)
        return SignedMeasure(list(self.entries.items()) + list(other.entries.items()), self.space)

    def __sub__(self, other: SignedMeasure) -> SignedMeasure:
        return self + (-other)

    def __neg__(self) -> SignedMeasure:
        return SignedMeasure({p: -m for p, m in self.entries.items()}, self.space)

    def __mul__(self, c) -> SignedMeasure:
        c = to_fraction(c)
        return SignedMeasure({p: c * m for p, m in self.entries.items()}, self.space)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return self.space is other.space and self.entries == other.entries

    def __repr__(self) -> str:
        body = ", ".join(f"{p!r}: {m}" for p, m in self.items())
        return f"SignedMeasure({{{body}}})"


@dataclass(frozen=True)
class Move:
    source: Point
    sink: Point
    mass: Fraction


@dataclass(frozen=True)
class TransportPlan:
    moves: tuple[Move, ...] = ()

    def cost(self, space: MetricSpace) -> Fraction:
        return sum((mv.mass * space.dist(mv.source, mv.sink) for mv in self.moves), Fraction(0))

    def net_flow(self) -> dict:
        """Mass leaving each point minus mass arriving."""
        net: dict = {}
        for mv in self.moves:
            net[mv.source] = net.get(mv.source, Fraction(0)) + mv.mass
            net[mv.sink] = net.get(mv.sink, Fraction(0)) - mv.mass
        return net

    def __len__(self) -> int:
        return len(self.moves)

    def as_tuples(self) -> list[tuple]:
        return [(mv.source, mv.sink, mv.mass) for mv in self.moves]


@dataclass(frozen=True)
class LipschitzWitness:
    values: dict = field(default_factory=dict)

    def __getitem__(self, p) -> Fraction:
        return self.values[p]

    def pair(self, xi: SignedMeasure) -> Fraction:
        """Σ_x ξ(x)·φ(x); missing points raise KeyError."""
        return sum((m * self.values[p] for p, m in xi.entries.items()), Fraction(0))

    def lipschitz_violations(self, space: MetricSpace, on: Iterable | None = None) -> list[tuple]:
        pts = list(self.values) if on is None else list(on)
        bad = []
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                if abs(self.values[x] - self.values[y]) > space.dist(x, y):
                    bad.append((x, y))
        return bad

    def is_lipschitz(self, space: MetricSpace, on: Iterable | None = None) -> bool:
        return not self.lipschitz_violations(space, on)


@dataclass(frozen=True)
class Assignment:
    sigma: tuple[int, ...]  # 0-based: xs[i] is paired with ys[sigma[i]]

    def __post_init__(self):
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise ValueError(f"{self.sigma} is not a permutation")

    def __len__(self) -> int:
        return len(self.sigma)

    def __getitem__(self, i: int) -> int:
        return self.sigma[i]


@dataclass(frozen=True)
class Solution:
    value: Fraction
    plan: TransportPlan
    witness: LipschitzWitness


def _require_mean_zero(xi: SignedMeasure) -> None:
    mass = xi.total_mass()
    if mass != 0:
        raise MeanNotZero(f"total mass is {mass}, expected 0")


def solve(xi: SignedMeasure) -> Solution:
    """Optimal plan and optimal dual potential for a mean-zero measure."""
    _require_mean_zero(xi)
    space = xi.space
    if not xi.entries:
        return Solution(Fraction(0), TransportPlan(), LipschitzWitness({}))
    sources = [p for p in xi.support() if xi[p] > 0]
    sinks = [p for p in xi.support() if xi[p] < 0]

    mass_scale = common_denominator(xi.entries.values())
    supply = [int(xi[x] * mass_scale) for x in sources]
    demand = [int(-xi[y] * mass_scale) for y in sinks]
    costs = [[space.dist(x, y) for y in sinks] for x in sources]
    cost_scale = common_denominator(c for row in costs for c in row)
    C = [[int(c * cost_scale) for c in row] for row in costs]
    if any(c < 0 for row in C for c in row):
        raise ValueError("negative distance in transport costs")

    flow, pot = _successive_shortest_paths(supply, demand, C)

    m = len(sources)
    moves = []
    total = 0
    for i, x in enumerate(sources):
        for j, y in enumerate(sinks):
            f = flow[i][j]
            if f:
                moves.append(Move(x, y, Fraction(f, mass_scale)))
                total += f * C[i][j]
    value = Fraction(total, mass_scale * cost_scale)

    # phi = -potential; normalised to vanish at the first support point
    phi = {x: Fraction(-pot[i], cost_scale) for i, x in enumerate(sources)}
    phi.update({y: Fraction(-pot[m + j], cost_scale) for j, y in enumerate(sinks)})
    anchor = phi[xi.support()[0]]
    witness = LipschitzWitness({p: phi[p] - anchor for p in xi.support()})
    return Solution(value, TransportPlan(tuple(moves)), witness)


def _successive_shortest_paths(supply: list[int], demand: list[int], C: list[list[int]]):
    """Min-cost flow on the complete bipartite network sources -> sinks.

    Forward arcs are uncapacitated with cost ``C[i][j]``; a reverse arc exists
    wherever flow is positive.  Potentials keep every residual reduced cost
    non-negative, so a dense Dijkstra finds each augmenting path.  Returns the
    flow matrix and the final potentials (sources first, then sinks).
    """
    m, k = len(supply), len(demand)
    V = m + k
    left = list(supply)
    need = list(demand)
    flow = [[0] * k for _ in range(m)]
    pot = [0] * V
    INF = None

    while any(need):
        dist = [INF] * V
        done = [False] * V
        prev = [-1] * V
        for i in range(m):
            if left[i]:
                dist[i] = 0
        target = -1
        while True:
            u, best = -1, None
            for v in range(V):
                if not done[v] and dist[v] is not None and (best is None or dist[v] < best):
                    u, best = v, dist[v]
            if u < 0:
                break
            done[u] = True
            if u >= m and need[u - m]:
                target = u
                break
            if u < m:
                pu = pot[u]
                row = C[u]
                for j in range(k):
                    v = m + j
                    if done[v]:
                        continue
                    nd = best + row[j] + pu - pot[v]
                    if dist[v] is None or nd < dist[v]:
                        dist[v], prev[v] = nd, u
            else:
                j = u - m
                pu = pot[u]
                for i in range(m):
                    if flow[i][j] and not done[i]:
                        nd = best - C[i][j] + pu - pot[i]
                        if dist[i] is None or nd < dist[i]:
                            dist[i], prev[i] = nd, u
        if target < 0:
            raise RuntimeError("no augmenting path although demand remains")

        D = dist[target]
        for v in range(V):
            pot[v] += dist[v] if done[v] else D

        # walk back to the originating source and find the bottleneck
        path = []
        v = target
        while prev[v] >= 0:
            path.append((prev[v], v))
            v = prev[v]
        root = v
        delta = min(left[root], need[target - m])
        for u, w in path:
            if u >= m:  # reverse arc sink u -> source w cancels flow[w][u-m]
                delta = min(delta, flow[w][u - m])
        for u, w in path:
            if u < m:
                flow[u][w - m] += delta
            else:
                flow[w][u - m] -= delta
        left[root] -= delta
        need[target - m] -= delta
    return flow, pot


def arens_eells_norm(xi: SignedMeasure) -> tuple[Fraction, TransportPlan]:
    """Minimal transport cost of a mean-zero measure together with an optimal plan.

    Plans only move mass from points where ξ > 0 to points where ξ < 0.
    """
    sol = solve(xi)
    return sol.value, sol.plan


def kantorovich_dual(xi: SignedMeasure) -> tuple[Fraction, LipschitzWitness]:
    sol = solve(xi)
    return sol.witness.pair(xi), sol.witness


def verify_certificate(xi: SignedMeasure, plan: TransportPlan, witness: LipschitzWitness) -> bool:
    """True iff the plan balances ξ in reduced form, the witness is 1-Lipschitz
    on supp(ξ), and primal cost equals the dual pairing exactly."""
    space = xi.space
    for mv in plan.moves:
        if mv.mass <= 0 or xi[mv.source] <= 0 or xi[mv.sink] >= 0:
            return False
    net = plan.net_flow()
    if {p for p, v in net.items() if v != 0} - set(xi.entries):
        return False
    if any(net.get(p, 0) != m for p, m in xi.entries.items()):
        return False
    supp = xi.support()
    if any(p not in witness.values for p in supp):
        return False
    if not witness.is_lipschitz(space, supp):
        return False
    return plan.cost(space) == witness.pair(xi)


def _check_probability(mu: SignedMeasure, label: str) -> None:
    if not mu.is_nonnegative():
        raise MeasureError(f"{label} has negative entries")
    if mu.total_mass() != 1:
        raise MeasureError(f"{label} has total mass {mu.total_mass()}, expected 1")


def optimal_coupling(mu: SignedMeasure, nu: SignedMeasure) -> tuple[Fraction, TransportPlan]:
    """Wasserstein distance and a coupling of (μ, ν), diagonal moves included."""
    _check_probability(mu, "mu")
    _check_probability(nu, "nu")
    value, plan = arens_eells_norm(mu - nu)
    stay = []
    for p in mu.space.sorted(set(mu.entries) & set(nu.entries)):
        stay.append(Move(p, p, min(mu[p], nu[p])))
    return value, TransportPlan(tuple(stay) + plan.moves)


def wasserstein(mu: SignedMeasure, nu: SignedMeasure) -> Fraction:
    return optimal_coupling(mu, nu)[0]


def optimal_assignment(xs: Sequence, ys: Sequence, space: MetricSpace) -> tuple[Assignment, Fraction]:
    """Cheapest pairing of ``xs`` with ``ys``; ties go to the lexicographically least σ."""
    n = len(xs)
    if n != len(ys):
        raise ValueError(f"length mismatch: {n} vs {len(ys)}")
    if n == 0:
        raise ValueError("need at least one point on each side")
    costs = [[space.dist(x, y) for y in ys] for x in xs]
    scale = common_denominator(c for row in costs for c in row)
    C = [[int(c * scale) for c in row] for row in costs] if scale != 1 else [[int(c) for c in row] for row in costs]
    u, v, row_match = _hungarian(C)
    sigma = _lex_least_tight_matching(C, u, v, row_match)
    total = sum(C[i][sigma[i]] for i in range(n))
    return Assignment(tuple(sigma)), Fraction(total, scale)


def _hungarian(C: list[list[int]]):
    """O(n^3) Hungarian method with potentials (rows u, columns v).

    On exit C[i][j] - u[i] - v[j] >= 0 everywhere, with equality on the
    returned matching ``row_match``.
    """
    n = len(C)
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    col_owner = [0] * (n + 1)  # 1-based row matched to column j, 0 = free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        col_owner[0] = i
        j0 = 0
        minv = [None] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = col_owner[j0]
            delta, j1 = None, -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = C[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j], way[j] = cur, j0
                if delta is None or minv[j] < delta:
                    delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[col_owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if col_owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            col_owner[j0] = col_owner[j1]
            j0 = j1
    row_match = [0] * n
    for j in range(1, n + 1):
        row_match[col_owner[j] - 1] = j - 1
    return [u[i] for i in range(1, n + 1)], [v[j] for j in range(1, n + 1)], row_match


def _lex_least_tight_matching(C, u, v, row_match) -> list[int]:
    # Every optimal permutation uses only tight edges of an optimal dual, and
    # every perfect matching of tight edges is optimal.
    n = len(C)
    tight = [[j for j in range(n) if C[i][j] - u[i] - v[j] == 0] for i in range(n)]
    match_row = list(row_match)
    match_col = [0] * n
    for i, j in enumerate(match_row):
        match_col[j] = i
    fixed = [False] * n

    def reroute(start_row: int, goal_col: int, banned_col: int, skip_row: int):
        # alternating path from start_row to goal_col through unfixed rows
        seen = {banned_col}
        stack = [(start_row, iter(tight[start_row]))]
        trail: list[tuple[int, int]] = []
        while stack:
            r, it = stack[-1]
            advanced = False
            for c in it:
                if c in seen:
                    continue
                seen.add(c)
                if c == goal_col:
                    return trail + [(r, c)]
                r2 = match_col[c]
                if fixed[r2] or r2 == skip_row:
                    continue
                trail.append((r, c))
                stack.append((r2, iter(tight[r2])))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if trail:
                    trail.pop()
        return None

    for i in range(n):
        for j in tight[i]:
            if fixed[match_col[j]] and match_col[j] != i:
                continue
            if match_row[i] == j:
                break
            k = match_col[j]
            path = reroute(k, match_row[i], j, i)
            if path is None:
                continue
            for r, c in path:
                match_row[r] = c
                match_col[c] = r
            match_row[i] = j
            match_col[j] = i
            break
        fixed[i] = True
    return match_row
