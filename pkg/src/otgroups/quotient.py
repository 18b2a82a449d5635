"""Finite isometric actions, the orbit space X⫽G and the pushforward A.

On a finite space orbit closures are orbits, and the Hausdorff distance
between two orbits reduces to min_h d(hx, y).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .groups import Group
from .metric import MetricSpace, hausdorff_distance
from .transport import MeanNotZero, SignedMeasure, arens_eells_norm
from .rational import to_fraction


class ActionError(ValueError):
    pass


class FiniteAction:
    """A finite group acting on the points of an explicit metric space.

    ``elements`` lists the group, ``act(g, x)`` applies g to a point and
    ``compose(g, h)`` is the product gh.  Use :meth:`from_permutations` or
    :meth:`from_group` and call :meth:`validate` (the constructors do).
    """

    def __init__(self, space: MetricSpace, elements: Sequence, act: Callable, compose: Callable,
                 identity, label: str = "G"):
        if not space.is_explicit:
            raise ActionError("finite actions need an explicit metric space")
        self.space = space
        self.elements = list(elements)
        self.act = act
        self.compose = compose
        self.identity = identity
        self.label = label

    @classmethod
    def from_permutations(cls, space: MetricSpace, perms: Sequence[Sequence[int]]) -> FiniteAction:
        """Group given as image-index lists, closed under composition."""
        n = len(space)
        group = []
        for p in perms:
            p = tuple(int(i) for i in p)
            if sorted(p) != list(range(n)):
                raise ActionError(f"{list(p)} is not a permutation of {n} points")
            if p not in group:
                group.append(p)
        if not group:
            raise ActionError("empty permutation list")
        members = set(group)
        for p, q in itertools.product(group, repeat=2):
            if tuple(p[q[i]] for i in range(n)) not in members:
                raise ActionError("permutations are not closed under composition")
        pts = space.points
        identity = tuple(range(n))
        action = cls(space, group, lambda p, x: pts[p[space.index(x)]],
                     lambda p, q: tuple(p[q[i]] for i in range(n)), identity,
                     label=f"perm group of order {len(group)}")
        action.validate()
        return action

    @classmethod
    def from_group(cls, space: MetricSpace, group: Group, act: Callable) -> FiniteAction:
        if not group.is_finite():
            raise ActionError(f"{group!r} is not finite")
        action = cls(space, group.elements(), act, group.multiply, group.identity, label=repr(group))
        action.validate()
        return action

    def problems(self) -> list[str]:
        pts = self.space.points
        out = []
        if self.identity not in self.elements:
            out.append("identity missing from the group")
        for x in pts:
            if self.act(self.identity, x) != x:
                out.append(f"identity moves {x!r}")
        for g, h in itertools.product(self.elements, repeat=2):
            gh = self.compose(g, h)
            for x in pts:
                if self.act(gh, x) != self.act(g, self.act(h, x)):
                    out.append(f"act(gh,x) != act(g,act(h,x)) at x={x!r}")
                    break
        for g in self.elements:
            for x, y in itertools.combinations(pts, 2):
                if self.space.dist(self.act(g, x), self.act(g, y)) != self.space.dist(x, y):
                    out.append(f"{g!r} is not an isometry on ({x!r}, {y!r})")
                    break
        return out

    def validate(self) -> None:
        bad = self.problems()
        if bad:
            raise ActionError("; ".join(bad[:5]))


def orbits(action: FiniteAction) -> list[tuple]:
    """Orbit partition; each orbit sorted by point order, orbits by first point."""
    seen = set()
    out = []
    for x in action.space.points:
        if x in seen:
            continue
        orb = {action.act(g, x) for g in action.elements}
        seen |= orb
        out.append(tuple(action.space.sorted(orb)))
    return out


@dataclass
class QuotientSpace:
    base: MetricSpace
    orbits: list
    class_of: dict
    metric: MetricSpace


def _orbit_label(orb: tuple) -> str:
    return "{" + ",".join(str(p) for p in orb) + "}"


def quotient_metric(action: FiniteAction) -> QuotientSpace:
    """X⫽G with d_H(Gx, Gy) = min over h of d(hx, y).  Orbit tuples are the points."""
    orbs = orbits(action)
    space = action.space
    class_of = {x: orb for orb in orbs for x in orb}
    matrix = []
    for b in orbs:
        row = []
        for c in orbs:
            row.append(min(space.dist(action.act(h, b[0]), c[0]) for h in action.elements))
        matrix.append(row)
    qspace = MetricSpace(orbs, matrix=matrix, exact=space.exact, name=f"{space.name or 'X'}//{action.label}")
    return QuotientSpace(space, orbs, class_of, qspace)


def orbit_hausdorff(q: QuotientSpace, b: tuple, c: tuple) -> Fraction:
    """Hausdorff distance between two orbits computed from the max–min formula."""
    return hausdorff_distance(b, c, q.base)


def pushforward(xi: SignedMeasure, q: QuotientSpace) -> SignedMeasure:
    """(Aξ)(c) = Σ_{x ∈ c} ξ(x)."""
    if xi.total_mass() != 0:
        raise MeanNotZero(f"total mass is {xi.total_mass()}, expected 0")
    if xi.space is not q.base:
        raise ValueError("measure is not on the acted-upon space")
    return SignedMeasure([(q.class_of[x], m) for x, m in xi.entries.items()], q.metric)


def lift(zeta: SignedMeasure, q: QuotientSpace, epsilon=0) -> SignedMeasure:
    """A measure ξ on X with Aξ = ζ and ‖ξ‖ ≤ (1+ε)‖ζ‖.

    ζ is decomposed along its own optimal plan and each move b → c is
    realised between representatives x ∈ b, y ∈ c at distance d_H(b, c).
    Minima are attained on finite sets, so the result is isometric for every
    ε ≥ 0.
    """
    if to_fraction(epsilon) < 0:
        raise ValueError("epsilon must be non-negative")
    if zeta.total_mass() != 0:
        raise MeanNotZero(f"total mass is {zeta.total_mass()}, expected 0")
    base = q.base
    _, plan = arens_eells_norm(zeta)
    parts = []
    for mv in plan.moves:
        x, y = min(itertools.product(mv.source, mv.sink),
                   key=lambda xy: (base.dist(*xy), base.sort_key(xy[0]), base.sort_key(xy[1])))
        parts += [(x, mv.mass), (y, -mv.mass)]
    return SignedMeasure(parts, base)
