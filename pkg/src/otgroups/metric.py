"""Finite écarts (pseudometrics) with exact rational distances.

A :class:`MetricSpace` either stores an explicit distance matrix or wraps a
distance oracle whose answers are memoised per unordered pair.  Distances of
zero between distinct points are allowed and kept as they are.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .rational import common_denominator, from_float, to_fraction

Point = Hashable

FLOAT_TOLERANCE = Fraction(1, 10**9)


class EmptySetError(ValueError):
    pass


class UnknownPointError(KeyError):
    pass


class MetricSpace:
    """A finite (or lazily enumerated) point set with a distance function.

    Build one with :meth:`from_matrix` or :meth:`from_oracle`.  Instances are
    treated as immutable; the only mutable state is the oracle memo, which is
    a plain dict filled with ``setdefault`` so concurrent readers agree.
    """

    def __init__(
        self,
        points: Sequence[Point] | None,
        *,
        matrix: Sequence[Sequence[Fraction]] | None = None,
        oracle: Callable[[Point, Point], Fraction] | None = None,
        sort_key: Callable[[Point], object] | None = None,
        exact: bool = True,
        name: str | None = None,
    ):
        if (matrix is None) == (oracle is None):
            raise ValueError("give exactly one of matrix= or oracle=")
        self.points = None if points is None else tuple(points)
        self.exact = exact
        self.name = name
        self._matrix = None
        self._oracle = oracle
        self._memo: dict = {}
        self._index = None
        if self.points is not None:
            self._index = {p: i for i, p in enumerate(self.points)}
            if len(self._index) != len(self.points):
                raise ValueError("duplicate point identifiers")
        if matrix is not None:
            if self.points is None:
                raise ValueError("explicit mode needs a point list")
            n = len(self.points)
            if len(matrix) != n or any(len(row) != n for row in matrix):
                raise ValueError(f"matrix must be {n}x{n}")
            self._matrix = tuple(tuple(row) for row in matrix)
        self._sort_key = sort_key

    @classmethod
    def from_matrix(cls, points: Sequence[Point], matrix, *, exact: bool = True, name=None):
        conv = to_fraction if exact else _loose_fraction
        rows = [[conv(v) for v in row] for row in matrix]
        return cls(points, matrix=rows, exact=exact, name=name)

    @classmethod
    def from_oracle(cls, oracle, points: Sequence[Point] | None = None, *, sort_key=None,
                    exact: bool = True, name=None):
        return cls(points, oracle=oracle, sort_key=sort_key, exact=exact, name=name)

    @property
    def mode(self) -> str:
        return "explicit-matrix" if self._matrix is not None else "oracle-with-memo"

    @property
    def is_explicit(self) -> bool:
        return self._matrix is not None

    def __contains__(self, p) -> bool:
        if self._index is not None:
            return p in self._index
        return True

    def __len__(self) -> int:
        if self.points is None:
            raise TypeError("lazily enumerated space has no length")
        return len(self.points)

    def __repr__(self) -> str:
        size = "lazy" if self.points is None else len(self.points)
        label = f" {self.name}" if self.name else ""
        return f"<MetricSpace{label} {self.mode} points={size}>"

    def index(self, p) -> int:
        try:
            return self._index[p]
        except (KeyError, TypeError):
            raise UnknownPointError(p) from None

    def sort_key(self, p):
        if self._index is not None and p in self._index:
            return self._index[p]
        if self._sort_key is not None:
            return self._sort_key(p)
        return p

    def sorted(self, pts: Iterable[Point]) -> list:
        return sorted(pts, key=self.sort_key)

    def raw_dist(self, x, y) -> Fraction:
        """Distance without memoisation (used by validation)."""
        if self._matrix is not None:
            return self._matrix[self.index(x)][self.index(y)]
        if self._index is not None:
            self.index(x), self.index(y)
        value = self._oracle(x, y)
        return to_fraction(value) if self.exact else _loose_fraction(value)

    def dist(self, x, y) -> Fraction:
        if self._matrix is not None:
            return self._matrix[self.index(x)][self.index(y)]
        if x == y:
            return Fraction(0)
        key = frozenset((x, y))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._memo.setdefault(key, self.raw_dist(x, y))
        return hit

    def matrix_of(self, pts: Sequence[Point]) -> list[list[Fraction]]:
        return [[self.dist(x, y) for y in pts] for x in pts]


def _loose_fraction(value) -> Fraction:
    if isinstance(value, float):
        return from_float(value)
    return to_fraction(value)


@dataclass(frozen=True)
class Violation:
    axiom: str  # "nonnegativity" | "zero-diagonal" | "symmetry" | "triangle"
    witness: tuple
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    probed: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def by_axiom(self, axiom: str) -> list[Violation]:
        return [v for v in self.violations if v.axiom == axiom]


def validate_metric(space: MetricSpace, probe: Sequence[Point] | None = None) -> ValidationReport:
    """Check the écart axioms on every point (explicit mode) or on ``probe``.

    Violations are returned in the report, never raised.  In float mode the
    comparisons allow an absolute slack of 1e-9.
    """
    if probe is None:
        if space.points is None:
            raise ValueError("oracle space without a point list needs an explicit probe set")
        probe = space.points
    pts = list(probe)
    n = len(pts)
    D = [[space.raw_dist(x, y) for y in pts] for x in pts]
    tol = Fraction(0) if space.exact else FLOAT_TOLERANCE
    report = ValidationReport(probed=n)
    out = report.violations

    for i, j in itertools.product(range(n), repeat=2):
        if D[i][j] < -tol:
            out.append(Violation("nonnegativity", (pts[i], pts[j]), f"d={D[i][j]}"))
    for i in range(n):
        if abs(D[i][i]) > tol:
            out.append(Violation("zero-diagonal", (pts[i],), f"d={D[i][i]}"))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(D[i][j] - D[j][i]) > tol:
                out.append(Violation("symmetry", (pts[i], pts[j]),
                                     f"d(x,y)={D[i][j]} != d(y,x)={D[j][i]}"))
    for i, j, k in _triangle_failures(D, tol):
        out.append(Violation("triangle", (pts[i], pts[j], pts[k]),
                             f"d(x,z)={D[i][k]} > d(x,y)+d(y,z)={D[i][j] + D[j][k]}"))
    return report


def _triangle_failures(D, tol: Fraction) -> list[tuple[int, int, int]]:
    """All (x, y, z) with d(x,z) > d(x,y) + d(y,z) + tol, in lexicographic order."""
    n = len(D)
    if n == 0:
        return []
    scale = common_denominator([v for row in D for v in row] + [tol])
    ints = [[int(v * scale) for v in row] for row in D]
    slack = int(tol * scale)
    peak = max(abs(v) for row in ints for v in row)
    if peak < 2**60:
        A = np.array(ints, dtype=np.int64)
        # bad[x, y, z] = A[x, z] > A[x, y] + A[y, z] + slack
        bad = A[:, None, :] > A[:, :, None] + A[None, :, :] + slack
        return [tuple(map(int, t)) for t in np.argwhere(bad)]
    fails = []
    for i, j, k in itertools.product(range(n), repeat=3):
        if ints[i][k] > ints[i][j] + ints[j][k] + slack:
            fails.append((i, j, k))
    return fails


def hausdorff_distance(A: Iterable[Point], B: Iterable[Point], space: MetricSpace) -> Fraction:
    A, B = list(dict.fromkeys(A)), list(dict.fromkeys(B))
    if not A or not B:
        raise EmptySetError("Hausdorff distance needs two non-empty sets")
    forward = max(min(space.dist(a, b) for b in B) for a in A)
    backward = max(min(space.dist(a, b) for a in A) for b in B)
    return max(forward, backward)


def set_distance(A: Iterable[Point], B: Iterable[Point], space: MetricSpace) -> Fraction:
    A, B = list(A), list(B)
    if not A or not B:
        raise EmptySetError("distance between sets needs two non-empty sets")
    return min(space.dist(a, b) for a in A for b in B)


def diameter(A: Iterable[Point], space: MetricSpace) -> Fraction:
    A = list(A)
    return max((space.dist(a, b) for a in A for b in A), default=Fraction(0))


def euclidean_line(points: Iterable[int]) -> MetricSpace:
    """Integers with d(x, y) = |x - y|, as an explicit matrix."""
    pts = list(points)
    return MetricSpace.from_matrix(pts, [[abs(x - y) for y in pts] for x in pts], name="line")


def euclidean_integers() -> MetricSpace:
    """All of ℤ with |x - y|, lazily."""
    return MetricSpace.from_oracle(lambda x, y: abs(x - y), name="Z")
