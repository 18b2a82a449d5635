"""Finitely generated groups, word metrics and the simplex ΔG.

Group elements are their own normal forms (ints or tuples), so they hash and
compare directly.  ``canonical`` turns an element into the string key used in
files; ``parse`` reverses it.
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .metric import MetricSpace
from .rational import to_fraction
from .transport import SignedMeasure

DEFAULT_RADIUS_CAP = 64


class RadiusExceeded(ValueError):
    def __init__(self, element, cap: int, pair=None):
        self.element = element
        self.cap = cap
        self.pair = pair
        msg = f"word length of {element!r} exceeds radius cap {cap}"
        if pair is not None:
            msg += f" (pair {pair!r})"
        super().__init__(msg)


class GroupMismatch(ValueError):
    pass


class Group:
    """Interface shared by the built-in groups and user plugins."""

    identity = None
    generator_names: tuple[str, ...] = ()

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    @property
    def generators(self) -> tuple:
        raise NotImplementedError

    def canonical(self, a) -> str:
        return repr(a)

    def parse(self, key: str):
        """Inverse of :meth:`canonical`; by default keys are words in the generators."""
        return parse_word(self, key)

    def sort_key(self, a):
        return a

    def is_finite(self) -> bool:
        return False

    def elements(self) -> list:
        raise TypeError(f"{self!r} is infinite")

    def homomorphisms(self) -> list[Callable]:
        """Homomorphisms to ℚ with |h(s)| <= 1 on the default generators."""
        return []

    def descriptor(self) -> dict:
        raise NotImplementedError

    def named_generators(self) -> dict:
        return dict(zip(self.generator_names, self.generators))

    def power(self, a, k: int):
        base = a if k >= 0 else self.inverse(a)
        out = self.identity
        for _ in range(abs(k)):
            out = self.multiply(out, base)
        return out

    def product(self, elems: Iterable):
        out = self.identity
        for e in elems:
            out = self.multiply(out, e)
        return out


@dataclass(frozen=True)
class Integers(Group):
    identity = 0
    generator_names = ("a",)

    def multiply(self, a, b):
        return a + b

    def inverse(self, a):
        return -a

    @property
    def generators(self):
        return (1,)

    def canonical(self, a) -> str:
        return str(a)

    def parse(self, key: str):
        return int(key)

    def homomorphisms(self):
        return [lambda n: Fraction(n)]

    def descriptor(self):
        return {"type": "Zk", "k": 1}

    def __repr__(self):
        return "Z"


@dataclass(frozen=True)
class ZPowK(Group):
    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")

    @property
    def identity(self):
        return (0,) * self.k

    @property
    def generator_names(self):
        return tuple(f"x{i + 1}" for i in range(self.k))

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        return tuple(-x for x in a)

    @property
    def generators(self):
        return tuple(tuple(int(i == j) for j in range(self.k)) for i in range(self.k))

    def canonical(self, a) -> str:
        return "(" + ",".join(map(str, a)) + ")"

    def parse(self, key: str):
        body = key.strip()
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        out = tuple(int(t) for t in body.split(",") if t.strip())
        if len(out) != self.k:
            raise ValueError(f"{key!r} is not an element of Z^{self.k}")
        return out

    def homomorphisms(self):
        return [lambda a, i=i: Fraction(a[i]) for i in range(self.k)]

    def descriptor(self):
        return {"type": "Zk", "k": self.k}

    def __repr__(self):
        return f"Z^{self.k}"


@dataclass(frozen=True)
class CyclicZ(Group):
    m: int = 2
    identity = 0
    generator_names = ("a",)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")

    def multiply(self, a, b):
        return (a + b) % self.m

    def inverse(self, a):
        return (-a) % self.m

    @property
    def generators(self):
        return (1 % self.m,)

    def canonical(self, a) -> str:
        return str(a)

    def parse(self, key: str):
        return int(key) % self.m

    def is_finite(self):
        return True

    def elements(self):
        return list(range(self.m))

    def descriptor(self):
        return {"type": "cyclic", "m": self.m}

    def __repr__(self):
        return f"Z/{self.m}"


@dataclass(frozen=True)
class DihedralInf(Group):
    """D∞ with normal form (n, s) meaning τⁿσˢ."""

    identity = (0, 0)
    generator_names = ("t", "s")

    def multiply(self, a, b):
        (n, s), (m, t) = a, b
        return (n + (m if s == 0 else -m), s ^ t)

    def inverse(self, a):
        n, s = a
        return (-n, 0) if s == 0 else (n, 1)

    @property
    def generators(self):
        return ((1, 0), (0, 1))

    def canonical(self, a) -> str:
        n, s = a
        parts = []
        if n:
            parts.append("t" if n == 1 else f"t^{n}")
        if s:
            parts.append("s")
        return " ".join(parts) or "e"

    def descriptor(self):
        return {"type": "dihedral_inf"}

    def __repr__(self):
        return "D_inf"


@dataclass(frozen=True)
class DirectProduct(Group):
    left: Group
    right: Group

    @property
    def identity(self):
        return (self.left.identity, self.right.identity)

    @property
    def generator_names(self):
        names = list(self.left.generator_names)
        for nm in self.right.generator_names:
            while nm in names:
                nm += "'"
            names.append(nm)
        return tuple(names)

    def multiply(self, a, b):
        return (self.left.multiply(a[0], b[0]), self.right.multiply(a[1], b[1]))

    def inverse(self, a):
        return (self.left.inverse(a[0]), self.right.inverse(a[1]))

    @property
    def generators(self):
        return tuple((s, self.right.identity) for s in self.left.generators) + tuple(
            (self.left.identity, t) for t in self.right.generators)

    def canonical(self, a) -> str:
        return f"({self.left.canonical(a[0])}|{self.right.canonical(a[1])})"

    def parse(self, key: str):
        body = key.strip()
        if not (body.startswith("(") and body.endswith(")")):
            return parse_word(self, key)
        body = body[1:-1]
        depth = 0
        for i, ch in enumerate(body):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "|" and depth == 0:
                return (self.left.parse(body[:i]), self.right.parse(body[i + 1:]))
        raise ValueError(f"malformed product key {key!r}")

    def sort_key(self, a):
        return (self.left.sort_key(a[0]), self.right.sort_key(a[1]))

    def is_finite(self):
        return self.left.is_finite() and self.right.is_finite()

    def elements(self):
        return list(itertools.product(self.left.elements(), self.right.elements()))

    def homomorphisms(self):
        return [lambda a, h=h: h(a[0]) for h in self.left.homomorphisms()] + [
            lambda a, h=h: h(a[1]) for h in self.right.homomorphisms()]

    def descriptor(self):
        return {"type": "product", "left": self.left.descriptor(), "right": self.right.descriptor()}

    def __repr__(self):
        return f"({self.left!r} x {self.right!r})"


class FunctionGroup(Group):
    """User-supplied group: multiplication, inverse and normal forms as callables.

    Elements must already be hashable normal forms.  ``parse`` defaults to
    evaluating words in the named generators.
    """

    def __init__(self, identity, multiply, inverse, generators: Sequence, *,
                 names: Sequence[str] | None = None, canonical=None, parse=None,
                 sort_key=None, elements: Sequence | None = None, homomorphisms=(), name="G"):
        self.identity = identity
        self._mul, self._inv = multiply, inverse
        self._gens = tuple(generators)
        self.generator_names = tuple(names) if names else tuple(f"g{i}" for i in range(len(self._gens)))
        self._canonical, self._parse, self._sort_key = canonical, parse, sort_key
        self._elements = None if elements is None else list(elements)
        self._homs = list(homomorphisms)
        self.name = name

    def multiply(self, a, b):
        return self._mul(a, b)

    def inverse(self, a):
        return self._inv(a)

    @property
    def generators(self):
        return self._gens

    def canonical(self, a):
        return self._canonical(a) if self._canonical else repr(a)

    def parse(self, key):
        return self._parse(key) if self._parse else parse_word(self, key)

    def sort_key(self, a):
        return self._sort_key(a) if self._sort_key else a

    def is_finite(self):
        return self._elements is not None

    def elements(self):
        if self._elements is None:
            raise TypeError(f"{self.name} is infinite")
        return list(self._elements)

    def homomorphisms(self):
        return list(self._homs)

    def descriptor(self):
        return {"type": "plugin", "name": self.name}

    def __repr__(self):
        return self.name


_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)(?:\^(-?\d+))?$")


def parse_word(group: Group, word: str, names: Mapping[str, object] | None = None):
    """Evaluate a word such as ``"t^2 s"`` or ``"x1*x2^-1"``; ``"e"`` is the identity."""
    table = dict(group.named_generators() if names is None else names)
    out = group.identity
    for tok in re.split(r"[\s*]+", word.strip()):
        if not tok or tok in ("e", "1") and tok not in table:
            continue
        m = _TOKEN.match(tok)
        if not m or m.group(1) not in table:
            raise ValueError(f"cannot parse {tok!r} in word {word!r}; generators are {sorted(table)}")
        k = int(m.group(2)) if m.group(2) else 1
        out = group.multiply(out, group.power(table[m.group(1)], k))
    return out


def group_from_descriptor(desc: Mapping) -> Group:
    kind = desc.get("type")
    if kind == "Zk":
        k = int(desc.get("k", 1))
        return Integers() if k == 1 else ZPowK(k)
    if kind == "cyclic":
        return CyclicZ(int(desc["m"]))
    if kind == "dihedral_inf":
        return DihedralInf()
    if kind == "product":
        return DirectProduct(group_from_descriptor(desc["left"]), group_from_descriptor(desc["right"]))
    raise ValueError(f"unknown group descriptor {desc!r}")


class WordMetric:
    """Word length over S ∪ S⁻¹ by breadth-first search from the identity.

    The ball is grown one sphere at a time and shared by every query; growth
    is serialised by a lock, lookups are lock-free.
    """

    def __init__(self, group: Group, generators: Sequence | None = None,
                 radius_cap: int = DEFAULT_RADIUS_CAP):
        if radius_cap < 1:
            raise ValueError("radius_cap must be >= 1")
        self.group = group
        self.generators = tuple(group.generators if generators is None else generators)
        if not self.generators:
            raise ValueError("word metric needs at least one generator")
        steps = []
        for s in self.generators:
            for t in (s, group.inverse(s)):
                if t not in steps:
                    steps.append(t)
        self._steps = tuple(steps)
        self.radius_cap = radius_cap
        self._ball = {group.identity: 0}
        self._frontier = [group.identity]
        self._radius = 0
        self._lock = threading.Lock()

    @property
    def radius(self) -> int:
        return self._radius

    def _grow(self) -> bool:
        with self._lock:
            if not self._frontier:
                return False
            nxt = []
            r = self._radius + 1
            for g in self._frontier:
                for s in self._steps:
                    h = self.group.multiply(g, s)
                    if h not in self._ball:
                        self._ball[h] = r
                        nxt.append(h)
            self._frontier = nxt
            self._radius = r
            return True

    def length(self, g) -> int:
        while True:
            d = self._ball.get(g)
            if d is not None:
                return d
            if self._radius >= self.radius_cap:
                raise RadiusExceeded(g, self.radius_cap)
            if not self._grow():
                raise ValueError(f"{g!r} is not in the subgroup generated by {self.generators}")

    def __call__(self, g, f) -> int:
        """d_S(g, f) = |f⁻¹g|_S."""
        try:
            return self.length(self.group.multiply(self.group.inverse(f), g))
        except RadiusExceeded as exc:
            raise RadiusExceeded(exc.element, exc.cap, pair=(g, f)) from None

    def ball(self, radius: int) -> list:
        """Elements of word length <= radius, sorted by (length, sort key)."""
        if radius > self.radius_cap:
            raise RadiusExceeded(f"ball of radius {radius}", self.radius_cap)
        while self._radius < radius and self._grow():
            pass
        pts = [g for g, d in self._ball.items() if d <= radius]
        return sorted(pts, key=lambda g: (self._ball[g], self.group.sort_key(g)))


_metric_cache: dict = {}
_cache_lock = threading.Lock()


def get_word_metric(group: Group, generators: Sequence | None = None,
                    radius_cap: int = DEFAULT_RADIUS_CAP) -> WordMetric:
    gens = tuple(group.generators if generators is None else generators)
    key = (group, gens, radius_cap)
    try:
        hit = _metric_cache.get(key)
    except TypeError:  # unhashable plugin group
        return WordMetric(group, gens, radius_cap)
    if hit is None:
        with _cache_lock:
            hit = _metric_cache.setdefault(key, WordMetric(group, gens, radius_cap))
    return hit


def word_metric(g, f, group: Group, radius_cap: int = DEFAULT_RADIUS_CAP, generators=None) -> int:
    return get_word_metric(group, generators, radius_cap)(g, f)


def word_metric_space(group: Group, generators: Sequence | None = None,
                      radius_cap: int = DEFAULT_RADIUS_CAP) -> MetricSpace:
    """Lazily enumerated metric space on the group with the word metric."""
    wm = get_word_metric(group, generators, radius_cap)
    space = MetricSpace.from_oracle(wm, sort_key=group.sort_key, name=f"{group!r} word metric")
    space.group = group
    space.word_metric = wm
    return space


class SimplexElement:
    """Finitely supported probability measure on a group (an element of ΔG)."""

    __slots__ = ("weights", "group")

    def __init__(self, weights: Mapping | Iterable, group: Group):
        items = weights.items() if isinstance(weights, Mapping) else weights
        acc: dict = {}
        for g, w in items:
            acc[g] = acc.get(g, Fraction(0)) + to_fraction(w)
        if any(w < 0 for w in acc.values()):
            raise ValueError("simplex weights must be positive")
        self.weights = {g: w for g, w in acc.items() if w != 0}
        total = sum(self.weights.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"simplex weights sum to {total}, expected 1")
        self.group = group

    @classmethod
    def dirac(cls, g, group: Group) -> SimplexElement:
        return cls({g: 1}, group)

    @classmethod
    def uniform(cls, elems: Sequence, group: Group) -> SimplexElement:
        """Uniform measure on a list (repetitions count with multiplicity)."""
        if not elems:
            raise ValueError("uniform measure on an empty list")
        w = Fraction(1, len(elems))
        return cls([(g, w) for g in elems], group)

    def support(self) -> list:
        return sorted(self.weights, key=self.group.sort_key)

    def items(self) -> list[tuple]:
        return [(g, self.weights[g]) for g in self.support()]

    def __getitem__(self, g) -> Fraction:
        return self.weights.get(g, Fraction(0))

    def __len__(self) -> int:
        return len(self.weights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplexElement):
            return NotImplemented
        return self.group == other.group and self.weights == other.weights

    def __repr__(self) -> str:
        body = ", ".join(f"{self.group.canonical(g)}: {w}" for g, w in self.items())
        return f"SimplexElement({{{body}}})"


def _same_group(a: SimplexElement, b: SimplexElement) -> None:
    if a.group != b.group:
        raise GroupMismatch(f"{a.group!r} vs {b.group!r}")


def convolve(alpha: SimplexElement, beta: SimplexElement) -> SimplexElement:
    """(α∗β)(h) = Σ_g α(g)·β(g⁻¹h)."""
    _same_group(alpha, beta)
    G = alpha.group
    acc: dict = {}
    for g, a in alpha.weights.items():
        for f, b in beta.weights.items():
            h = G.multiply(g, f)
            acc[h] = acc.get(h, Fraction(0)) + a * b
    return SimplexElement(acc, G)


def translate(beta: SimplexElement, g, side: str = "right") -> SimplexElement:
    G = beta.group
    if side == "right":
        return SimplexElement({G.multiply(h, g): w for h, w in beta.weights.items()}, G)
    if side == "left":
        return SimplexElement({G.multiply(g, h): w for h, w in beta.weights.items()}, G)
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def as_signed_measure(beta: SimplexElement, space: MetricSpace) -> SignedMeasure:
    return SignedMeasure(beta.weights, space)


def uniform_ball(group: Group, radius: int, generators=None,
                 radius_cap: int = DEFAULT_RADIUS_CAP) -> SimplexElement:
    return SimplexElement.uniform(get_word_metric(group, generators, radius_cap).ball(radius), group)
