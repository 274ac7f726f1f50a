"""Simple closed curves on the once-punctured torus.

An isotopy class of essential simple closed curves is a reduced rational
slope p/q, with 1/0 for the vertical class.  The mapping class group is
PSL(2, Z) acting on slopes by integer matrices, and the geometric
intersection number of two slopes is |p1*q2 - p2*q1|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class SurfaceKind:
    """Topological type (genus, punctures) with complexity 3g - 3 + n >= 1."""

    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and punctures must be nonnegative")
        if self.complexity < 1:
            raise ValueError(
                f"complexity 3g-3+n = {self.complexity} < 1 for "
                f"(g, n) = ({self.genus}, {self.punctures})"
            )

    @property
    def complexity(self) -> int:
        return 3 * self.genus - 3 + self.punctures


ONCE_PUNCTURED_TORUS = SurfaceKind(genus=1, punctures=1)


@dataclass(frozen=True)
class Slope:
    """Reduced slope (p, q): q > 0, gcd(|p|, q) = 1, or the class (1, 0)."""

    p: int
    q: int

    def __post_init__(self):
        if (self.p, self.q) == (0, 0):
            raise ValueError("slope (0, 0) is not a curve")
        if self.q < 0 or (self.q == 0 and self.p != 1):
            raise ValueError(f"slope ({self.p}, {self.q}) is not canonical")
        if math.gcd(abs(self.p), self.q) != 1:
            raise ValueError(f"slope ({self.p}, {self.q}) is not reduced")

    @property
    def height(self) -> int:
        return max(abs(self.p), self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


def slope_canonicalize(p: int, q: int) -> Slope:
    """Reduce (p, q) to the canonical representative of its projective class."""
    if (p, q) == (0, 0):
        raise ValueError("cannot canonicalize (0, 0)")
    g = math.gcd(abs(p), abs(q))
    p, q = p // g, q // g
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
    return Slope(p, q)


def intersection_number(a: Slope, b: Slope) -> int:
    """Geometric intersection number of two slopes; 0 iff they are equal."""
    return abs(a.p * b.q - b.p * a.q)


def _slope_sort_key(s: Slope):
    return (s.height, s.q, s.p)


@lru_cache(maxsize=8)
def _enumerate_slopes_cached(max_height: int) -> tuple[Slope, ...]:
    out = []
    for q in range(0, max_height + 1):
        if q == 0:
            out.append(Slope(1, 0))
            continue
        for p in range(-max_height, max_height + 1):
            if math.gcd(abs(p), q) == 1:
                out.append(Slope(p, q))
    out.sort(key=_slope_sort_key)
    return tuple(out)


def enumerate_slopes(max_height: int) -> list[Slope]:
    """All canonical slopes with max(|p|, q) <= max_height.

    Ordered by (height, q, p), so the list for height Q is a prefix of the
    list for height Q + 1.
    """
    if max_height < 1:
        raise ValueError("max_height must be >= 1")
    return list(_enumerate_slopes_cached(max_height))


@dataclass(frozen=True)
class MappingClass:
    """Element of PSL(2, Z) as an integer matrix [[a, b], [c, d]], det = 1.

    Stored up to sign: the first nonzero entry of (a, b, c, d) is positive.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("determinant must be 1")
        for v in (self.a, self.b, self.c, self.d):
            if v != 0:
                if v < 0:
                    object.__setattr__(self, "a", -self.a)
                    object.__setattr__(self, "b", -self.b)
                    object.__setattr__(self, "c", -self.c)
                    object.__setattr__(self, "d", -self.d)
                break

    @classmethod
    def identity(cls) -> "MappingClass":
        return cls(1, 0, 0, 1)

    def __mul__(self, other: "MappingClass") -> "MappingClass":
        return MappingClass(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MappingClass":
        return MappingClass(self.d, -self.b, -self.c, self.a)

    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)


GEN_S = MappingClass(0, -1, 1, 0)
GEN_T = MappingClass(1, 1, 0, 1)


def apply_mapping_class(m: MappingClass, s: Slope) -> Slope:
    """Image of a slope under the column-vector action (p, q) -> (ap+bq, cp+dq)."""
    return slope_canonicalize(m.a * s.p + m.b * s.q, m.c * s.p + m.d * s.q)


@lru_cache(maxsize=16)
def _ball_cached(radius: int) -> tuple[MappingClass, ...]:
    gens = (GEN_S, GEN_S.inverse(), GEN_T, GEN_T.inverse())
    seen = {MappingClass.identity()}
    order = [MappingClass.identity()]
    frontier = [MappingClass.identity()]
    for _ in range(radius):
        nxt = []
        for m in frontier:
            for g in gens:
                w = m * g
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    nxt.append(w)
        frontier = nxt
    return tuple(order)


def mapping_class_ball(radius: int) -> list[MappingClass]:
    """All distinct projective classes of words of length <= radius in S, T
    and their inverses, in breadth-first discovery order."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    return list(_ball_cached(radius))
