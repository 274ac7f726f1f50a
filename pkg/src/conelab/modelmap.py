"""From the cone model into moduli space, and back.

For the once-punctured torus the quotient cone model is a single ray.  A ray
coordinate x maps to the zero-twist structure whose marked curve has length
eps0 * exp(-x); the reverse direction finds the systole and reads the
coordinate off its length, clamping to 0 when the surface has no curve
shorter than eps0.  Distances in moduli space are estimated by minimizing
the marked length-spectra bound over a ball of mapping classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curvesys import (
    MappingClass,
    Slope,
    apply_mapping_class,
    enumerate_slopes,
    mapping_class_ball,
)
from .hypgeom import (
    FNPoint,
    MetricBracket,
    TraceCoord,
    length_of_slope,
    log_length_table,
    slope_array,
    transform_trace,
    zero_twist_point,
)

#: Short-curve threshold of the model map.  Any two curves of length <= eps0
#: on a hyperbolic surface are disjoint as soon as eps0 < 2 arcsinh(1), the
#: collar-lemma threshold (about 1.7627); 0.5 is comfortably below it.
EPSILON0 = 0.5

def epsilon0() -> float:
    """The fixed short-curve threshold of the model map."""
    return EPSILON0


@dataclass(frozen=True)
class ModelPoint:
    """A point of the quotient ray model of the once-punctured torus."""

    coordinate: float

    def __post_init__(self):
        if not (self.coordinate >= 0.0):
            raise ValueError("ray coordinate must be nonnegative")


def _coordinate(x) -> float:
    return x.coordinate if isinstance(x, ModelPoint) else float(x)


def psi(x) -> TraceCoord:
    """Image of the ray point x: zero-twist structure with marked-curve
    length eps0 * exp(-x), which stays in the thin part for every x >= 0."""
    c = _coordinate(x)
    if c < 0:
        raise ValueError("ray coordinate must be nonnegative")
    return zero_twist_point(EPSILON0 * math.exp(-c))


def psi_fn(x) -> list[FNPoint]:
    """Fenchel-Nielsen data of psi(x): one pants curve, zero twist."""
    c = _coordinate(x)
    if c < 0:
        raise ValueError("ray coordinate must be nonnegative")
    return [FNPoint(length=EPSILON0 * math.exp(-c), twist=0.0)]


@dataclass(frozen=True)
class SystoleReport:
    """Systole found by enumeration, with the height at which enumeration is
    guaranteed to have seen the true systole."""

    slope: Slope
    length: float
    log_length: float
    enum_height: int
    certified_height: int
    exact: bool


def systole_certified(T: TraceCoord) -> tuple[Slope, float]:
    """Exact systole (slope and log of trace) by descending the Farey tree.

    Inside a Farey triple whose mediant trace is at least both endpoint
    traces, every deeper trace exceeds the mediant trace, so such subtrees
    are pruned; the remaining descending region is finite because the length
    spectrum of a fixed surface is discrete.
    """
    from .hypgeom import _base_triples, _mul_sub_fast

    triples, _ = _base_triples(T)
    base_slopes = (Slope(0, 1), Slope(1, 0), Slope(1, 1), Slope(-1, 1))
    best_slope, best = min(zip(base_slopes, triples), key=lambda it: it[1][2])
    best_log = best[2]
    # stack of triangles (va, trace_a, vb, trace_b, vm, trace_m); the
    # mediant's trace has already been counted toward the minimum
    stack = [
        ((0, 1), triples[0], (1, 0), triples[1], (1, 1), triples[2]),
        ((0, 1), triples[0], (-1, 0), triples[1], (-1, 1), triples[3]),
    ]
    budget = 10**6
    while stack:
        budget -= 1
        if budget < 0:
            raise RuntimeError("systole search exceeded its expansion budget")
        va, pa, vb, pb, vm, pm = stack.pop()
        if pm[2] >= max(pa[2], pb[2]):
            continue  # everything below the mediant is at least as long
        for ua, qa, ub, qb, co in ((va, pa, vm, pm, pb), (vm, pm, vb, pb, pa)):
            mid = (ua[0] + ub[0], ua[1] + ub[1])
            pmid = _mul_sub_fast(qa, qb, co)
            if pmid[2] < best_log:
                best_log = pmid[2]
                best_slope = Slope(*mid) if mid[1] > 0 else Slope(-mid[0], -mid[1])
            stack.append((ua, qa, ub, qb, mid, pmid))
    return best_slope, best_log


def systole_search(T: TraceCoord, max_height: int) -> SystoleReport:
    """Shortest slope among those of height <= max_height, plus the height
    bound beyond which the enumeration provably contains the true systole."""
    tab = log_length_table(T, max_height)
    slopes = slope_array(max_height)
    i = int(np.argmin(tab))
    found = Slope(int(slopes[i, 0]), int(slopes[i, 1]))
    exact_slope, _ = systole_certified(T)
    certified = exact_slope.height
    return SystoleReport(
        slope=found,
        length=float(math.exp(tab[i])),
        log_length=float(tab[i]),
        enum_height=max_height,
        certified_height=certified,
        exact=max_height >= certified,
    )


def bers_project(T: TraceCoord, max_height: int) -> ModelPoint:
    """Ray coordinate of the short-pants projection: log(eps0 / systole
    length) when the systole is at most eps0, else 0."""
    report = systole_search(T, max_height)
    x = math.log(EPSILON0) - report.log_length
    return ModelPoint(max(0.0, x))


#: Slope height of the certified prefilter used by the orbit scan.
_PREFILTER_HEIGHT = 10


class _OrbitScanner:
    """Length-spectra lower bounds against the mapping-class orbit of one
    fixed structure, with per-orbit-element tables built lazily and shared
    across scans.

    For each orbit element m the ratios over a small slope set already give
    a lower bound for its enumerated sup (l_{m.T2}(s) = l_{T2}(m^{-1} s),
    evaluated cancellation-free on the original marking); elements whose
    bound reaches the running minimum cannot attain the minimum and are
    skipped before their table is built.  Elements whose transformed
    markings are not representable in floats (trace overflow, or traces so
    extreme that the recursion degenerates) are skipped as well: such
    markings are far from every scanned point, and skipping only shrinks
    the orbit search.
    """

    def __init__(self, T2: TraceCoord, ball: list[MappingClass], max_height: int):
        self.T2 = T2
        self.ball = ball
        self.max_height = max_height
        self.pre_height = min(_PREFILTER_HEIGHT, max_height)
        self._pre_slopes = enumerate_slopes(self.pre_height)
        self._prefilter: dict[int, np.ndarray] = {}
        self._tables: dict[int, np.ndarray | None] = {}

    def _pre_loglens(self, i: int) -> np.ndarray:
        """log l_{T2}(m^{-1} s) over the prefilter slopes (a prefix of the
        sorted enumeration)."""
        got = self._prefilter.get(i)
        if got is None:
            minv = self.ball[i].inverse()
            got = np.array(
                [
                    math.log(
                        length_of_slope(
                            self.T2, apply_mapping_class(minv, s), precise=False
                        )
                    )
                    for s in self._pre_slopes
                ]
            )
            self._prefilter[i] = got
        return got

    def _table(self, i: int) -> np.ndarray | None:
        if i not in self._tables:
            if i == 0:
                self._tables[i] = log_length_table(self.T2, self.max_height)
            else:
                try:
                    moved = transform_trace(self.ball[i], self.T2)
                    self._tables[i] = log_length_table(moved, self.max_height)
                except (OverflowError, ValueError):
                    self._tables[i] = None
        return self._tables[i]

    def scan(self, T1: TraceCoord) -> float:
        L1 = log_length_table(T1, self.max_height)
        L1_pre = L1[: len(self._pre_slopes)]
        best = math.inf
        for i in range(len(self.ball)):
            if i > 0:
                bound = 0.5 * float(np.max(np.abs(self._pre_loglens(i) - L1_pre)))
                if bound >= best:
                    continue
            tab = self._table(i)
            if tab is None:
                continue
            d = 0.5 * float(np.max(np.abs(tab - L1)))
            if d < best:
                best = d
        return best


def moduli_ls_distance(
    T1: TraceCoord, T2: TraceCoord, max_height: int, orbit_radius: int
) -> MetricBracket:
    """Length-spectra lower bound minimized over a mapping-class ball:
    min over the ball of the enumerated bound between T1 and the
    re-marked T2.  Nonincreasing in the radius, nondecreasing in the
    enumeration height, and 0 (to float precision) when T2 lies in the
    covered orbit of T1."""
    if max_height < 1:
        raise ValueError("max_height must be >= 1")
    if orbit_radius < 0:
        raise ValueError("orbit_radius must be >= 0")
    ball = mapping_class_ball(orbit_radius)
    scanner = _OrbitScanner(T2, ball, max_height)
    return MetricBracket(
        lower=scanner.scan(T1),
        enum_height=max_height,
        orbit_radius=orbit_radius,
    )
