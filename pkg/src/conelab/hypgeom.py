"""Hyperbolic structures on the once-punctured torus in trace coordinates.

A marked cusped structure is the Markov triple (x, y, z) of traces of the
holonomies around the slopes 0/1, 1/0 and 1/1.  The cusp condition is
x^2 + y^2 + z^2 = xyz with x, y, z > 2.  Traces of deeper slopes follow the
Fricke product rule along the Stern-Brocot tree: if u, v are Farey
neighbours with mediant w and co-parent w', then tr(w) = tr(u) tr(v) - tr(w').

Numerical conventions:

* Traces grow doubly exponentially along the tree, so every trace is carried
  as a (float, log) pair and the recursion switches to stable log arithmetic
  once the float overflows.  Lengths are l = 2 arccosh(t / 2), evaluated from
  the log representation when t is large.
* Near-parabolic marked traces (t = 2 + e with e tiny) lose the excess e to
  rounding if only t is stored.  TraceCoord therefore carries an optional
  excess triple maintained by the constructors that know it exactly; the
  marked-slope lengths are evaluated from the excesses when present.
* The product-region Teichmueller estimate compares, per short curve, the
  points (twist, 1/length) of the two structures in the upper half-plane
  with metric ds^2 = (dx^2 + dy^2) / (4 y^2).  The raw Fenchel-Nielsen twist
  is used as the horizontal coordinate (TWIST_CONVENTION below); rescaled
  twist conventions change the estimate only by a bounded amount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .curvesys import MappingClass, Slope, enumerate_slopes

_LOG2 = math.log(2.0)
_MARKOV_RTOL = 1e-9
_MARKOV_CHECK_CAP = 1e100  # beyond this the float residual test is meaningless
_ACOSH_DIRECT_CAP = 1e15

#: Horizontal coordinate fed to the product-region estimate: the raw
#: Fenchel-Nielsen twist (a Dehn twist about a curve of length l shifts it
#: by l).  The divergence experiment instead reports twist displacement in
#: whole twists; see lab.divergence_sequence.
TWIST_CONVENTION = "raw-fenchel-nielsen"

_BASE_SLOPES = (Slope(0, 1), Slope(1, 0), Slope(1, 1), Slope(-1, 1))


@dataclass(frozen=True)
class TraceCoord:
    """Markov triple (tr A, tr B, tr AB) for the marking 0/1, 1/0, 1/1."""

    x: float
    y: float
    z: float
    # Cancellation-free values of (x-2, y-2, z-2) when the constructor can
    # supply them; None means "derive from the floats".  excess_lo carries
    # the compensated tail of each excess for re-marked structures, whose
    # deep curve lengths are sensitive below one float ulp of the traces.
    excess: tuple[float, float, float] | None = field(default=None, repr=False)
    excess_lo: tuple[float, float, float] | None = field(default=None, repr=False)

    def __post_init__(self):
        for t in (self.x, self.y, self.z):
            if not (t > 2.0):
                raise ValueError(f"trace {t} is not > 2")
        m = max(self.x, self.y, self.z)
        if m < _MARKOV_CHECK_CAP:
            xyz = self.x * self.y * self.z
            resid = self.x * self.x + self.y * self.y + self.z * self.z - xyz
            if abs(resid) > _MARKOV_RTOL * max(xyz, m * m):
                raise ValueError(
                    f"Markov relation violated: residual {resid:.3e} for "
                    f"({self.x}, {self.y}, {self.z})"
                )

    def excesses(self) -> tuple[float, float, float]:
        if self.excess is not None:
            return self.excess
        return (self.x - 2.0, self.y - 2.0, self.z - 2.0)


@dataclass(frozen=True)
class FNPoint:
    """Fenchel-Nielsen data of one pants curve: hyperbolic length and twist."""

    length: float
    twist: float

    def __post_init__(self):
        if not (self.length > 0.0):
            raise ValueError("length must be positive")


@dataclass(frozen=True)
class MetricBracket:
    """A distance estimate: certified lower value, optional upper value, and
    the enumeration parameters that produced it."""

    lower: float
    upper: float = math.inf
    enum_height: int = 0
    orbit_radius: int | None = None

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower exceeds upper")


def zero_twist_point(length: float) -> TraceCoord:
    """Structure with the 0/1 curve of the given length and zero twist.

    Zero twist is the symmetric locus y = z; then x = 2 cosh(l/2) and
    y = x / sqrt(x - 2) solves the Markov relation exactly.
    """
    if not (length > 0.0):
        raise ValueError("length must be positive")
    # x - 2 = 2 (cosh(l/2) - 1) = 4 sinh^2(l/4), exact for small l
    sh = math.sinh(length / 4.0)
    ex = 4.0 * sh * sh
    w = math.sqrt(ex)
    # y - 2 = (x - 2 sqrt(x-2)) / sqrt(x-2) = ((w-1)^2 + 1) / w
    ey = ((w - 1.0) * (w - 1.0) + 1.0) / w
    return TraceCoord(2.0 + ex, 2.0 + ey, 2.0 + ey, excess=(ex, ey, ey))


# ---------------------------------------------------------------------------
# trace recursion along the Stern-Brocot tree
# ---------------------------------------------------------------------------


def _mul_sub(ta, La, tb, Lb, tc, Lc):
    """(t, log t) for t = ta*tb - tc, stable when the floats overflow."""
    t = ta * tb - tc
    if math.isfinite(t):
        if t <= 2.0:
            raise ValueError("derived trace not > 2; invalid trace data")
        return t, math.log(t)
    s = La + Lb
    r = Lc - s
    if r >= 0.0:
        raise ValueError("derived trace not > 2; invalid trace data")
    return math.inf, s + math.log1p(-math.exp(r))


# -- compensated arithmetic for the single-slope recursion ------------------
#
# The step t = ta*tb - tc cancels almost completely when the recursion walks
# back toward the short curves of a re-marked structure, and plain doubles
# lose the difference.  Carrying each trace as an exact double pair
# (hi + lo) keeps the recursion accurate through those steps.

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    if not math.isfinite(s):
        return s, 0.0
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    if not math.isfinite(p):
        return p, 0.0
    ta = _SPLITTER * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLITTER * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _two_sum(p, e)


def _dd_sub(ah, al, bh, bl):
    s, e = _two_sum(ah, -bh)
    e += al - bl
    return _two_sum(s, e)


def _dd_add_tail(pair, tail):
    s, e = _two_sum(pair[0], tail)
    return _two_sum(s, e + pair[1])


def _mul_sub_dd(a, b, c):
    """Compensated (hi, lo, log) for t = a*b - c on (hi, lo, log) triples."""
    ph, pl = _dd_mul(a[0], a[1], b[0], b[1])
    if math.isfinite(ph):
        th, tl = _dd_sub(ph, pl, c[0], c[1])
        if th > 2.0 or (th == 2.0 and tl > 0.0):
            return th, tl, math.log(th) + tl / th
        raise ValueError("derived trace not > 2; invalid trace data")
    s = a[2] + b[2]
    r = c[2] - s
    if r >= 0.0:
        raise ValueError("derived trace not > 2; invalid trace data")
    return math.inf, 0.0, s + math.log1p(-math.exp(r))


def _mul_sub_fast(a, b, c):
    """Plain-float variant of _mul_sub_dd on the same (hi, lo, log) triples."""
    t, L = _mul_sub(a[0], a[2], b[0], b[2], c[0], c[2])
    return t, 0.0, L


def _base_triples(T: TraceCoord):
    """(hi, lo, log) triples for the base slopes 0/1, 1/0, 1/1, -1/1.

    The fourth trace xy - z cancels almost completely for markings far from
    their short curves, so it is formed in compensated arithmetic."""
    ex, ey, ez = T.excesses()
    lo = T.excess_lo if T.excess_lo is not None else (0.0, 0.0, 0.0)
    xs = _dd_add_tail(_two_sum(2.0, ex), lo[0])
    ys = _dd_add_tail(_two_sum(2.0, ey), lo[1])
    zs = _dd_add_tail(_two_sum(2.0, ez), lo[2])
    ph, pl = _dd_mul(xs[0], xs[1], ys[0], ys[1])
    if math.isfinite(ph):
        ms = _dd_sub(ph, pl, zs[0], zs[1])
        if not (ms[0] > 2.0 or (ms[0] == 2.0 and ms[1] > 0.0)):
            raise ValueError("trace of slope -1/1 not > 2; invalid trace data")
        eh, el = _dd_sub(ms[0], ms[1], 2.0, 0.0)
        em = eh + el
        out = [(hi, lo, math.log(hi) + lo / hi) for hi, lo in (xs, ys, zs, ms)]
    else:
        lx, ly, lz = (math.log(h) + l / h for h, l in (xs, ys, zs))
        lm = lx + ly + math.log1p(-math.exp(min(lz - lx - ly, -1e-300)))
        em = math.inf
        out = [(hi, lo, math.log(hi) + lo / hi) for hi, lo in (xs, ys, zs)]
        out.append((math.inf, 0.0, lm))
    return out, (ex, ey, ez, em)


def _descend(T: TraceCoord, s: Slope, precise: bool = True):
    """(hi, lo, log) of the holonomy trace of slope s, by Farey descent."""
    triples, _ = _base_triples(T)
    base = dict(zip(_BASE_SLOPES, triples))
    if s in base:
        return base[s]
    step = _mul_sub_dd if precise else _mul_sub_fast
    if s.p > 0:  # interval (0, +inf)
        va, ta = (0, 1), base[Slope(0, 1)]
        vb, tb = (1, 0), base[Slope(1, 0)]
        vm, tm = (1, 1), base[Slope(1, 1)]
    else:  # interval (-inf, 0)
        va, ta = (-1, 0), base[Slope(1, 0)]
        vb, tb = (0, 1), base[Slope(0, 1)]
        vm, tm = (-1, 1), base[Slope(-1, 1)]
    for _ in range(abs(s.p) + s.q + 4):
        cross = s.p * vm[1] - vm[0] * s.q
        if cross == 0:
            return tm
        if cross < 0:  # target lies in (va, vm)
            tnew = step(ta, tm, tb)
            vb, tb = vm, tm
            vm = (va[0] + vm[0], va[1] + vm[1])
            tm = tnew
        else:  # target lies in (vm, vb)
            tnew = step(tm, tb, ta)
            va, ta = vm, tm
            vm = (vm[0] + vb[0], vm[1] + vb[1])
            tm = tnew
    raise RuntimeError(f"Farey descent failed to reach slope {s}")


def trace_of_slope(T: TraceCoord, s: Slope) -> float:
    """Trace of the holonomy of the slope-s curve (math.inf on float overflow)."""
    return _descend(T, s)[0]


def _length_from_triple(t) -> float:
    th, tl, L = t
    if math.isfinite(th) and th < _ACOSH_DIRECT_CAP:
        eh, el = _dd_sub(th, tl, 2.0, 0.0)
        return _length_from_excess(eh + el)
    v = L - _LOG2  # log(t/2), large
    return 2.0 * (v + math.log1p(math.sqrt(-math.expm1(-2.0 * v))))


def _length_from_excess(e: float) -> float:
    """2 arccosh(1 + e/2), accurate for tiny e."""
    h = 0.5 * e
    return 2.0 * math.log1p(h + math.sqrt(h * (h + 2.0)))


def length_of_slope(T: TraceCoord, s: Slope, precise: bool = True) -> float:
    """Hyperbolic length of the geodesic of slope s."""
    triples, exc = _base_triples(T)
    for b, tri, e in zip(_BASE_SLOPES, triples, exc):
        if s == b:
            if math.isfinite(e) and e < _ACOSH_DIRECT_CAP:
                return _length_from_excess(e)
            return _length_from_triple(tri)
    return _length_from_triple(_descend(T, s, precise))


def dehn_twist(T: TraceCoord, k: int) -> TraceCoord:
    """k-fold Dehn twist about the 0/1 curve: (x, y, z) -> (x, z, xz - y)."""
    ex, ey, ez = T.excesses()
    if k >= 0:
        for _ in range(k):
            ey, ez = ez, 2.0 * ex + 2.0 * ez + ex * ez - ey
    else:
        for _ in range(-k):
            ey, ez = 2.0 * ex + 2.0 * ey + ex * ey - ez, ey
    if ey <= 0.0 or ez <= 0.0:
        raise ValueError("twist produced a non-hyperbolic trace; invalid data")
    return TraceCoord(2.0 + ex, 2.0 + ey, 2.0 + ez, excess=(ex, ey, ez))


def transform_trace(m: MappingClass, T: TraceCoord) -> TraceCoord:
    """Pull back the marking by m: the new trace at slope s is the old trace
    at m^{-1} s, so lengths satisfy l_{m.T}(m s) = l_T(s)."""
    from .curvesys import apply_mapping_class

    minv = m.inverse()
    triples, _ = _base_triples(T)
    base = dict(zip(_BASE_SLOPES, triples))
    out_t = []
    out_eh = []
    out_el = []
    for v in (Slope(0, 1), Slope(1, 0), Slope(1, 1)):
        s = apply_mapping_class(minv, v)
        th, tl, _ = base[s] if s in base else _descend(T, s)
        if not math.isfinite(th):
            raise OverflowError(
                f"transformed trace at slope {s} overflows float range"
            )
        eh, el = _dd_sub(th, tl, 2.0, 0.0)
        out_t.append(2.0 + eh)
        out_eh.append(eh)
        out_el.append(el)
    return TraceCoord(
        *out_t, excess=tuple(out_eh), excess_lo=tuple(out_el)
    )


# ---------------------------------------------------------------------------
# batched length tables over all slopes of bounded height
# ---------------------------------------------------------------------------


class _FareyDag:
    """Stern-Brocot tree over all canonical slopes of height <= max_height.

    Node order is creation (breadth-first) order, bases first; `order` sorts
    it to the enumerate_slopes order (height, q, p).  Derived node j has
    trace t[ia[j]] * t[ib[j]] - t[ic[j]], and all three parents precede the
    level containing j, so the recursion vectorizes level by level.
    """

    def __init__(self, max_height: int):
        pq = [(0, 1), (1, 0), (1, 1), (-1, 1)]
        ia, ib, ic = [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]
        levels = []
        frontier = [
            ((0, 1), 0, (1, 0), 1, (1, 1), 2),
            ((0, 1), 0, (-1, 0), 1, (-1, 1), 3),
        ]
        while frontier:
            nxt = []
            start = len(pq)
            for va, na, vb, nb, vm, nm in frontier:
                pl, ql = va[0] + vm[0], va[1] + vm[1]
                if max(abs(pl), ql) <= max_height:
                    node = len(pq)
                    pq.append((pl, ql))
                    ia.append(na)
                    ib.append(nm)
                    ic.append(nb)
                    nxt.append((va, na, vm, nm, (pl, ql), node))
                pr, qr = vm[0] + vb[0], vm[1] + vb[1]
                if max(abs(pr), qr) <= max_height:
                    node = len(pq)
                    pq.append((pr, qr))
                    ia.append(nm)
                    ib.append(nb)
                    ic.append(na)
                    nxt.append((vm, nm, vb, nb, (pr, qr), node))
            if len(pq) > start:
                levels.append((start, len(pq)))
            frontier = nxt
        self.max_height = max_height
        self.pq = np.array(pq, dtype=np.int64)
        self.ia = np.array(ia, dtype=np.int64)
        self.ib = np.array(ib, dtype=np.int64)
        self.ic = np.array(ic, dtype=np.int64)
        self.levels = levels
        h = np.maximum(np.abs(self.pq[:, 0]), self.pq[:, 1])
        self.order = np.lexsort((self.pq[:, 0], self.pq[:, 1], h))


@lru_cache(maxsize=4)
def _farey_dag(max_height: int) -> _FareyDag:
    return _FareyDag(max_height)


def slope_array(max_height: int) -> np.ndarray:
    """(n, 2) integer array of canonical slopes, enumerate_slopes order."""
    dag = _farey_dag(max_height)
    arr = dag.pq[dag.order]
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=64)
def log_length_table(T: TraceCoord, max_height: int) -> np.ndarray:
    """log of the hyperbolic length of every slope of height <= max_height,
    aligned with enumerate_slopes(max_height)."""
    dag = _farey_dag(max_height)
    n = len(dag.pq)
    triples, exc = _base_triples(T)
    t = np.empty(n)
    logt = np.empty(n)
    for i, (tv, _, lv) in enumerate(triples):
        t[i] = tv
        logt[i] = lv
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for s0, s1 in dag.levels:
            a, b, c = dag.ia[s0:s1], dag.ib[s0:s1], dag.ic[s0:s1]
            tm = t[a] * t[b] - t[c]
            s = logt[a] + logt[b]
            lm = s + np.log1p(-np.exp(np.minimum(logt[c] - s, -1e-300)))
            fin = np.isfinite(tm) & (tm > 2.0)
            if fin.any():
                lm = np.where(fin, np.log(np.where(fin, tm, 3.0)), lm)
            t[s0:s1] = tm
            logt[s0:s1] = lm
        # lengths: direct arccosh while t fits, log-domain asymptotics after
        length = np.empty(n)
        small = np.isfinite(t) & (t < _ACOSH_DIRECT_CAP)
        length[small] = 2.0 * np.arccosh(t[small] / 2.0)
        v = logt[~small] - _LOG2
        length[~small] = 2.0 * (v + np.log1p(np.sqrt(-np.expm1(-2.0 * v))))
    for i, e in enumerate(exc):
        length[i] = _length_from_excess(e)
    out = np.log(length[dag.order])
    if not np.all(np.isfinite(out)):
        raise ValueError("degenerate length table; invalid trace data")
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# length-spectra metric
# ---------------------------------------------------------------------------


def thurston_asym(T1: TraceCoord, T2: TraceCoord, max_height: int) -> tuple[float, float]:
    """Enumerated lower bounds for the two directed stretch distances
    (1/2) log sup l2/l1 and (1/2) log sup l1/l2 over slopes of bounded height."""
    if max_height < 1:
        raise ValueError("max_height must be >= 1")
    diff = log_length_table(T2, max_height) - log_length_table(T1, max_height)
    return 0.5 * float(np.max(diff)), -0.5 * float(np.min(diff))


def length_spectra_distance(T1: TraceCoord, T2: TraceCoord, max_height: int) -> MetricBracket:
    """Symmetrized stretch-distance lower bound by slope enumeration.

    The enumerated maximum is a true lower bound (the supremum over all
    curves dominates it) and is nondecreasing in the enumeration height; no
    certified upper bound is claimed.
    """
    d1, d2 = thurston_asym(T1, T2, max_height)
    return MetricBracket(lower=max(d1, d2), enum_height=max_height)


def stabilization_gap(T1: TraceCoord, T2: TraceCoord, max_height: int) -> float:
    """Change of the enumerated lower bound from height Q/2 to height Q."""
    full = length_spectra_distance(T1, T2, max_height).lower
    half = length_spectra_distance(T1, T2, max(1, max_height // 2)).lower
    return full - half


# ---------------------------------------------------------------------------
# product-region Teichmueller estimate
# ---------------------------------------------------------------------------


def h2_distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Distance in the upper half-plane with ds^2 = (dx^2 + dy^2)/(4 y^2),
    i.e. half the curvature -1 distance."""
    xp, yp = p
    xq, yq = q
    if yp <= 0.0 or yq <= 0.0:
        raise ValueError("points must have positive second coordinate")
    dsq = (xp - xq) ** 2 + (yp - yq) ** 2
    return 0.5 * math.acosh(1.0 + dsq / (2.0 * yp * yq))


def minsky_teich_estimate(fn1: list[FNPoint], fn2: list[FNPoint], eps0: float) -> float:
    """Thin-part Teichmueller distance estimate: the sup over pants curves of
    the half-plane distance between (twist, 1/length) points.

    Both points must have every curve length <= eps0 (the threshold is
    treated inclusively so that the boundary of the image ray qualifies).
    The true Teichmueller distance differs from this by a bounded additive
    amount; the bound is not quantified here.
    """
    if len(fn1) != len(fn2):
        raise ValueError("Fenchel-Nielsen lists must have equal length")
    if not fn1:
        raise ValueError("need at least one pants curve")
    for f in (*fn1, *fn2):
        if f.length > eps0:
            raise ValueError(
                f"thin-part precondition violated: length {f.length} > {eps0}"
            )
    return max(
        h2_distance((a.twist, 1.0 / a.length), (b.twist, 1.0 / b.length))
        for a, b in zip(fn1, fn2)
    )
