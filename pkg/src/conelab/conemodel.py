"""The metric cone over a finite simplicial complex.

Each maximal simplex with d vertices spans an orthant R_{>=0}^d carrying the
half sup metric d(u, v) = (1/2) max_i |u_i - v_i|.  Orthants are glued along
the cones over shared faces, and the cone point (every coordinate zero) is a
face of every orthant, so the complex is path connected even when two
simplices share no vertex.  The path metric is computed by enumerating
simple chains of orthants and minimizing each chain's length, a convex
piecewise-linear problem solved exactly as a linear program with one
epigraph variable per segment.

Chains that cross from one orthant to the next only at the cone point are
admitted as genuine paths; the cone-point route gives the a priori upper
bound apex_route_bound, which is always reported separately from the path
minimum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog


@dataclass(frozen=True)
class ConeComplexSpec:
    """Finite complex given by its maximal simplices, all of size `dimension`.

    The vertex order inside each simplex fixes the coordinate order of
    points in that orthant.
    """

    vertices: tuple[str, ...]
    simplices: tuple[tuple[str, ...], ...]
    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex labels")
        vset = set(self.vertices)
        seen = set()
        used = set()
        for simp in self.simplices:
            if len(simp) != self.dimension or len(set(simp)) != self.dimension:
                raise ValueError(
                    f"maximal simplex {simp} does not have exactly "
                    f"{self.dimension} distinct vertices"
                )
            for v in simp:
                if v not in vset:
                    raise ValueError(f"simplex vertex {v!r} not declared")
            key = frozenset(simp)
            if key in seen:
                raise ValueError(f"duplicate maximal simplex {simp}")
            seen.add(key)
            used.update(simp)
        if not self.simplices:
            raise ValueError("need at least one maximal simplex")
        missing = vset - used
        if missing:
            raise ValueError(f"vertices {sorted(missing)} lie in no maximal simplex")

    def simplex_set(self, sid: int) -> frozenset:
        return frozenset(self.simplices[sid])

    def simplex_id_of(self, vertex_set: frozenset) -> int:
        for i, simp in enumerate(self.simplices):
            if frozenset(simp) == vertex_set:
                return i
        raise KeyError(f"no maximal simplex with vertices {sorted(vertex_set)}")

    def shared_face(self, i: int, j: int) -> tuple[str, ...]:
        common = self.simplex_set(i) & self.simplex_set(j)
        return tuple(sorted(common))

    @classmethod
    def from_text(cls, text: str) -> "ConeComplexSpec":
        """Parse the plain-text format: one `vertices:` line, then one
        `simplex:` line per maximal simplex, whitespace separated."""
        vertices = None
        simplices = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise ValueError(f"line {lineno}: expected 'vertices:' or 'simplex:'")
            key, _, rest = line.partition(":")
            items = rest.split()
            if key.strip() == "vertices":
                if vertices is not None:
                    raise ValueError(f"line {lineno}: duplicate vertices line")
                if not items:
                    raise ValueError(f"line {lineno}: empty vertex list")
                vertices = tuple(items)
            elif key.strip() == "simplex":
                if vertices is None:
                    raise ValueError(f"line {lineno}: simplex before vertices line")
                if not items:
                    raise ValueError(f"line {lineno}: empty simplex")
                simplices.append(tuple(items))
            else:
                raise ValueError(f"line {lineno}: unknown directive {key.strip()!r}")
        if vertices is None:
            raise ValueError("missing vertices line")
        if not simplices:
            raise ValueError("no maximal simplices given")
        dim = len(simplices[0])
        try:
            return cls(vertices, tuple(simplices), dim)
        except ValueError as err:
            raise ValueError(f"invalid complex: {err}") from err

    @classmethod
    def from_file(cls, path) -> "ConeComplexSpec":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class ConePoint:
    """Point of the cone: a maximal simplex id and nonnegative coordinates in
    that simplex's vertex order.  Two points with the same support vertices
    and the same positive coordinates are the same point of the cone; the
    all-zero point is the cone point regardless of simplex id."""

    simplex_id: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.coords):
            raise ValueError("coordinates must be nonnegative")


@dataclass(frozen=True)
class Chain:
    """A simple chain of orthants together with the face used at each
    crossing; the empty face () means the crossing happens at the cone
    point."""

    simplices: tuple[int, ...]
    faces: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class PathWitness:
    chain: tuple[int, ...]
    crossing_points: tuple[ConePoint, ...]
    total_length: float


def _check_point(cc: ConeComplexSpec, pt: ConePoint):
    if not 0 <= pt.simplex_id < len(cc.simplices):
        raise ValueError(f"simplex id {pt.simplex_id} out of range")
    if len(pt.coords) != cc.dimension:
        raise ValueError(
            f"point has {len(pt.coords)} coordinates, complex dimension is "
            f"{cc.dimension}"
        )


def _coord_map(cc: ConeComplexSpec, pt: ConePoint) -> dict:
    return dict(zip(cc.simplices[pt.simplex_id], pt.coords))


def support(cc: ConeComplexSpec, pt: ConePoint) -> frozenset:
    return frozenset(v for v, c in _coord_map(cc, pt).items() if c > 0)


def points_equal(cc: ConeComplexSpec, a: ConePoint, b: ConePoint) -> bool:
    ma = {v: c for v, c in _coord_map(cc, a).items() if c > 0}
    mb = {v: c for v, c in _coord_map(cc, b).items() if c > 0}
    return ma == mb


def orthant_distance(u, v) -> float:
    """Half sup distance between coordinate vectors of one orthant."""
    u = tuple(u)
    v = tuple(v)
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    if any(c < 0 for c in u) or any(c < 0 for c in v):
        raise ValueError("coordinates must be nonnegative")
    return 0.5 * max(abs(a - b) for a, b in zip(u, v))


def apex_route_bound(x: ConePoint, y: ConePoint) -> float:
    """Length of the route through the cone point; an upper bound for the
    path distance."""
    mx = max(x.coords) if x.coords else 0.0
    my = max(y.coords) if y.coords else 0.0
    return 0.5 * (mx + my)


def chain_enumerate(
    cc: ConeComplexSpec, src: int, dst: int, max_len: int | None = None
) -> list[Chain]:
    """All simple chains from src to dst with at most max_len simplices.

    Any two orthants are adjacent through the cone point; when they also
    share a nonempty face, both the face crossing and the cone-point
    crossing are listed (face variant first).  Deterministic order: paths in
    lexicographic DFS order, then crossing variants.
    """
    n = len(cc.simplices)
    if not (0 <= src < n and 0 <= dst < n):
        raise ValueError("simplex id out of range")
    if max_len is None:
        max_len = n
    out: list[Chain] = []

    def expand(path: tuple[int, ...]):
        options = []
        for i, j in zip(path, path[1:]):
            face = cc.shared_face(i, j)
            options.append([face, ()] if face else [()])
        for faces in itertools.product(*options):
            out.append(Chain(path, faces))

    def dfs(path: tuple[int, ...]):
        if path[-1] == dst:
            expand(path)
            # a simple chain may pass through dst and still be extended, but
            # any extension must come back, repeating dst; so stop here
            return
        if len(path) >= max_len:
            return
        for nxt in range(n):
            if nxt not in path:
                dfs(path + (nxt,))

    if max_len >= 1:
        dfs((src,))
    return out


def _solve_chain(cc: ConeComplexSpec, chain: Chain, x: ConePoint, y: ConePoint):
    """Exact minimum length of a chain as a linear program.

    Crossing j carries one variable per vertex of its face; segment j gets
    an epigraph variable t_j >= (1/2) |endpoint difference| per coordinate.
    """
    sids = chain.simplices
    k = len(sids) - 1
    xmap = _coord_map(cc, x)
    ymap = _coord_map(cc, y)
    if k == 0:
        simp = cc.simplices[sids[0]]
        val = orthant_distance(
            [xmap[v] for v in simp], [ymap[v] for v in simp]
        )
        return val, ()

    var_of = {}
    nvars = 0
    for j, face in enumerate(chain.faces):
        for v in face:
            var_of[(j, v)] = nvars
            nvars += 1
    t0 = nvars
    nvars += k + 1

    rows, rhs = [], []

    def endpoint(seg: int, side: str):
        """Affine coordinates (const map, var map) of one end of segment seg."""
        if side == "a":
            if seg == 0:
                return xmap, {}
            face = chain.faces[seg - 1]
            return {}, {v: var_of[(seg - 1, v)] for v in face}
        if seg == k:
            return ymap, {}
        face = chain.faces[seg]
        return {}, {v: var_of[(seg, v)] for v in face}

    for seg in range(k + 1):
        aconst, avar = endpoint(seg, "a")
        bconst, bvar = endpoint(seg, "b")
        for v in cc.simplices[sids[seg]]:
            const = aconst.get(v, 0.0) - bconst.get(v, 0.0)
            coeffs = {}
            if v in avar:
                coeffs[avar[v]] = coeffs.get(avar[v], 0.0) + 1.0
            if v in bvar:
                coeffs[bvar[v]] = coeffs.get(bvar[v], 0.0) - 1.0
            for sign in (1.0, -1.0):
                row = np.zeros(nvars)
                for idx, co in coeffs.items():
                    row[idx] = sign * co
                row[t0 + seg] = -2.0
                rows.append(row)
                rhs.append(-sign * const)

    c = np.zeros(nvars)
    c[t0:] = 1.0
    res = linprog(
        c,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(0.0, None)] * nvars,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"chain LP failed: {res.message}")
    crossings = []
    for j, face in enumerate(chain.faces):
        entered = sids[j + 1]
        simp = cc.simplices[entered]
        vals = {v: float(res.x[var_of[(j, v)]]) for v in face}
        crossings.append(
            ConePoint(entered, tuple(max(vals.get(v, 0.0), 0.0) for v in simp))
        )
    return max(float(res.fun), 0.0), tuple(crossings)


def path_distance(
    x: ConePoint, y: ConePoint, cc: ConeComplexSpec, tol: float = 1e-9
) -> tuple[float, PathWitness]:
    """Path metric of the cone: minimum over simple chains of the chain
    length, each chain minimized exactly (up to LP tolerance).

    Ties between chains are broken by enumeration order, so the reported
    witness is deterministic.
    """
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    _check_point(cc, x)
    _check_point(cc, y)
    if points_equal(cc, x, y):
        return 0.0, PathWitness((x.simplex_id,), (), 0.0)
    best = math.inf
    best_witness = None
    for chain in chain_enumerate(cc, x.simplex_id, y.simplex_id):
        val, crossings = _solve_chain(cc, chain, x, y)
        if val < best - tol * 1e-3:
            best = val
            best_witness = PathWitness(chain.simplices, crossings, val)
    assert best_witness is not None
    return best, best_witness


def quotient_ray_distance_s11(x: float, y: float) -> float:
    """Quotient distance on the single-ray cone model of the once-punctured
    torus: (1/2) |x - y|."""
    if x < 0 or y < 0:
        raise ValueError("ray coordinates must be nonnegative")
    return 0.5 * abs(x - y)


def _check_automorphism(cc: ConeComplexSpec, phi: dict) -> dict:
    if set(phi.keys()) != set(cc.vertices):
        raise ValueError("automorphism must be defined on every vertex")
    if set(phi.values()) != set(cc.vertices):
        raise ValueError("automorphism must permute the vertices")
    simplex_sets = {frozenset(s) for s in cc.simplices}
    for s in cc.simplices:
        img = frozenset(phi[v] for v in s)
        if img not in simplex_sets:
            raise ValueError(
                f"map does not send maximal simplex {s} to a maximal simplex"
            )
    return {w: v for v, w in phi.items()}


def apply_automorphism(cc: ConeComplexSpec, phi: dict, pt: ConePoint) -> ConePoint:
    inv = _check_automorphism(cc, phi)
    src = cc.simplices[pt.simplex_id]
    img_id = cc.simplex_id_of(frozenset(phi[v] for v in src))
    cmap = _coord_map(cc, pt)
    coords = tuple(cmap[inv[w]] for w in cc.simplices[img_id])
    return ConePoint(img_id, coords)


def quotient_distance(
    x: ConePoint,
    y: ConePoint,
    cc: ConeComplexSpec,
    orbit_maps: list[dict],
    tol: float = 1e-9,
) -> float:
    """min over the supplied simplicial automorphisms phi of the path
    distance from x to phi(y); an upper bound for the true quotient
    distance, exact when the maps cover the relevant orbit."""
    if not orbit_maps:
        raise ValueError("need at least one orbit map")
    best = math.inf
    for phi in orbit_maps:
        moved = apply_automorphism(cc, phi, y)
        val, _ = path_distance(x, moved, cc, tol)
        best = min(best, val)
    return best
