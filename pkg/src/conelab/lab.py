"""Experiment harness: almost-isometry sweeps, thin-part metric comparison,
divergence sequences, and deterministic CSV report emission.

All row computations are pure functions of the configuration, so serial and
parallel runs of the same sweep produce byte-identical reports; reports are
formatted with 12 significant digits and carry their configuration in a
'#'-prefixed header.  The empirical additive constants printed in sweep
summaries are reported together with the enumeration height and orbit
radius that produced them; they are estimates, not certified bounds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .conemodel import quotient_ray_distance_s11
from .hypgeom import (
    dehn_twist,
    h2_distance,
    length_spectra_distance,
    minsky_teich_estimate,
    zero_twist_point,
)
from .modelmap import EPSILON0, _OrbitScanner, psi, psi_fn
from .curvesys import mapping_class_ball

#: Zero-twist pairs must reproduce the ray distance this closely.
ZERO_TWIST_TOL = 1e-12
#: Undercuts of the ray distance smaller than this are enumeration noise.
UNDERCUT_TOL = 1e-6


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class SweepConfig:
    grid_min: float = 0.0
    grid_max: float = 8.0
    grid_step: float = 0.5
    enum_height: int = 200
    orbit_radius: int = 6
    tol: float = 1e-9
    out: str | None = None
    c_slack: float = 1.0
    jobs: int = 1

    def validate(self):
        if self.grid_min < 0:
            raise ConfigError("grid_min must be >= 0")
        if self.grid_step <= 0:
            raise ConfigError("grid_step must be positive")
        if self.grid_max < self.grid_min:
            raise ConfigError("grid_max must be >= grid_min")
        if self.enum_height < 1:
            raise ConfigError("enum_height must be >= 1")
        if self.orbit_radius < 0:
            raise ConfigError("orbit_radius must be >= 0")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def grid(self) -> list[float]:
        vals = []
        i = 0
        while True:
            v = self.grid_min + i * self.grid_step
            if v > self.grid_max + 1e-12:
                break
            vals.append(v)
            i += 1
        return vals

    def describe(self) -> str:
        return (
            f"grid_min={_fmt(self.grid_min)} grid_max={_fmt(self.grid_max)} "
            f"grid_step={_fmt(self.grid_step)} height={self.enum_height} "
            f"orbit_radius={self.orbit_radius} tol={_fmt(self.tol)} "
            f"c_slack={_fmt(self.c_slack)}"
        )


@dataclass(frozen=True)
class SweepRow:
    x: float
    y: float
    d_v: float
    d_l_lower: float
    d_t_est: float
    delta: float


@dataclass(frozen=True)
class SweepSummary:
    max_delta: float
    max_delta_far: float
    max_delta_near: float
    regression_slope: float
    max_undercut: float
    undercut_count: int
    wolpert_violations: tuple[str, ...]
    enum_height: int
    orbit_radius: int

    def items(self):
        return [
            ("max_delta", _fmt(self.max_delta)),
            ("max_delta_dv_ge_2", _fmt(self.max_delta_far)),
            ("max_delta_dv_lt_2", _fmt(self.max_delta_near)),
            ("regression_slope_delta_vs_dv", _fmt(self.regression_slope)),
            ("max_undercut", _fmt(self.max_undercut)),
            ("undercut_count", str(self.undercut_count)),
            ("height", str(self.enum_height)),
            ("orbit_radius", str(self.orbit_radius)),
        ]


def _sweep_column(args) -> list[SweepRow]:
    """All rows with a fixed second grid point; orbit tables are shared
    across the column."""
    cfg, y, xs = args
    t2 = psi(y)
    ball = mapping_class_ball(cfg.orbit_radius)
    scanner = _OrbitScanner(t2, ball, cfg.enum_height)
    fn_y = psi_fn(y)
    rows = []
    for x in xs:
        d_l = scanner.scan(psi(x))
        d_v = quotient_ray_distance_s11(x, y)
        d_t = minsky_teich_estimate(psi_fn(x), fn_y, EPSILON0)
        rows.append(SweepRow(x, y, d_v, d_l, d_t, abs(d_v - d_l)))
    return rows


def _compute_grid_rows(cfg: SweepConfig) -> list[SweepRow]:
    xs = cfg.grid()
    args = [(cfg, y, xs) for y in xs]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            columns = list(ex.map(_sweep_column, args))
    else:
        columns = [_sweep_column(a) for a in args]
    rows = [row for col in columns for row in col]
    rows.sort(key=lambda r: (r.x, r.y))
    return rows


def _regression_slope(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    var = sum((v - mx) ** 2 for v in xs)
    if var == 0.0:
        return 0.0
    cov = sum((u - mx) * (v - my) for u, v in zip(xs, ys))
    return cov / var


def _wolpert_violations(rows, c_slack: float) -> tuple[str, ...]:
    out = []
    for r in rows:
        if r.d_l_lower > r.d_t_est + c_slack:
            out.append(
                f"x={_fmt(r.x)} y={_fmt(r.y)} d_l_lower={_fmt(r.d_l_lower)} "
                f"exceeds d_t_est={_fmt(r.d_t_est)} + c_slack={_fmt(c_slack)}"
            )
    return tuple(out)


def sweep_almost_isometry(cfg: SweepConfig) -> tuple[list[SweepRow], SweepSummary]:
    """Grid sweep comparing the ray distance with the orbit-minimized
    length-spectra bound between the image points."""
    cfg.validate()
    rows = _compute_grid_rows(cfg)
    deltas = [r.delta for r in rows]
    far = [r.delta for r in rows if r.d_v >= 2.0]
    near = [r.delta for r in rows if r.d_v < 2.0]
    undercuts = [r.d_v - r.d_l_lower for r in rows if r.d_v - r.d_l_lower > UNDERCUT_TOL]
    summary = SweepSummary(
        max_delta=max(deltas, default=0.0),
        max_delta_far=max(far, default=0.0),
        max_delta_near=max(near, default=0.0),
        regression_slope=_regression_slope([r.d_v for r in rows], deltas)
        if rows
        else 0.0,
        max_undercut=max(undercuts, default=0.0),
        undercut_count=len(undercuts),
        wolpert_violations=_wolpert_violations(rows, cfg.c_slack),
        enum_height=cfg.enum_height,
        orbit_radius=cfg.orbit_radius,
    )
    return rows, summary


@dataclass(frozen=True)
class CompareRow:
    x: float
    y: float
    d_v: float
    d_t_est: float
    d_l_lower: float
    gap: float
    zero_twist_residual: float


@dataclass(frozen=True)
class CompareSummary:
    max_gap: float
    max_zero_twist_residual: float
    degeneration_violations: tuple[str, ...]
    wolpert_violations: tuple[str, ...]
    enum_height: int
    orbit_radius: int

    def items(self):
        return [
            ("max_gap_dt_minus_dl", _fmt(self.max_gap)),
            ("max_zero_twist_residual", _fmt(self.max_zero_twist_residual)),
            ("height", str(self.enum_height)),
            ("orbit_radius", str(self.orbit_radius)),
        ]


def sweep_teich_comparison(cfg: SweepConfig) -> tuple[list[CompareRow], CompareSummary]:
    """Thin-part comparison: on zero-twist pairs the product-region estimate
    must reproduce the ray distance exactly, and the gap over the
    length-spectra bound estimates the additive constant between the two
    metrics."""
    cfg.validate()
    base = _compute_grid_rows(cfg)
    rows = []
    degeneration = []
    for r in base:
        residual = abs(r.d_t_est - r.d_v)
        if residual > ZERO_TWIST_TOL:
            degeneration.append(
                f"x={_fmt(r.x)} y={_fmt(r.y)} |d_t_est - d_v| = {_fmt(residual)}"
            )
        rows.append(
            CompareRow(
                r.x, r.y, r.d_v, r.d_t_est, r.d_l_lower,
                r.d_t_est - r.d_l_lower, residual,
            )
        )
    summary = CompareSummary(
        max_gap=max((r.gap for r in rows), default=0.0),
        max_zero_twist_residual=max(
            (r.zero_twist_residual for r in rows), default=0.0
        ),
        degeneration_violations=tuple(degeneration),
        wolpert_violations=_wolpert_violations(base, cfg.c_slack),
        enum_height=cfg.enum_height,
        orbit_radius=cfg.orbit_radius,
    )
    return rows, summary


@dataclass(frozen=True)
class DivergenceConfig:
    n_max: int = 12
    enum_height: int = 30
    out: str | None = None
    # schedule overrides; defaults: length eps0 * 2^-n, twists round(2^(n/2))
    lengths: tuple[float, ...] | None = None
    twists: tuple[int, ...] | None = None

    def validate(self):
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.enum_height < 1:
            raise ConfigError("enum_height must be >= 1")
        for seq in (self.lengths, self.twists):
            if seq is not None and len(seq) != self.n_max:
                raise ConfigError("schedule overrides must have n_max entries")

    def schedule(self) -> list[tuple[int, float, int]]:
        out = []
        for n in range(1, self.n_max + 1):
            ln = (
                self.lengths[n - 1]
                if self.lengths is not None
                else EPSILON0 * 2.0 ** (-n)
            )
            kn = (
                self.twists[n - 1]
                if self.twists is not None
                else round(2.0 ** (n / 2.0))
            )
            out.append((n, ln, kn))
        return out

    def describe(self) -> str:
        return f"n_max={self.n_max} height={self.enum_height}"


@dataclass(frozen=True)
class DivergenceRow:
    n: int
    twists: int
    length: float
    d_ls_lower: float
    teich_est: float
    ratio: float


def divergence_sequence(cfg: DivergenceConfig | int) -> list[DivergenceRow]:
    """Twist sequences on a shrinking curve: the marked length-spectra bound
    collapses while the product-region twist estimate stays an order of
    magnitude larger, and the ratio column grows without bound.

    The twist estimate places the two structures at (0, 1/l) and (k, 1/l)
    in the product-region half-plane: the twist displacement is the twist
    count k.  No orbit minimization is applied; on the quotient the pair is
    a single point.
    """
    if isinstance(cfg, int):
        cfg = DivergenceConfig(n_max=cfg)
    cfg.validate()
    rows = []
    for n, ln, kn in cfg.schedule():
        x_n = zero_twist_point(ln)
        y_n = dehn_twist(x_n, kn)
        d_ls = length_spectra_distance(x_n, y_n, cfg.enum_height).lower
        est = h2_distance((0.0, 1.0 / ln), (float(kn), 1.0 / ln))
        ratio = est / d_ls if d_ls > 0.0 else 0.0
        rows.append(DivergenceRow(n, kn, ln, d_ls, est, ratio))
    return rows


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return format(v, ".12g")
    return str(v)


def render_report(
    config_desc: str,
    columns: list[str],
    rows: list[tuple],
    summary_items: list[tuple[str, str]] | None = None,
    violations: list[str] | None = None,
) -> str:
    """Deterministic CSV text: '#' header naming the configuration, summary
    lines, the data, and a trailing violations section when present."""
    lines = [f"# conelab {config_desc}"]
    for key, val in summary_items or []:
        lines.append(f"# summary {key}={val}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    if violations:
        lines.append(f"# violations {len(violations)}")
        for v in violations:
            lines.append(f"# violation {v}")
    return "\n".join(lines) + "\n"


def emit_report(text: str, path) -> None:
    """Write a rendered report; I/O failures carry the path."""
    try:
        Path(path).write_text(text)
    except OSError as err:
        raise OSError(f"cannot write report to {path}: {err}") from err


def render_sweep(cfg: SweepConfig, rows, summary) -> str:
    return render_report(
        f"sweep {cfg.describe()}",
        ["x", "y", "d_v", "d_l_lower", "d_t_est", "delta"],
        [(r.x, r.y, r.d_v, r.d_l_lower, r.d_t_est, r.delta) for r in rows],
        summary.items(),
        list(summary.wolpert_violations),
    )


def render_compare(cfg: SweepConfig, rows, summary) -> str:
    return render_report(
        f"compare {cfg.describe()}",
        ["x", "y", "d_v", "d_t_est", "d_l_lower", "gap", "zero_twist_residual"],
        [
            (r.x, r.y, r.d_v, r.d_t_est, r.d_l_lower, r.gap, r.zero_twist_residual)
            for r in rows
        ],
        summary.items(),
        list(summary.degeneration_violations) + list(summary.wolpert_violations),
    )


def render_divergence(cfg: DivergenceConfig, rows) -> str:
    return render_report(
        f"diverge {cfg.describe()}",
        ["n", "twists", "length", "d_ls_lower", "teich_est", "ratio"],
        [(r.n, r.twists, r.length, r.d_ls_lower, r.teich_est, r.ratio) for r in rows],
    )


_INT_KEYS = {"enum_height", "orbit_radius", "jobs", "n_max"}
_FLOAT_KEYS = {"grid_min", "grid_max", "grid_step", "tol", "c_slack"}
_STR_KEYS = {"out"}


def config_from_file(path, base):
    """Overlay `key = value` lines onto a config dataclass; keys match the
    CLI flag names with '-' or '_' separators ('height' for the enumeration
    height)."""
    settable = ({f.name for f in fields(base)}
                & (_INT_KEYS | _FLOAT_KEYS | _STR_KEYS))
    updates = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path} line {lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if key == "height":
            key = "enum_height"
        val = val.strip()
        if key not in settable:
            raise ConfigError(f"{path} line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                updates[key] = int(val)
            elif key in _FLOAT_KEYS:
                updates[key] = float(val)
            else:
                updates[key] = val
        except ValueError as err:
            raise ConfigError(
                f"{path} line {lineno}: bad value for {key}: {err}"
            ) from err
    return replace(base, **updates)
