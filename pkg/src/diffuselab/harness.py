"""Experiment orchestration: eps sweeps, theorem checks and rate fits."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .diffuse import solve_diffuse
from .energy import (
    energy_diffuse,
    error_norms,
    interface_points,
    sharp_energy_expression,
)
from .fields import ProblemSpec, coeff_diffuse, coeff_sharp
from .geometry import check_layer_fits, phase_field_slope, signed_distance
from .grid import Grid, GridField, integrate, norm_delta_eps, norm_h1, sample
from .sharp_ref import (
    solve_sharp_1d_closed,
    solve_sharp_1d_fem,
    solve_sharp_2d_cutfem,
)

SUBSEQUENCE_NOTE = (
    "The H1 convergence guarantee holds up to a subsequence; full-sequence "
    "monotone decrease is asserted only as an empirical check."
)

PERIMETER_NOTE = (
    "The measured value of the smeared-delta integral is compared against the "
    "interface measure (2 for an interval, 2*pi*R for a disk); no unit "
    "normalization is asserted."
)


class DegenerateData(ValueError):
    pass


class SweepError(ValueError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    severity: str  # "error" | "warning" | "info"
    detail: str


@dataclass
class RateFit:
    exponent: float
    residual: float


@dataclass
class SweepRow:
    eps: float
    h: float
    n_cells: tuple[int, ...]
    capped: bool
    err_l2: float | None = None
    err_h1: float | None = None
    energy_diffuse: float | None = None
    energy_sharp: float | None = None
    energy_gap: float | None = None
    perimeter: float | None = None
    trace_ratio: float | None = None
    solver_iterations: int | None = None
    solver_residual: float | None = None
    wall_time: float | None = None
    failure: str | None = None


@dataclass
class SweepReport:
    kind: str
    rows: list[SweepRow]
    rate_l2: RateFit | None = None
    rate_h1: RateFit | None = None
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def fit_rate(pairs: list[tuple[float, float]]) -> RateFit:
    """Least-squares slope of log(error) against log(eps)."""
    if len(pairs) < 3:
        raise DegenerateData("need at least 3 (eps, error) pairs")
    eps = np.array([p[0] for p in pairs])
    err = np.array([p[1] for p in pairs])
    if np.any(eps <= 0) or np.any(err <= 0):
        raise DegenerateData("rate fit needs positive eps and error values")
    A = np.stack([np.log(eps), np.ones(len(pairs))], axis=1)
    sol, res, _, _ = np.linalg.lstsq(A, np.log(err), rcond=None)
    residual = float(np.sqrt(res[0])) if len(res) else 0.0
    return RateFit(float(sol[0]), residual)


def grid_for_eps(spec: ProblemSpec, eps: float, rho: float, max_nodes: int) -> tuple[Grid, bool]:
    """Layer-coupled grid h = eps/rho, scaled down when it would exceed the
    node budget (the row is then flagged as discretization-capped)."""
    h = eps / rho
    n = [max(8, int(round(L / h))) for L in spec.cuboid.lengths]
    capped = False
    nodes = math.prod(k + 1 for k in n)
    if nodes > max_nodes:
        scale = (max_nodes / nodes) ** (1.0 / spec.dim)
        n = [max(8, int(k * scale)) for k in n]
        capped = True
    return Grid(spec.cuboid, tuple(n)), capped


def sharp_reference(spec: ProblemSpec, fem_cells_1d: int = 16384, cutfem_cells: int = 256):
    """Pick the sharp oracle: closed form for 1D constant Neumann data,
    fitted FEM otherwise in 1D, cut FEM in 2D."""
    if spec.dim == 1:
        if spec.kappa == 0 and spec.has_constant_data():
            return solve_sharp_1d_closed(spec)
        return solve_sharp_1d_fem(spec, fem_cells_1d)
    return solve_sharp_2d_cutfem(spec, cutfem_cells)


def _bump_expression(spec: ProblemSpec) -> ex.Expression:
    (a,), (b,) = spec.cuboid.lower[:1], spec.cuboid.upper[:1]
    mid = 0.5 * (a + b)
    width = 0.25 * (b - a)
    return ex.parse(f"exp(-((x - {mid!r}) / {width!r})^2)")


def _slope_field(spec: ProblemSpec, grid: Grid, eps: float) -> GridField:
    pts = grid.axis_nodes(0) if grid.dim == 1 else grid.points()
    return GridField(grid, np.broadcast_to(
        phase_field_slope(signed_distance(spec.shape, pts), eps), grid.shape).copy())


def _sample_expr(grid: Grid, e: ex.Expression) -> GridField:
    if grid.dim == 1:
        return sample(grid, lambda x: ex.evaluate(e, {"x": x}))
    return sample(grid, lambda x, y: ex.evaluate(e, {"x": x, "y": y}))


def _monotone_checks(
    report: SweepReport,
    eps_list: list[float],
    columns: dict[str, list[float | None]],
) -> None:
    """Strict-decrease and last/first assertions per column; a single
    non-monotone step is downgraded to a warning (subsequence honesty).

    The last/first <= 0.3 bound is asserted only for halving sweeps of at
    least 4 points; shorter or irregular eps lists get the strict-decrease
    assertion alone.
    """
    halving = len(eps_list) >= 4 and all(
        abs(b / a - 0.5) < 1e-6 for a, b in zip(eps_list, eps_list[1:])
    )
    for name, vals in columns.items():
        vals = [v for v in vals if v is not None]
        if len(vals) < 2:
            continue
        if max(vals) <= 1e-10:
            report.checks.append(Check(
                f"{name} monotone decrease", True, "info",
                "column at exactness floor (<= 1e-10); monotonicity not applicable"))
            continue
        violations = sum(1 for a, b in zip(vals, vals[1:]) if not b < a)
        ratio = vals[-1] / vals[0]
        ratio_ok = ratio <= 0.3 if halving else True
        if violations == 0 and ratio_ok:
            report.checks.append(Check(
                f"{name} monotone decrease", True, "error",
                f"strictly decreasing, last/first = {ratio:.3g}"))
        elif violations == 1:
            report.checks.append(Check(
                f"{name} monotone decrease", True, "warning",
                f"one non-monotone step (subsequence allowance), last/first = {ratio:.3g}"))
        elif violations == 0:
            report.checks.append(Check(
                f"{name} monotone decrease", False, "error",
                f"strictly decreasing but last/first = {ratio:.3g} > 0.3"))
        else:
            report.checks.append(Check(
                f"{name} monotone decrease", False, "error",
                f"{violations} non-monotone steps, last/first = {ratio:.3g}"))


def eps_sweep(
    spec: ProblemSpec,
    eps_list: list[float],
    rho: float = 4.0,
    max_nodes: int = 1_000_000,
    tol: float = 1e-10,
    with_reference: bool = True,
) -> SweepReport:
    """Solve the diffuse problem along a decreasing eps list and compare
    against the sharp oracle; fit empirical rates on uncapped rows."""
    if any(not b < a for a, b in zip(eps_list, eps_list[1:])):
        raise SweepError("eps list must be strictly decreasing")
    if rho < 2.0:
        raise SweepError("need rho = eps/h >= 2")
    check_layer_fits(spec.shape, spec.cuboid, max(eps_list))

    ref = None
    f0 = None
    if with_reference:
        ref = sharp_reference(spec)
        f0 = ref.energy
    bump = _bump_expression(spec)

    report = SweepReport(kind="sweep" if with_reference else "solve", rows=[])
    report.notes.append(SUBSEQUENCE_NOTE)
    report.notes.append(PERIMETER_NOTE)
    for eps in eps_list:
        t0 = time.perf_counter()
        grid, capped = grid_for_eps(spec, eps, rho, max_nodes)
        row = SweepRow(eps=eps, h=max(grid.spacing), n_cells=grid.n_cells, capped=capped)
        try:
            sol = solve_diffuse(spec, grid, eps, tol=tol)
            row.energy_diffuse = sol.energy
            row.solver_iterations = sol.report.iterations
            row.solver_residual = sol.report.relative_residual
            row.perimeter = integrate(_slope_field(spec, grid, eps))
            wfld = _sample_expr(grid, bump)
            row.trace_ratio = norm_delta_eps(wfld, spec.shape, eps) / norm_h1(wfld)
            if ref is not None:
                errs = error_norms(sol.u, ref, grid)
                row.err_l2 = errs["l2"]
                row.err_h1 = errs["h1"]
                row.energy_sharp = f0
                row.energy_gap = abs(sol.energy - f0)
        except Exception as err:  # keep sweeping, record the row failure
            row.failure = f"{type(err).__name__}: {err}"
        row.wall_time = time.perf_counter() - t0
        report.rows.append(row)

    ok_rows = [r for r in report.rows if r.failure is None]
    if not ok_rows:
        raise SweepError("all sweep rows failed: " + "; ".join(r.failure or "" for r in report.rows))

    if with_reference:
        fit_rows = [r for r in ok_rows if not r.capped]
        for attr, slot in (("err_l2", "rate_l2"), ("err_h1", "rate_h1")):
            pairs = [(r.eps, getattr(r, attr)) for r in fit_rows if getattr(r, attr)]
            if pairs and max(v for _, v in pairs) <= 1e-10:
                continue  # exactness floor: a rate fit would model roundoff noise
            try:
                setattr(report, slot, fit_rate(pairs))
            except DegenerateData:
                setattr(report, slot, None)
        _monotone_checks(report, [r.eps for r in ok_rows], {
            "err_l2": [r.err_l2 for r in ok_rows],
            "err_h1": [r.err_h1 for r in ok_rows],
            "energy_gap": [r.energy_gap for r in ok_rows],
        })
    return report


@dataclass
class RecoveryRow:
    eps: float
    n_cells: tuple[int, ...]
    energy_diffuse: float
    gap: float


@dataclass
class RecoveryReport:
    kind: str
    u_text: str
    energy_sharp: float
    rows: list[RecoveryRow]
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def gamma_recovery_check(
    spec: ProblemSpec,
    u_expr: ex.Expression,
    eps_list: list[float],
    rho: float = 4.0,
    max_nodes: int = 1_000_000,
) -> RecoveryReport:
    """Fixed smooth u as its own recovery sequence: tabulate the gap between
    the diffuse and sharp energies of u along the eps list."""
    check_layer_fits(spec.shape, spec.cuboid, max(eps_list))
    f0 = sharp_energy_expression(spec, u_expr)
    rows = []
    for eps in eps_list:
        grid, _ = grid_for_eps(spec, eps, rho, max_nodes)
        u = _sample_expr(grid, u_expr)
        f_eps = energy_diffuse(spec, grid, eps, u).total
        rows.append(RecoveryRow(eps, grid.n_cells, f_eps, abs(f_eps - f0)))
    report = RecoveryReport("gamma-check", ex.pretty(u_expr), f0, rows)
    gaps = [r.gap for r in rows]
    if len(gaps) >= 2:
        if max(gaps) <= 1e-12:
            report.checks.append(Check("recovery gap decrease", True, "info",
                                       "gaps at floor (<= 1e-12)"))
        else:
            ok = all(b < a for a, b in zip(gaps, gaps[1:]))
            report.checks.append(Check(
                "recovery gap decrease", ok, "error",
                f"gaps {', '.join(f'{g:.3g}' for g in gaps)}"))
    return report


@dataclass
class LemmaRow:
    eps: float
    w_name: str
    smeared_surface: float  # integral of w against |grad phi_eps|
    sharp_surface: float  # interface integral of w
    d_blend: float
    d_sharp: float
    c_blend: float
    c_sharp: float
    f_blend: float
    f_sharp: float
    trace_ratio: float
    perimeter: float


@dataclass
class LemmaReport:
    kind: str
    interface_measure: float
    n_cells: tuple[int, ...]
    rows: list[LemmaRow]
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def lemma_panel(spec: ProblemSpec) -> dict[str, ex.Expression]:
    (a,) = spec.cuboid.lower[:1]
    (b,) = spec.cuboid.upper[:1]
    L = b - a
    return {
        "one": ex.parse("1"),
        "linear": ex.parse("x"),
        "cosine": ex.parse(f"cos({math.pi / L!r} * x)"),
        "bump": _bump_expression(spec),
    }


def lemma_checks(
    spec: ProblemSpec,
    eps_list: list[float],
    rho: float = 4.0,
    max_nodes: int = 4_000_000,
    extra_w: dict[str, ex.Expression] | None = None,
) -> LemmaReport:
    """Trace/perimeter/coefficient-convergence diagnostics on one fixed fine
    grid (resolving the smallest eps) for a panel of test functions."""
    check_layer_fits(spec.shape, spec.cuboid, max(eps_list))
    grid, _ = grid_for_eps(spec, min(eps_list), rho, max_nodes)
    panel = lemma_panel(spec)
    if extra_w:
        panel.update(extra_w)

    pts = grid.axis_nodes(0) if grid.dim == 1 else grid.points()
    d0, c0, f0v = coeff_sharp(spec, pts)
    w_quad = grid.quad_weights()
    ipts = interface_points(spec)
    ds = spec.shape.boundary_measure() / (len(ipts) if spec.dim == 2 else 1)

    rows = []
    for eps in eps_list:
        d_eps, c_eps, f_eps, slope = coeff_diffuse(spec, pts, eps)
        perimeter = float(np.sum(w_quad * slope))
        for name, wex in panel.items():
            wfld = _sample_expr(grid, wex)
            wv = wfld.values
            if spec.dim == 1:
                w_if = np.asarray(ex.evaluate(wex, {"x": ipts}), dtype=float)
                sharp_surf = float(np.sum(np.broadcast_to(w_if, ipts.shape)))
            else:
                w_if = np.asarray(
                    ex.evaluate(wex, {"x": ipts[:, 0], "y": ipts[:, 1]}), dtype=float)
                sharp_surf = float(np.sum(np.broadcast_to(w_if, (len(ipts),))) * ds)
            rows.append(LemmaRow(
                eps=eps,
                w_name=name,
                smeared_surface=float(np.sum(w_quad * slope * wv)),
                sharp_surface=sharp_surf,
                d_blend=float(np.sum(w_quad * d_eps * wv**2)),
                d_sharp=float(np.sum(w_quad * d0 * wv**2)),
                c_blend=float(np.sum(w_quad * c_eps * wv**2)),
                c_sharp=float(np.sum(w_quad * c0 * wv**2)),
                f_blend=float(np.sum(w_quad * f_eps * wv)),
                f_sharp=float(np.sum(w_quad * f0v * wv)),
                trace_ratio=norm_delta_eps(wfld, spec.shape, eps) / norm_h1(wfld),
                perimeter=perimeter,
            ))
    report = LemmaReport("lemma-check", spec.shape.boundary_measure(), grid.n_cells, rows)
    report.notes.append(PERIMETER_NOTE)

    # perimeter approach and trace-ratio band checks
    perims = [r.perimeter for r in rows if r.w_name == "one"]
    gaps = [abs(p - spec.shape.boundary_measure()) for p in perims]
    ok = all(b < a or b <= 1e-10 for a, b in zip(gaps, gaps[1:]))
    report.checks.append(Check("perimeter approach", ok, "error",
                               f"gaps {', '.join(f'{g:.3g}' for g in gaps)}"))
    for name in panel:
        ratios = [r.trace_ratio for r in rows if r.w_name == name]
        band = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
        report.checks.append(Check(
            f"trace ratio band ({name})", band <= 2.0, "error",
            f"max/min = {band:.3g} over {len(ratios)} eps values"))
    return report
