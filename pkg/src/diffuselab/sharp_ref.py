"""Reference solvers for the sharp two-sided transmission problem.

Three routes, all variational so the interface conditions are natural:

* closed form in 1D for constant data (piecewise cosh/sinh matching),
* interface-fitted P1 FEM in 1D for general data,
* cut-element P1 FEM in 2D for the disk (Neumann case only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import expr as ex
from .fields import ProblemSpec, SpecError
from .geometry import Disk, Interval
from .linalg import SolveReport, SparseMatrix, cg_solve, thomas_solve


class SingularMatching(ValueError):
    pass


class DegenerateCut(ValueError):
    pass


# ---------------------------------------------------------------------------
# 1D closed form


@dataclass
class Closed1D:
    """Piecewise q/gamma (resp. h/beta) plus cosh/sinh modes per subinterval."""

    spec: ProblemSpec
    breakpoints: tuple[float, float]  # (a1, b1)
    mu_in: float
    mu_out: float
    base_in: float
    base_out: float
    coeffs: np.ndarray = field(repr=False)  # (A_L, B_L, A_M, B_M, A_R, B_R)
    energy: float = 0.0

    def value(self, x):
        x = np.asarray(x, dtype=float)
        a1, b1 = self.breakpoints
        aL, bL, aM, bM, aR, bR = self.coeffs
        inner = self.base_in + aM * np.cosh(self.mu_in * x) + bM * np.sinh(self.mu_in * x)
        left = self.base_out + aL * np.cosh(self.mu_out * x) + bL * np.sinh(self.mu_out * x)
        right = self.base_out + aR * np.cosh(self.mu_out * x) + bR * np.sinh(self.mu_out * x)
        return np.where(x < a1, left, np.where(x > b1, right, inner))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        a1, b1 = self.breakpoints
        aL, bL, aM, bM, aR, bR = self.coeffs
        inner = self.mu_in * (aM * np.sinh(self.mu_in * x) + bM * np.cosh(self.mu_in * x))
        left = self.mu_out * (aL * np.sinh(self.mu_out * x) + bL * np.cosh(self.mu_out * x))
        right = self.mu_out * (aR * np.sinh(self.mu_out * x) + bR * np.cosh(self.mu_out * x))
        return np.where(x < a1, left, np.where(x > b1, right, inner))


def solve_sharp_1d_closed(spec: ProblemSpec) -> Closed1D:
    """Exact solution for 1D constant data; 6x6 matching system."""
    if spec.dim != 1:
        raise SpecError("closed-form solver is 1D only")
    qc, hc, gc = spec.constant_data()
    shape: Interval = spec.shape
    (a,), (b,) = spec.cuboid.lower, spec.cuboid.upper
    a1, b1 = shape.a1, shape.b1
    mu_in = math.sqrt(spec.gamma)
    mu_out = math.sqrt(spec.beta / spec.alpha)
    base_in = qc / spec.gamma
    base_out = hc / spec.beta
    kap = spec.kappa

    def ch(mu, x):
        return math.cosh(mu * x)

    def sh(mu, x):
        return math.sinh(mu * x)

    M = np.zeros((6, 6))
    rhs = np.zeros(6)
    # unknown order: A_L, B_L, A_M, B_M, A_R, B_R
    # outer Neumann at a and b
    M[0, 0] = mu_out * sh(mu_out, a)
    M[0, 1] = mu_out * ch(mu_out, a)
    M[1, 4] = mu_out * sh(mu_out, b)
    M[1, 5] = mu_out * ch(mu_out, b)
    # continuity at a1 and b1
    M[2, 0] = ch(mu_out, a1)
    M[2, 1] = sh(mu_out, a1)
    M[2, 2] = -ch(mu_in, a1)
    M[2, 3] = -sh(mu_in, a1)
    rhs[2] = base_in - base_out
    M[3, 2] = ch(mu_in, b1)
    M[3, 3] = sh(mu_in, b1)
    M[3, 4] = -ch(mu_out, b1)
    M[3, 5] = -sh(mu_out, b1)
    rhs[3] = base_out - base_in
    # flux jump with Robin term; at a1 the interface normal points left
    # u_in'(a1) - alpha u_L'(a1) = kappa u_in(a1) + g
    M[4, 2] = mu_in * sh(mu_in, a1) - kap * ch(mu_in, a1)
    M[4, 3] = mu_in * ch(mu_in, a1) - kap * sh(mu_in, a1)
    M[4, 0] = -spec.alpha * mu_out * sh(mu_out, a1)
    M[4, 1] = -spec.alpha * mu_out * ch(mu_out, a1)
    rhs[4] = gc + kap * base_in
    # -(u_in'(b1) - alpha u_R'(b1)) = kappa u_in(b1) + g
    M[5, 2] = -mu_in * sh(mu_in, b1) - kap * ch(mu_in, b1)
    M[5, 3] = -mu_in * ch(mu_in, b1) - kap * sh(mu_in, b1)
    M[5, 4] = spec.alpha * mu_out * sh(mu_out, b1)
    M[5, 5] = spec.alpha * mu_out * ch(mu_out, b1)
    rhs[5] = gc + kap * base_in

    try:
        coeffs = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as err:  # positive constants keep M regular
        raise SingularMatching(str(err)) from None
    sol = Closed1D(spec, (a1, b1), mu_in, mu_out, base_in, base_out, coeffs)
    sol.energy = _closed_energy(sol)
    return sol


def _closed_energy(sol: Closed1D, n_sub: int = 4096) -> float:
    """Continuum sharp energy of the closed-form solution, composite
    Simpson per subinterval with the analytic derivative."""
    spec = sol.spec
    qc, hc, gc = spec.constant_data()
    (a,), (b,) = spec.cuboid.lower, spec.cuboid.upper
    a1, b1 = sol.breakpoints
    aL, bL, aM, bM, aR, bR = sol.coeffs
    total = 0.0
    # evaluate each piece with its own modes so the one-sided derivative is
    # correct at the interface endpoints (the jump there is O(1))
    for lo, hi, D, c, f, mu, base, am, bm in (
        (a, a1, spec.alpha, spec.beta, hc, sol.mu_out, sol.base_out, aL, bL),
        (a1, b1, 1.0, spec.gamma, qc, sol.mu_in, sol.base_in, aM, bM),
        (b1, b, spec.alpha, spec.beta, hc, sol.mu_out, sol.base_out, aR, bR),
    ):
        x = np.linspace(lo, hi, n_sub + 1)
        u = base + am * np.cosh(mu * x) + bm * np.sinh(mu * x)
        du = mu * (am * np.sinh(mu * x) + bm * np.cosh(mu * x))
        dens = 0.5 * (D * du**2 + c * u**2) - f * u
        w = _simpson_weights(n_sub, (hi - lo) / n_sub)
        total += float(np.sum(w * dens))
    for xi in (a1, b1):
        ui = float(sol.value(xi))
        total += 0.5 * spec.kappa * ui**2 + gc * ui
    return total


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


# ---------------------------------------------------------------------------
# 1D interface-fitted FEM


@dataclass
class FittedFem1D:
    spec: ProblemSpec
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    energy: float = 0.0

    def value(self, x):
        return np.interp(np.asarray(x, dtype=float), self.nodes, self.values)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        slopes = np.diff(self.values) / np.diff(self.nodes)
        k = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, len(slopes) - 1)
        return slopes[k]


def _fitted_mesh(spec: ProblemSpec, n_total: int) -> np.ndarray:
    (a,), (b,) = spec.cuboid.lower, spec.cuboid.upper
    shape: Interval = spec.shape
    pieces = [(a, shape.a1), (shape.a1, shape.b1), (shape.b1, b)]
    total = b - a
    parts = []
    for lo, hi in pieces:
        n = max(2, int(round(n_total * (hi - lo) / total)))
        parts.append(np.linspace(lo, hi, n + 1))
    return np.unique(np.concatenate(parts))


def solve_sharp_1d_fem(spec: ProblemSpec, n_cells: int = 16384) -> FittedFem1D:
    """P1 FEM with the interface endpoints as mesh nodes: exact constant
    coefficients per element, interface terms as point contributions."""
    if spec.dim != 1:
        raise SpecError("fitted FEM solver is 1D only")
    nodes = _fitted_mesh(spec, n_cells)
    n = len(nodes)
    shape: Interval = spec.shape
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    hs = np.diff(nodes)
    inside = shape.signed_distance(mids) >= 0
    D = np.where(inside, 1.0, spec.alpha)
    c = np.where(inside, spec.gamma, spec.beta)

    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    rhs = np.zeros(n)

    stiff = D / hs
    diag[:-1] += stiff + c * hs / 3.0
    diag[1:] += stiff + c * hs / 3.0
    off = -stiff + c * hs / 6.0
    upper[:-1] = off
    lower[1:] = off

    # element load by 2-point Gauss; data picks q inside, h outside
    gp = 1.0 / math.sqrt(3.0)
    for xi in (-gp, gp):
        xs = mids + 0.5 * hs * xi
        qv, hv, _ = spec.eval_data(xs)
        fv = np.where(inside, qv, hv)
        n_left = 0.5 * (1.0 - xi)
        n_right = 0.5 * (1.0 + xi)
        rhs[:-1] += 0.5 * hs * fv * n_left
        rhs[1:] += 0.5 * hs * fv * n_right

    for xi in (shape.a1, shape.b1):
        k = int(np.argmin(np.abs(nodes - xi)))
        _, _, gv = spec.eval_data(np.array([xi]))
        diag[k] += spec.kappa
        rhs[k] -= float(gv[0])

    values = thomas_solve(lower, diag, upper, rhs)
    energy = float(
        0.5
        * (
            values @ (diag * values)
            + values[:-1] @ (upper[:-1] * values[1:])
            + values[1:] @ (lower[1:] * values[:-1])
        )
        - rhs @ values
    )
    return FittedFem1D(spec, nodes, values, energy)


# ---------------------------------------------------------------------------
# 2D cut-element FEM


@dataclass
class CutFem2D:
    spec: ProblemSpec
    n_cells: int
    x_nodes: np.ndarray = field(repr=False)
    y_nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)  # shape (M+1, M+1)
    energy: float = 0.0
    report: SolveReport | None = None
    perturbed_radius: float | None = None  # set when a degenerate cut forced a retry

    def value(self, points):
        pts = np.asarray(points, dtype=float)
        x = pts[..., 0]
        y = pts[..., 1]
        hx = self.x_nodes[1] - self.x_nodes[0]
        hy = self.y_nodes[1] - self.y_nodes[0]
        i = np.clip(((x - self.x_nodes[0]) / hx).astype(int), 0, len(self.x_nodes) - 2)
        j = np.clip(((y - self.y_nodes[0]) / hy).astype(int), 0, len(self.y_nodes) - 2)
        s = (x - self.x_nodes[i]) / hx
        t = (y - self.y_nodes[j]) / hy
        u00 = self.values[i, j]
        u10 = self.values[i + 1, j]
        u01 = self.values[i, j + 1]
        u11 = self.values[i + 1, j + 1]
        lower = u00 + s * (u10 - u00) + t * (u11 - u10)  # triangle with t <= s
        upper_ = u00 + s * (u11 - u01) + t * (u01 - u00)
        return np.where(t <= s, lower, upper_)


def _polygon_area_centroid(pts: np.ndarray) -> tuple[float, np.ndarray]:
    x = pts[:, 0]
    y = pts[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    if abs(area) < 1e-300:
        return 0.0, pts.mean(axis=0)
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return abs(area), np.array([cx, cy])


def _edge_circle_root(p0: np.ndarray, p1: np.ndarray, center: np.ndarray, radius: float) -> float:
    """Parameter t in [0, 1] where the segment p0 + t (p1 - p0) crosses the
    circle; the endpoints are known to lie on opposite sides."""
    d = p1 - p0
    m = p0 - center
    a = d @ d
    b = 2.0 * (m @ d)
    c = m @ m - radius * radius
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise DegenerateCut("no real edge-circle intersection on a sign-change edge")
    sq = math.sqrt(disc)
    roots = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
    ok = [t for t in roots if -1e-12 <= t <= 1.0 + 1e-12]
    if not ok:
        raise DegenerateCut("edge-circle intersection outside the edge")
    # with a genuine sign change exactly one root lies inside the edge
    t = min(ok, key=lambda t: abs(t - 0.5))
    return min(max(t, 0.0), 1.0)


def _assemble_cutfem(spec: ProblemSpec, n_cells: int, radius: float):
    disk: Disk = spec.shape
    center = np.asarray(disk.center)
    (lx, ly), (ux, uy) = spec.cuboid.lower, spec.cuboid.upper
    m = n_cells
    xs = np.linspace(lx, ux, m + 1)
    ys = np.linspace(ly, uy, m + 1)
    ny = m + 1
    nn = (m + 1) * (m + 1)

    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    node = (np.arange(m + 1)[:, None] * ny + np.arange(m + 1)[None, :])

    # two triangles per cell, vertex index arrays of shape (ntri, 3)
    n00 = node[:-1, :-1].ravel()
    n10 = node[1:, :-1].ravel()
    n01 = node[:-1, 1:].ravel()
    n11 = node[1:, 1:].ravel()
    tris = np.concatenate(
        [np.stack([n00, n10, n11], axis=1), np.stack([n00, n11, n01], axis=1)]
    )
    coords = np.stack([xg.ravel(), yg.ravel()], axis=1)
    pv = coords[tris]  # (ntri, 3, 2)
    rv = radius - np.linalg.norm(pv - center, axis=2)
    sv = rv >= 0.0

    # P1 geometry: b_i, c_i and (signed) area per triangle
    x0, x1, x2 = pv[:, 0, 0], pv[:, 1, 0], pv[:, 2, 0]
    y0, y1, y2 = pv[:, 0, 1], pv[:, 1, 1], pv[:, 2, 1]
    bb = np.stack([y1 - y2, y2 - y0, y0 - y1], axis=1)
    cc = np.stack([x2 - x1, x0 - x2, x1 - x0], axis=1)
    area2 = x1 * y2 - x2 * y1 - (x0 * y2 - x2 * y0) + x0 * y1 - x1 * y0
    area = 0.5 * area2
    grads = np.stack([bb, cc], axis=2) / area2[:, None, None]  # (ntri, 3, 2)

    n_inside = sv.sum(axis=1)
    uncut = (n_inside == 0) | (n_inside == 3)
    cut_idx = np.nonzero(~uncut)[0]

    rows = []
    cols = []
    vals = []
    rhs = np.zeros(nn)

    def accumulate(tri_ids, ke):
        # ke shape (len(tri_ids), 3, 3)
        vidx = tris[tri_ids]
        rows.append(np.repeat(vidx, 3, axis=1).ravel())
        cols.append(np.tile(vidx, (1, 3)).ravel())
        vals.append(ke.reshape(len(tri_ids), 9).ravel())

    # uncut triangles, vectorized
    un = np.nonzero(uncut)[0]
    inside_flag = n_inside[un] == 3
    D_un = np.where(inside_flag, 1.0, spec.alpha)
    c_un = np.where(inside_flag, spec.gamma, spec.beta)
    cent = pv[un].mean(axis=1)
    qv, hv, _ = spec.eval_data(cent)
    f_un = np.where(inside_flag, qv, hv)
    gdot = np.einsum("tid,tjd->tij", grads[un], grads[un])
    ke = D_un[:, None, None] * area[un][:, None, None] * gdot
    ke += c_un[:, None, None] * area[un][:, None, None] / 9.0
    accumulate(un, ke)
    load = np.repeat(f_un * area[un] / 3.0, 3)
    np.add.at(rhs, tris[un].ravel(), load)

    # cut triangles, one by one
    qfun = lambda p: float(ex.evaluate(spec.q, {"x": p[0], "y": p[1]}))
    hfun = lambda p: float(ex.evaluate(spec.h, {"x": p[0], "y": p[1]}))
    gfun = lambda p: float(ex.evaluate(spec.g, {"x": p[0], "y": p[1]}))
    for t in cut_idx:
        verts = pv[t]
        s = sv[t]
        # the lone vertex on one side
        if s.sum() == 1:
            lone = int(np.nonzero(s)[0][0])
        else:
            lone = int(np.nonzero(~s)[0][0])
        o1, o2 = [k for k in range(3) if k != lone]
        t1 = _edge_circle_root(verts[lone], verts[o1], center, radius)
        t2 = _edge_circle_root(verts[lone], verts[o2], center, radius)
        p_cut1 = verts[lone] + t1 * (verts[o1] - verts[lone])
        p_cut2 = verts[lone] + t2 * (verts[o2] - verts[lone])
        tri_piece = np.array([verts[lone], p_cut1, p_cut2])
        quad_piece = np.array([p_cut1, verts[o1], verts[o2], p_cut2])
        pieces = [
            (tri_piece, bool(s[lone])),
            (quad_piece, bool(s[o1])),
        ]
        ke = np.zeros((3, 3))
        be = np.zeros(3)
        gdot_t = grads[t] @ grads[t].T
        for poly, is_inside in pieces:
            a_p, c_p = _polygon_area_centroid(poly)
            if a_p == 0.0:
                continue
            D_p = 1.0 if is_inside else spec.alpha
            cz = spec.gamma if is_inside else spec.beta
            f_p = qfun(c_p) if is_inside else hfun(c_p)
            lam = _barycentric(verts, c_p)
            ke += D_p * a_p * gdot_t
            ke += cz * a_p * np.outer(lam, lam)
            be += f_p * a_p * lam
        # chord contribution of the interface line integral
        chord = float(np.linalg.norm(p_cut2 - p_cut1))
        if chord > 0.0:
            midc = 0.5 * (p_cut1 + p_cut2)
            lam = _barycentric(verts, midc)
            be -= gfun(midc) * chord * lam
        vidx = tris[t]
        rows.append(np.repeat(vidx, 3))
        cols.append(np.tile(vidx, 3))
        vals.append(ke.ravel())
        np.add.at(rhs, vidx, be)

    A = SparseMatrix(
        sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(nn, nn),
        )
    )
    return A, rhs, xs, ys


def _barycentric(verts: np.ndarray, p: np.ndarray) -> np.ndarray:
    T = np.array(
        [
            [verts[0, 0] - verts[2, 0], verts[1, 0] - verts[2, 0]],
            [verts[0, 1] - verts[2, 1], verts[1, 1] - verts[2, 1]],
        ]
    )
    l01 = np.linalg.solve(T, p - verts[2])
    return np.array([l01[0], l01[1], 1.0 - l01[0] - l01[1]])


def solve_sharp_2d_cutfem(
    spec: ProblemSpec,
    n_cells: int = 256,
    tol: float = 1e-10,
    max_iter: int = 50_000,
) -> CutFem2D:
    """Cut-element P1 FEM on a structured right-triangle mesh of the box."""
    if spec.dim != 2:
        raise SpecError("cut FEM solver is 2D only")
    if spec.kappa != 0:
        raise SpecError("Robin case supported in 1D only")
    disk: Disk = spec.shape
    radius = disk.radius
    perturbed = None
    for attempt in range(4):
        try:
            A, rhs, xs, ys = _assemble_cutfem(spec, n_cells, radius)
            break
        except DegenerateCut:
            radius += 1e-10
            perturbed = radius
    else:
        raise DegenerateCut("could not resolve degenerate cut by perturbation")
    x, report = cg_solve(A, rhs, tol=tol, max_iter=max_iter)
    energy = float(0.5 * x @ A.matvec(x) - rhs @ x)
    values = x.reshape((n_cells + 1, n_cells + 1))
    return CutFem2D(spec, n_cells, xs, ys, values, energy, report, perturbed)
