"""Uniform Cartesian grids, trapezoid quadrature and discrete norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Cuboid, InterfaceShape, phase_field, phase_field_slope


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid of nodes over a cuboid.

    n_cells is the number of cells per axis; there are n_cells + 1 nodes
    per axis, including both endpoints.
    """

    cuboid: Cuboid
    n_cells: tuple[int, ...]

    def __post_init__(self):
        if len(self.n_cells) != self.cuboid.dim:
            raise GridError("n_cells must have one entry per axis")
        for n in self.n_cells:
            if n < 8:
                raise GridError(f"need at least 8 cells per axis, got {n}")

    @property
    def dim(self) -> int:
        return self.cuboid.dim

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.cuboid.lengths, self.n_cells))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.n_cells)

    @property
    def num_nodes(self) -> int:
        return int(np.prod(self.shape))

    def axis_nodes(self, axis: int) -> np.ndarray:
        return np.linspace(self.cuboid.lower[axis], self.cuboid.upper[axis], self.n_cells[axis] + 1)

    def meshgrid(self) -> list[np.ndarray]:
        axes = [self.axis_nodes(a) for a in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def points(self) -> np.ndarray:
        """Node coordinates, shape (*grid.shape, dim)."""
        return np.stack(self.meshgrid(), axis=-1)

    def axis_weights(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        w = np.full(self.n_cells[axis] + 1, h)
        w[0] = w[-1] = 0.5 * h
        return w

    def quad_weights(self) -> np.ndarray:
        """Tensor-product trapezoid weights, shape grid.shape."""
        if self.dim == 1:
            return self.axis_weights(0)
        wx = self.axis_weights(0)
        wy = self.axis_weights(1)
        return np.outer(wx, wy)


@dataclass
class GridField:
    """One scalar value per grid node, stored in grid.shape layout."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise GridError("field values must be finite")


def sample(grid: Grid, f: Callable) -> GridField:
    """Sample a callable at the grid nodes.

    1D callables receive the x array; 2D callables receive (x, y) arrays.
    """
    if grid.dim == 1:
        vals = np.asarray(f(grid.axis_nodes(0)), dtype=float)
        vals = np.broadcast_to(vals, grid.shape).copy()
    else:
        xg, yg = grid.meshgrid()
        vals = np.broadcast_to(np.asarray(f(xg, yg), dtype=float), grid.shape).copy()
    return GridField(grid, vals)


def integrate(fld: GridField) -> float:
    """Trapezoid-rule integral over the cuboid."""
    return float(np.sum(fld.grid.quad_weights() * fld.values))


def gradient(fld: GridField) -> list[np.ndarray]:
    """Central differences interior, one-sided second order at the boundary."""
    g = np.gradient(fld.values, *[fld.grid.axis_nodes(a) for a in range(fld.grid.dim)], edge_order=2)
    if fld.grid.dim == 1:
        return [g]
    return list(g)


def _grad_sq(fld: GridField) -> np.ndarray:
    comps = gradient(fld)
    out = comps[0] ** 2
    for c in comps[1:]:
        out = out + c**2
    return out


def norm_l2(fld: GridField) -> float:
    return float(np.sqrt(np.sum(fld.grid.quad_weights() * fld.values**2)))


def norm_h1(fld: GridField) -> float:
    dens = _grad_sq(fld) + fld.values**2
    return float(np.sqrt(np.sum(fld.grid.quad_weights() * dens)))


def _signed_distance_nodes(grid: Grid, shape: InterfaceShape) -> np.ndarray:
    if grid.dim == 1:
        return shape.signed_distance(grid.axis_nodes(0))
    return shape.signed_distance(grid.points())


def norm_phi_eps(fld: GridField, shape: InterfaceShape, eps: float) -> float:
    """H1-type norm weighted by the phase field."""
    phi = phase_field(_signed_distance_nodes(fld.grid, shape), eps)
    dens = phi * (_grad_sq(fld) + fld.values**2)
    return float(np.sqrt(np.sum(fld.grid.quad_weights() * dens)))


def norm_delta_eps(fld: GridField, shape: InterfaceShape, eps: float) -> float:
    """L2-type norm weighted by the smeared surface delta |grad phi_eps|."""
    slope = phase_field_slope(_signed_distance_nodes(fld.grid, shape), eps)
    return float(np.sqrt(np.sum(fld.grid.quad_weights() * slope * fld.values**2)))


def norm(fld: GridField, kind: str, shape: InterfaceShape | None = None, eps: float | None = None) -> float:
    """Dispatch on kind: 'l2', 'h1', 'phi_eps', 'delta_eps'."""
    if kind == "l2":
        return norm_l2(fld)
    if kind == "h1":
        return norm_h1(fld)
    if kind in ("phi_eps", "delta_eps"):
        if shape is None or eps is None:
            raise GridError(f"norm kind {kind!r} needs shape and eps")
        fn = norm_phi_eps if kind == "phi_eps" else norm_delta_eps
        return fn(fld, shape, eps)
    raise GridError(f"unknown norm kind {kind!r}")
