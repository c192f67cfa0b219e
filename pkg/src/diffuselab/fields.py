"""Problem data and the diffuse / sharp coefficient blends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .geometry import (
    CLEARANCE_FACTOR,
    Cuboid,
    InterfaceShape,
    check_shape_in_box,
    inside_mask,
    phase_field,
    phase_field_slope,
    signed_distance,
)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of one two-sided problem instance.

    alpha scales diffusion outside the inner region, beta/gamma are the
    zeroth-order coefficients outside/inside, kappa the interface Robin
    coefficient, and q, h, g the volumetric/interface data expressions.
    """

    cuboid: Cuboid
    shape: InterfaceShape
    alpha: float
    beta: float
    gamma: float
    kappa: float
    q: ex.Expression
    h: ex.Expression
    g: ex.Expression

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive, got {getattr(self, name)}")
        if self.kappa < 0:
            raise SpecError(f"kappa must be nonnegative, got {self.kappa}")
        if self.kappa > 0 and self.cuboid.dim != 1:
            raise SpecError("Robin case (kappa > 0) supported in 1D only")
        check_shape_in_box(self.shape, self.cuboid)

    @property
    def dim(self) -> int:
        return self.cuboid.dim

    def max_eps(self) -> float:
        """Largest admissible layer width for this geometry."""
        return self.shape.clearance(self.cuboid) / CLEARANCE_FACTOR

    def _env(self, points: np.ndarray) -> dict:
        pts = np.asarray(points, dtype=float)
        if self.dim == 1:
            return {"x": pts}
        return {"x": pts[..., 0], "y": pts[..., 1]}

    def eval_data(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Evaluate (q, h, g) at points, broadcast to the point shape."""
        env = self._env(points)
        base = env["x"]
        out = []
        for e in (self.q, self.h, self.g):
            v = ex.evaluate(e, env)
            out.append(np.broadcast_to(np.asarray(v, dtype=float), np.shape(base)).copy())
        return tuple(out)

    def has_constant_data(self) -> bool:
        return all(ex.is_constant(e) for e in (self.q, self.h, self.g))

    def constant_data(self) -> tuple[float, float, float]:
        if not self.has_constant_data():
            raise SpecError("data expressions are not constant")
        return tuple(float(ex.evaluate(e, {})) for e in (self.q, self.h, self.g))


def coeff_diffuse(spec: ProblemSpec, points: np.ndarray, eps: float):
    """Pointwise diffuse blends (D_eps, c_eps, f_eps, |grad phi_eps|)."""
    r = signed_distance(spec.shape, points)
    phi = phase_field(r, eps)
    d = spec.alpha + (1.0 - spec.alpha) * phi
    c = spec.beta + (spec.gamma - spec.beta) * phi
    qv, hv, _ = spec.eval_data(points)
    f = hv + (qv - hv) * phi
    s = phase_field_slope(r, eps)
    return d, c, f, s


def coeff_sharp(spec: ProblemSpec, points: np.ndarray):
    """Pointwise sharp coefficients (D_0, c_0, f_0) from exact region
    classification of the signed distance (interface points count inside)."""
    r = signed_distance(spec.shape, points)
    inside = inside_mask(r)
    d = np.where(inside, 1.0, spec.alpha)
    c = np.where(inside, spec.gamma, spec.beta)
    qv, hv, _ = spec.eval_data(points)
    f = np.where(inside, qv, hv)
    return d, c, f
