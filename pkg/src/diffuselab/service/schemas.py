"""Pydantic request and response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import expr as ex
from ..fields import ProblemSpec, SpecError
from ..geometry import Cuboid, Disk, GeometryError, Interval


class ProblemModel(BaseModel):
    lower: list[float] = Field(min_length=1, max_length=2)
    upper: list[float] = Field(min_length=1, max_length=2)
    shape: Literal["interval", "disk"]
    a: Optional[float] = None
    b: Optional[float] = None
    center: Optional[list[float]] = None
    radius: Optional[float] = None
    alpha: float
    beta: float
    gamma: float
    kappa: float = 0.0
    q: str = "0"
    h: str = "0"
    g: str = "0"


class ExperimentModel(BaseModel):
    eps: list[float] = Field(min_length=1)
    rho: float = 4.0
    tol: float = 1e-10
    max_nodes: int = 1_000_000
    u: Optional[str] = None


class RunRequest(BaseModel):
    problem: ProblemModel
    experiment: ExperimentModel


class BadProblem(ValueError):
    """Raised when a structurally valid request describes an invalid problem."""


def build_spec(p: ProblemModel) -> ProblemSpec:
    if len(p.lower) != len(p.upper):
        raise BadProblem("lower and upper must have the same length")
    try:
        box = Cuboid(tuple(p.lower), tuple(p.upper))
        if p.shape == "interval":
            if p.a is None or p.b is None:
                raise BadProblem("interval shape needs a and b")
            shape = Interval(p.a, p.b)
        else:
            if p.center is None or p.radius is None:
                raise BadProblem("disk shape needs center and radius")
            if len(p.center) != 2:
                raise BadProblem("center must be two numbers")
            shape = Disk(tuple(p.center), p.radius)
        exprs = {}
        for name in ("q", "h", "g"):
            try:
                exprs[name] = ex.parse(getattr(p, name))
            except ex.ExprSyntaxError as err:
                raise BadProblem(f"bad expression for {name}: {err}") from None
        return ProblemSpec(
            cuboid=box, shape=shape,
            alpha=p.alpha, beta=p.beta, gamma=p.gamma, kappa=p.kappa,
            **exprs,
        )
    except (GeometryError, SpecError) as err:
        raise BadProblem(str(err)) from None


class CheckModel(BaseModel):
    name: str
    passed: bool
    severity: str
    detail: str


class RateFitModel(BaseModel):
    exponent: float
    residual: float


class SweepRowModel(BaseModel):
    eps: float
    h: float
    n_cells: list[int]
    capped: bool
    err_l2: Optional[float] = None
    err_h1: Optional[float] = None
    energy_diffuse: Optional[float] = None
    energy_sharp: Optional[float] = None
    energy_gap: Optional[float] = None
    perimeter: Optional[float] = None
    trace_ratio: Optional[float] = None
    solver_iterations: Optional[int] = None
    solver_residual: Optional[float] = None
    wall_time: Optional[float] = None
    failure: Optional[str] = None


class SweepResponse(BaseModel):
    kind: str
    rows: list[SweepRowModel]
    rate_l2: Optional[RateFitModel] = None
    rate_h1: Optional[RateFitModel] = None
    checks: list[CheckModel] = []
    notes: list[str] = []


class RecoveryRowModel(BaseModel):
    eps: float
    n_cells: list[int]
    energy_diffuse: float
    gap: float


class RecoveryResponse(BaseModel):
    kind: str
    u_text: str
    energy_sharp: float
    rows: list[RecoveryRowModel]
    checks: list[CheckModel] = []
    notes: list[str] = []


class LemmaRowModel(BaseModel):
    eps: float
    w_name: str
    smeared_surface: float
    sharp_surface: float
    d_blend: float
    d_sharp: float
    c_blend: float
    c_sharp: float
    f_blend: float
    f_sharp: float
    trace_ratio: float
    perimeter: float


class LemmaResponse(BaseModel):
    kind: str
    interface_measure: float
    n_cells: list[int]
    rows: list[LemmaRowModel]
    checks: list[CheckModel] = []
    notes: list[str] = []


class HealthResponse(BaseModel):
    status: str
    version: str
