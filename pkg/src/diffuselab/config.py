"""Line-oriented `key = value` run configuration with [section] headers.

Example:

    [domain]
    lower = -1.0
    upper = 1.0

    [interface]
    shape = interval
    a = -0.5
    b = 0.5

    [coefficients]
    alpha = 2.0
    beta = 1.0
    gamma = 1.0

    [data]
    q = "1"

    [experiment]
    eps = 0.1, 0.05, 0.025

2D uses comma pairs for lower/upper and `shape = disk` with center/radius.
Unknown sections or keys are rejected with the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .fields import ProblemSpec, SpecError
from .geometry import Cuboid, Disk, GeometryError, Interval


class ConfigError(ValueError):
    pass


KNOWN_KEYS = {
    "domain": {"lower", "upper"},
    "interface": {"shape", "a", "b", "center", "radius"},
    "coefficients": {"alpha", "beta", "gamma", "kappa"},
    "data": {"q", "h", "g"},
    "experiment": {"eps", "rho", "tol", "max_nodes", "u"},
}


@dataclass
class RunConfig:
    spec: ProblemSpec
    eps_list: list[float]
    rho: float = 4.0
    tol: float = 1e-10
    max_nodes: int = 1_000_000
    u_expr: ex.Expression | None = None  # recovery-sequence candidate
    u_text: str | None = None


def _parse_lines(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Raw sectioned key/value strings, each tagged with its line number."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in KNOWN_KEYS:
                raise ConfigError(f"line {lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key before any [section] header")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS[current]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if key in sections[current]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current}]")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        sections[current][key] = (value, lineno)
    return sections


class _Section:
    """Typed accessors for one section; records which keys were consumed."""

    def __init__(self, name: str, raw: dict[str, tuple[str, int]]):
        self.name = name
        self.raw = raw

    def _get(self, key: str) -> tuple[str, int] | None:
        return self.raw.get(key)

    def require(self, key: str) -> tuple[str, int]:
        got = self._get(key)
        if got is None:
            raise ConfigError(f"[{self.name}] is missing required key {key!r}")
        return got

    def number(self, key: str, default: float | None = None) -> float:
        got = self._get(key)
        if got is None:
            if default is None:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return default
        value, lineno = got
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be a number, got {value!r}") from None

    def integer(self, key: str, default: int) -> int:
        got = self._get(key)
        if got is None:
            return default
        value, lineno = got
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} must be an integer, got {value!r}") from None

    def numbers(self, key: str) -> tuple[list[float], int]:
        value, lineno = self.require(key)
        try:
            return [float(p) for p in value.split(",")], lineno
        except ValueError:
            raise ConfigError(
                f"line {lineno}: {key} must be comma-separated numbers, got {value!r}"
            ) from None

    def word(self, key: str) -> tuple[str, int]:
        return self.require(key)

    def expression(self, key: str, default: str | None = None) -> tuple[ex.Expression, str]:
        got = self._get(key)
        if got is None:
            if default is None:
                raise ConfigError(f"[{self.name}] is missing required key {key!r}")
            return ex.parse(default), default
        value, lineno = got
        if len(value) < 2 or value[0] not in "\"'" or value[-1] != value[0]:
            raise ConfigError(f"line {lineno}: {key} must be a quoted expression string")
        text = value[1:-1]
        try:
            return ex.parse(text), text
        except ex.ExprSyntaxError as err:
            raise ConfigError(f"line {lineno}: bad expression for {key}: {err}") from None


def parse_config(text: str) -> RunConfig:
    """Parse config text into a validated RunConfig.

    Any structural, type or physical-validity problem raises ConfigError,
    which the CLI maps to exit code 2.
    """
    sections = _parse_lines(text)
    for required in ("domain", "interface", "coefficients", "experiment"):
        if required not in sections:
            raise ConfigError(f"missing required section [{required}]")

    dom = _Section("domain", sections["domain"])
    lower, llineno = dom.numbers("lower")
    upper, ulineno = dom.numbers("upper")
    if len(lower) != len(upper):
        raise ConfigError(f"line {ulineno}: lower and upper must have the same length")
    if len(lower) not in (1, 2):
        raise ConfigError(f"line {llineno}: only 1D and 2D domains are supported")
    try:
        box = Cuboid(tuple(lower), tuple(upper))
    except GeometryError as err:
        raise ConfigError(f"[domain]: {err}") from None

    itf = _Section("interface", sections["interface"])
    kind, klineno = itf.word("shape")
    try:
        if kind == "interval":
            shape = Interval(itf.number("a"), itf.number("b"))
        elif kind == "disk":
            center, clineno = itf.numbers("center")
            if len(center) != 2:
                raise ConfigError(f"line {clineno}: center must be two numbers")
            shape = Disk(tuple(center), itf.number("radius"))
        else:
            raise ConfigError(f"line {klineno}: shape must be 'interval' or 'disk', got {kind!r}")
    except GeometryError as err:
        raise ConfigError(f"[interface]: {err}") from None

    coef = _Section("coefficients", sections["coefficients"])
    data = _Section("data", sections.get("data", {}))
    q, _ = data.expression("q", "0")
    h, _ = data.expression("h", "0")
    g, _ = data.expression("g", "0")
    try:
        spec = ProblemSpec(
            cuboid=box,
            shape=shape,
            alpha=coef.number("alpha"),
            beta=coef.number("beta"),
            gamma=coef.number("gamma"),
            kappa=coef.number("kappa", 0.0),
            q=q,
            h=h,
            g=g,
        )
    except (SpecError, GeometryError) as err:
        raise ConfigError(str(err)) from None

    expm = _Section("experiment", sections["experiment"])
    eps_list, elineno = expm.numbers("eps")
    if not eps_list:
        raise ConfigError(f"line {elineno}: eps list must not be empty")
    if any(not 0.0 < e for e in eps_list):
        raise ConfigError(f"line {elineno}: eps values must be positive")
    if any(not b < a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError(f"line {elineno}: eps list must be strictly decreasing")
    rho = expm.number("rho", 4.0)
    if rho < 2.0:
        raise ConfigError("rho must be >= 2 (layer resolution)")
    tol = expm.number("tol", 1e-10)
    if not 0 < tol < 1:
        raise ConfigError("tol must be in (0, 1)")
    max_nodes = expm.integer("max_nodes", 1_000_000)
    if max_nodes < 100:
        raise ConfigError("max_nodes must be at least 100")
    u_expr = None
    u_text = None
    if "u" in sections["experiment"]:
        u_expr, u_text = expm.expression("u")
    return RunConfig(spec, eps_list, rho, tol, max_nodes, u_expr, u_text)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text)
