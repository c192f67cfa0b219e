"""Command-line front end.

The CLI is a thin client of the HTTP service: it reads a config file,
translates it into a service request, posts it (in process by default, or
to a remote --server), rebuilds the report and writes the artifacts.

Exit codes: 0 success, 1 any failed assertion in the report, 2 config or
request error.
"""

from __future__ import annotations

import asyncio
import sys

import click
import httpx

from . import __version__, expr as ex
from .config import ConfigError, RunConfig, load_config
from .fields import ProblemSpec
from .geometry import Disk, Interval
from .harness import (
    Check,
    LemmaReport,
    LemmaRow,
    RateFit,
    RecoveryReport,
    RecoveryRow,
    SweepReport,
    SweepRow,
)
from .report import write_artifacts
from .service.app import app as service_app

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


def _problem_payload(spec: ProblemSpec) -> dict:
    payload = {
        "lower": list(spec.cuboid.lower),
        "upper": list(spec.cuboid.upper),
        "alpha": spec.alpha,
        "beta": spec.beta,
        "gamma": spec.gamma,
        "kappa": spec.kappa,
        "q": ex.pretty(spec.q),
        "h": ex.pretty(spec.h),
        "g": ex.pretty(spec.g),
    }
    if isinstance(spec.shape, Interval):
        payload.update(shape="interval", a=spec.shape.a1, b=spec.shape.b1)
    else:
        disk: Disk = spec.shape
        payload.update(shape="disk", center=list(disk.center), radius=disk.radius)
    return payload


def _request_payload(cfg: RunConfig, max_nodes: int | None) -> dict:
    return {
        "problem": _problem_payload(cfg.spec),
        "experiment": {
            "eps": cfg.eps_list,
            "rho": cfg.rho,
            "tol": cfg.tol,
            "max_nodes": max_nodes if max_nodes is not None else cfg.max_nodes,
            "u": cfg.u_text,
        },
    }


async def _post_in_process(path: str, payload: dict) -> httpx.Response:
    transport = httpx.ASGITransport(app=service_app)
    async with httpx.AsyncClient(transport=transport, base_url="http://diffuselab") as client:
        return await client.post(path, json=payload, timeout=3600.0)


def _post(path: str, payload: dict, server: str | None) -> dict:
    if server:
        resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=3600.0)
    else:
        resp = asyncio.run(_post_in_process(path, payload))
    if resp.status_code == 422:
        detail = resp.json().get("detail", "invalid request")
        raise ConfigError(str(detail))
    resp.raise_for_status()
    return resp.json()


def _checks(raw: list[dict]) -> list[Check]:
    return [Check(**c) for c in raw]


def _sweep_report(data: dict) -> SweepReport:
    rows = [SweepRow(**{**r, "n_cells": tuple(r["n_cells"])}) for r in data["rows"]]
    return SweepReport(
        kind=data["kind"],
        rows=rows,
        rate_l2=RateFit(**data["rate_l2"]) if data.get("rate_l2") else None,
        rate_h1=RateFit(**data["rate_h1"]) if data.get("rate_h1") else None,
        checks=_checks(data.get("checks", [])),
        notes=list(data.get("notes", [])),
    )


def _recovery_report(data: dict) -> RecoveryReport:
    rows = [RecoveryRow(**{**r, "n_cells": tuple(r["n_cells"])}) for r in data["rows"]]
    return RecoveryReport(
        kind=data["kind"],
        u_text=data["u_text"],
        energy_sharp=data["energy_sharp"],
        rows=rows,
        checks=_checks(data.get("checks", [])),
        notes=list(data.get("notes", [])),
    )


def _lemma_report(data: dict) -> LemmaReport:
    return LemmaReport(
        kind=data["kind"],
        interface_measure=data["interface_measure"],
        n_cells=tuple(data["n_cells"]),
        rows=[LemmaRow(**r) for r in data["rows"]],
        checks=_checks(data.get("checks", [])),
        notes=list(data.get("notes", [])),
    )


def _exit_code(report) -> int:
    failed = [c for c in report.checks if not c.passed and c.severity == "error"]
    failed_rows = [
        r for r in getattr(report, "rows", []) if getattr(r, "failure", None)
    ]
    return EXIT_ASSERTION if failed or failed_rows else EXIT_OK


def _print_summary(report) -> None:
    for c in report.checks:
        status = "PASS" if c.passed else ("WARN" if c.severity == "warning" else "FAIL")
        click.echo(f"[{status}] {c.name}: {c.detail}")
    for r in getattr(report, "rows", []):
        if getattr(r, "failure", None):
            click.echo(f"[FAIL] eps={r.eps}: {r.failure}")


def _run_command(kind: str, config: str, out: str, max_nodes: int | None, server: str | None):
    try:
        cfg = load_config(config)
        if kind == "gamma-check" and cfg.u_text is None:
            raise ConfigError("gamma-check needs `u = \"...\"` in [experiment]")
        data = _post(f"/{kind}", _request_payload(cfg, max_nodes), server)
    except ConfigError as err:
        click.echo(f"config error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    except httpx.HTTPError as err:
        click.echo(f"service error: {err}", err=True)
        sys.exit(EXIT_CONFIG)
    if kind in ("solve", "sweep"):
        report = _sweep_report(data)
    elif kind == "gamma-check":
        report = _recovery_report(data)
    else:
        report = _lemma_report(data)
    paths = write_artifacts(out, report, title=f"{kind}")
    _print_summary(report)
    for p in paths:
        click.echo(f"wrote {p}")
    sys.exit(_exit_code(report))


_common = [
    click.option("--config", "config", required=True, type=click.Path(), help="Run configuration file."),
    click.option("--out", "out", default="out", type=click.Path(file_okay=False), help="Artifact directory."),
    click.option("--max-nodes", "max_nodes", default=None, type=int, help="Override the grid node budget."),
    click.option("--server", "server", default=None, help="Base URL of a running service (default: in process)."),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Numerical laboratory for the diffuse-domain transmission problem."""


@main.command()
@_with_common
def solve(config, out, max_nodes, server):
    """Solve the diffuse problem along the eps list (no sharp reference)."""
    _run_command("solve", config, out, max_nodes, server)


@main.command()
@_with_common
def sweep(config, out, max_nodes, server):
    """Eps sweep against the sharp reference with rate fits."""
    _run_command("sweep", config, out, max_nodes, server)


@main.command("gamma-check")
@_with_common
def gamma_check(config, out, max_nodes, server):
    """Energy-gap decay of a fixed smooth candidate (recovery sequence)."""
    _run_command("gamma-check", config, out, max_nodes, server)


@main.command("lemma-check")
@_with_common
def lemma_check(config, out, max_nodes, server):
    """Trace, perimeter and coefficient-convergence diagnostics."""
    _run_command("lemma-check", config, out, max_nodes, server)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("diffuselab.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
