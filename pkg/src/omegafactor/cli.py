"""omegafactor command-line interface.

  omegafactor validate <spec>         check a forest-family spec, print it normalized
  omegafactor ball                    materialize a finite window (JSON or DOT)
  omegafactor edge / label / vertex   single queries against the engine
  omegafactor verify [--pipeline]     window checks against the brute-force oracle
  omegafactor simulate --config F     run the forest scheduler, optionally write a trace
  omegafactor check-trace --trace F   replay a trace file independently

Specs are built-in names (k2-family, lambda:<n|omega>, omega-regular, star-mix,
mixed-trees), names listed under [families] in the config, or JSON files.
Exit codes: 0 ok, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import tomllib
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import typer
from pydantic import ValidationError
from rich.console import Console

from omegafactor import __version__
from omegafactor.config import Config
from omegafactor.logging import bind_scope, configure

if TYPE_CHECKING:
    from omegafactor.domain import TreeAddress
    from omegafactor.engine.factorization import FactorizationEngine
    from omegafactor.forests.spec import ForestFamilySpec

app = typer.Typer(
    name="omegafactor",
    help="Lazy factorizations of the omega-regular tree into forest families.",
    no_args_is_help=True,
    add_completion=False,
)
err = Console(stderr=True)

SPEC_HELP = "built-in family name, [families] entry, or spec JSON path"


@dataclass
class _State:
    config: Config = field(default_factory=Config)


state = _State()


@app.callback()
def main(
    config_dir: str = typer.Option("config", help="config directory"),
    log_level: str | None = typer.Option(None, help="log level (default from config)"),
) -> None:
    try:
        state.config = Config.load(config_dir)
    except (ValidationError, tomllib.TOMLDecodeError, OSError) as e:
        err.print(f"[red]bad config in {config_dir}:[/red] {e}")
        raise typer.Exit(2) from e
    lc = state.config.logging
    configure(
        level=log_level or lc.level,
        json_file=Path(lc.json_file) if lc.json_file else None,
    )


def _emit(text: str, out: Path | None = None) -> None:
    from omegafactor.jsonio import write_text

    if out is None:
        typer.echo(text, nl=False)
    else:
        write_text(out, text)
        err.print(f"[green]wrote[/green] {out}")


def _fail(msg: str, code: int = 2) -> typer.Exit:
    err.print(f"[red]{msg}[/red]")
    return typer.Exit(code)


def _resolve_spec(name: str) -> ForestFamilySpec:
    from omegafactor.domain import SpecFormatError
    from omegafactor.forests.spec import builtin_spec, load_spec

    try:
        spec = builtin_spec(name)
    except SpecFormatError as e:
        raise _fail(str(e)) from e
    if spec is not None:
        return spec
    path = state.config.family_path(name) or Path(name)
    if not path.exists():
        raise _fail(f"unknown family {name!r}: not built in, not configured, no such file")
    try:
        return load_spec(path)
    except SpecFormatError as e:
        raise _fail(str(e)) from e


def _engine(name: str) -> FactorizationEngine:
    from omegafactor.domain import FamilyValidationError
    from omegafactor.engine.factorization import FactorizationEngine
    from omegafactor.forests.family import ForestFamily

    spec = _resolve_spec(name)
    try:
        family = ForestFamily.from_spec(spec)
    except FamilyValidationError as e:
        raise _fail(str(e)) from e
    return FactorizationEngine(family, memo_budget=state.config.engine.memo_budget)


def _address(text: str) -> TreeAddress:
    from omegafactor.domain import AddressError, TreeAddress

    try:
        return TreeAddress.parse(text)
    except AddressError as e:
        raise _fail(str(e)) from e


@contextmanager
def _engine_errors() -> Iterator[None]:
    from omegafactor.domain import MemoBudgetExceeded

    try:
        yield
    except MemoBudgetExceeded as e:
        raise _fail(str(e)) from e


@app.command()
def version() -> None:
    """Print the omegafactor version."""
    typer.echo(f"omegafactor {__version__}")


@app.command()
def validate(spec: str = typer.Argument(..., help=SPEC_HELP)) -> None:
    """Check a family against the factorization hypotheses; print it normalized."""
    from omegafactor.domain import SpecFormatError
    from omegafactor.forests.spec import normalize_spec
    from omegafactor.forests.spec import validate as validate_spec
    from omegafactor.jsonio import dumps

    fam = _resolve_spec(spec)
    try:
        report = validate_spec(fam)
    except SpecFormatError as e:
        raise _fail(str(e)) from e
    if not report.ok:
        typer.echo(dumps(report.to_dict()), nl=False)
        for v in report.violations:
            err.print(f"[red]violation:[/red] {v.message}")
        raise typer.Exit(2)
    _emit(normalize_spec(fam))


@app.command()
def ball(
    spec: str = typer.Option("k2-family", help=SPEC_HELP),
    radius: int = typer.Option(2, min=0, help="window radius d"),
    sons: int = typer.Option(3, min=0, help="sons per vertex k"),
    factors: int = typer.Option(4, min=0, help="factors M"),
    fmt: str = typer.Option("json", "--format", help="json or dot"),
    out: Path | None = typer.Option(None, help="output file (default stdout)"),
    max_depth: int | None = typer.Option(None, help="radius cap (default from config)"),
) -> None:
    """Materialize ball(d, k) with labels for factors < M and every edge assignment."""
    from omegafactor.domain import MemoBudgetExceeded, WindowTooLarge
    from omegafactor.engine.window import materialize_ball

    if fmt not in ("json", "dot"):
        raise _fail(f"--format must be json or dot, got {fmt!r}")
    bind_scope(command="ball", family=spec)
    eng = _engine(spec)
    cap = state.config.engine.max_depth if max_depth is None else max_depth
    try:
        window = materialize_ball(eng, radius, sons, factors, max_depth=cap)
    except (WindowTooLarge, MemoBudgetExceeded) as e:
        raise _fail(str(e)) from e
    _emit(window.to_json_text() if fmt == "json" else window.to_dot(), out)


@app.command()
def edge(
    address: str = typer.Option(..., help="parent address, e.g. /3/1"),
    slot: int = typer.Option(..., min=0, help="son slot s"),
    spec: str = typer.Option("k2-family", help=SPEC_HELP),
) -> None:
    """Print the (m, i, j) assignment of the edge to son slot s."""
    from omegafactor.jsonio import dumps

    eng = _engine(spec)
    with _engine_errors():
        a = eng.factor_of_edge(_address(address), slot)
    typer.echo(dumps({"m": a.m, "i": a.i, "j": a.j}), nl=False)


@app.command()
def label(
    address: str = typer.Option(..., help="tree address, e.g. /3/1"),
    factor: int = typer.Option(..., min=0, help="factor m"),
    spec: str = typer.Option("k2-family", help=SPEC_HELP),
) -> None:
    """Print the forest vertex index carried by an address in factor m."""
    eng = _engine(spec)
    with _engine_errors():
        typer.echo(str(eng.label_of(_address(address), factor)))


@app.command()
def vertex(
    factor: int = typer.Option(..., min=0, help="factor m"),
    index: int = typer.Option(..., min=0, help="forest vertex index i"),
    spec: str = typer.Option("k2-family", help=SPEC_HELP),
) -> None:
    """Print the address carrying forest vertex i of factor m."""
    eng = _engine(spec)
    with _engine_errors():
        typer.echo(eng.vertex_of(factor, index).text)


@app.command()
def verify(
    spec: str = typer.Option("k2-family", help=SPEC_HELP),
    radius: int = typer.Option(2, min=0, help="window radius d"),
    sons: int = typer.Option(3, min=0, help="sons per vertex k"),
    factors: int = typer.Option(4, min=0, help="factors M"),
    pipeline: bool = typer.Option(False, "--pipeline", help="check the two-stage composition"),
    max_depth: int | None = typer.Option(None, help="radius cap (default from config)"),
) -> None:
    """Run the window checks; exit 1 when any fails."""
    from omegafactor.domain import FamilyValidationError, MemoBudgetExceeded, WindowTooLarge
    from omegafactor.engine.pipeline import two_stage_pipeline
    from omegafactor.engine.window import materialize_ball
    from omegafactor.oracle.report import all_ok, reports_json
    from omegafactor.oracle.window import verify_pipeline_window, verify_window

    cfg = state.config
    cap = cfg.engine.max_depth if max_depth is None else max_depth
    bind_scope(command="verify", family=spec, pipeline=pipeline)
    try:
        if pipeline:
            try:
                pipe = two_stage_pipeline(_resolve_spec(spec), memo_budget=cfg.engine.memo_budget)
            except FamilyValidationError as e:
                raise _fail(str(e)) from e
            reports = verify_pipeline_window(
                pipe, radius, sons, factors, max_depth=cap, shrink_failures=cfg.verify.shrink
            )
        else:
            eng = _engine(spec)
            window = materialize_ball(eng, radius, sons, factors, max_depth=cap)
            reports = verify_window(
                window, eng,
                shrink_failures=cfg.verify.shrink,
                demand_prefix=cfg.verify.demand_prefix,
            )
    except (WindowTooLarge, MemoBudgetExceeded) as e:
        raise _fail(str(e)) from e
    typer.echo(reports_json(reports), nl=False)
    raise typer.Exit(0 if all_ok(reports) else 1)


@app.command()
def simulate(
    config: Path = typer.Option(..., "--config", help="simulator config JSON"),
    trace: Path | None = typer.Option(None, help="write the step trace (JSON lines) here"),
    dot: Path | None = typer.Option(None, help="write the factor graphs as DOT here"),
) -> None:
    """Run the finite scheduler and print a summary of the factors it built."""
    from omegafactor.domain import SimConfigError, SimulationInvariantError
    from omegafactor.jsonio import dumps, write_text
    from omegafactor.sim.analysis import build_factors, factors_to_dot, summary
    from omegafactor.sim.model import load_config
    from omegafactor.sim.scheduler import run
    from omegafactor.sim.trace import write_trace

    bind_scope(command="simulate", config=str(config))
    try:
        sim_cfg = load_config(config, max_vertices=state.config.simulator.max_vertices)
    except SimConfigError as e:
        for issue in e.issues:
            err.print(f"[red]config:[/red] {issue}")
        raise typer.Exit(2) from e
    try:
        result = run(sim_cfg)
    except SimulationInvariantError as e:
        raise _fail(f"invariant broken: {e}", 1) from e
    if trace is not None:
        write_trace(result, trace)
    if dot is not None:
        write_text(dot, factors_to_dot(build_factors(result)))
    typer.echo(dumps(summary(result)), nl=False)


@app.command(name="check-trace")
def check_trace(
    trace: Path = typer.Option(..., "--trace", help="trace file written by simulate --trace"),
) -> None:
    """Replay a trace with the independent checker; exit 1 on any mismatch."""
    from omegafactor.domain import TraceFormatError
    from omegafactor.oracle.report import VerificationReport, all_ok, reports_json
    from omegafactor.oracle.trace import verify_trace
    from omegafactor.sim.trace import read_trace

    bind_scope(command="check-trace", trace=str(trace))
    try:
        loaded = read_trace(trace, max_vertices=state.config.simulator.max_vertices)
    except TraceFormatError as e:
        bad = VerificationReport.failed("format", {"trace": str(trace)}, {"reason": str(e)})
        typer.echo(reports_json([bad]), nl=False)
        raise typer.Exit(1) from e
    reports = verify_trace(loaded)
    typer.echo(reports_json(reports), nl=False)
    raise typer.Exit(0 if all_ok(reports) else 1)


if __name__ == "__main__":
    app()
