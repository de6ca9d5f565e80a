"""Command-line client for the simulator service layer.

Scenario arguments name either a JSON file or a built-in preset as
`preset:NAME`. The batch subcommands execute the same functions the HTTP
endpoints delegate to, in process; `serve` starts the HTTP/websocket
service for live viewing. Set TELEVIZ_LOG to control verbosity.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path

import click

from . import __version__
from .engine import Engine
from .harness import (
    compare_modes,
    format_compare,
    format_summary,
    run_scenario,
    sweep_filter,
    write_sweep_csv,
)
from .scenario import (
    ConfigError,
    ScenarioConfig,
    dumps_scenario,
    load_scenario,
    preset,
    preset_names,
)
from .world import capture_pointcloud, write_pointcloud_ascii


def _setup_logging() -> None:
    level = os.environ.get("TELEVIZ_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load(scenario_arg: str) -> ScenarioConfig:
    try:
        if scenario_arg.startswith("preset:"):
            return preset(scenario_arg.split(":", 1)[1])
        return load_scenario(scenario_arg)
    except FileNotFoundError:
        raise click.ClickException(f"scenario file not found: {scenario_arg}")
    except ConfigError as exc:
        raise click.ClickException(str(exc))


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Deterministic televisualization simulator."""
    _setup_logging()


@main.command()
@click.argument("scenario")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for metrics.csv and summary.txt.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
def run(scenario: str, out, seed) -> None:
    """Run SCENARIO and print its summary."""
    config = _load(scenario)
    _, summary = run_scenario(config, out_dir=out, seed=seed)
    click.echo(format_summary(summary), nl=False)
    if out:
        click.echo(f"metrics written to {Path(out) / 'metrics.csv'}")


@main.command()
@click.argument("scenario")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
def compare(scenario: str, seed) -> None:
    """Run SCENARIO under all three viewing modes and tabulate coverage."""
    config = _load(scenario)
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    click.echo(format_compare(compare_modes(config)), nl=False)


@main.command("sweep-filter")
@click.argument("scenario")
@click.option("--rates", default="1.0,0.5,0.2,0.1,0.05",
              help="Comma-separated smoothing rates to measure.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write rate,lag_ms rows to this CSV file.")
def sweep_filter_cmd(scenario: str, rates: str, out) -> None:
    """Measure smoothing lag across filter rates on SCENARIO's head script."""
    config = _load(scenario)
    try:
        values = [float(r) for r in rates.split(",") if r.strip()]
    except ValueError:
        raise click.ClickException(f"bad --rates list: {rates!r}")
    entries = sweep_filter(config, values)
    click.echo("rate,lag_ms")
    for e in entries:
        click.echo(f"{e.rate:g},{e.lag_ms:.6g}")
    if out:
        write_sweep_csv(entries, out)


@main.command()
@click.argument("scenario")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(scenario: str, port: int, host: str) -> None:
    """Serve SCENARIO live: snapshot websocket plus the REST endpoints."""
    import uvicorn

    from .service import create_app

    config = _load(scenario)
    uvicorn.run(create_app(config), host=host, port=port, log_level="info")


@main.command()
@click.argument("name", required=False)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Write the preset scenario JSON to this file.")
def presets(name, out) -> None:
    """List presets, or print/write one as a scenario file."""
    if name is None:
        for n in preset_names():
            click.echo(n)
        return
    try:
        text = dumps_scenario(preset(name))
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("scenario")
@click.option("--at", "at_s", type=float, required=True,
              help="Simulated time at which to export the camera frame.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), required=True)
def cloud(scenario: str, at_s: float, out) -> None:
    """Export the camera's point-cloud frame at a simulated time as x y z r g b text."""
    config = _load(scenario)
    engine = Engine(config)
    ticks = int(round(at_s * config.tick_rate_hz))
    for _ in range(max(1, ticks)):
        engine.tick()
    frame = engine.latest_frame
    if len(frame) == 0:
        frame = capture_pointcloud(engine.scene, engine.camera, frame.capture_pose)
    write_pointcloud_ascii(frame, out)
    click.echo(f"wrote {len(frame)} points to {out}")


if __name__ == "__main__":
    main()
