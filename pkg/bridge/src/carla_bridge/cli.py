"""Command-line entry points: `bridge capture`, `bridge run-scenario`."""

from __future__ import annotations

import json
import logging
import sys

import click

from .backends import BackendConfig, CarlaBackend, SyntheticBackend
from .capture import CaptureSession, capture as run_capture, run_scenario
from .errors import BridgeError
from .scenario import load_script, load_weather

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BRIDGE = 2


def _make_backend(name, session, seed, ambient_actors=True):
    if name == "synthetic":
        return SyntheticBackend(session.config, seed=seed, ambient_actors=ambient_actors)
    return CarlaBackend(session.host, session.port, session.config)


def _backend_option(f):
    return click.option("--backend", "backend_name",
                        type=click.Choice(["carla", "synthetic"]), default="carla",
                        show_default=True,
                        help="Live simulator client or the in-process test backend.")(f)


@click.group()
@click.option("--verbose", is_flag=True)
def main(verbose):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command("capture")
@click.argument("dump_root", type=click.Path())
@click.option("--frames", default=100, show_default=True)
@click.option("--host", default="localhost", show_default=True)
@click.option("--port", default=2000, show_default=True)
@click.option("--weather-file", type=click.Path(exists=True),
              help="Weather manifest JSON to apply.")
@click.option("--seed", default=0, show_default=True)
@_backend_option
def capture_cmd(dump_root, frames, host, port, weather_file, seed, backend_name):
    """Capture synchronized sensor frames into an interchange dump."""
    weather = load_weather(weather_file).to_dict() if weather_file else None
    try:
        session = CaptureSession(dump_root=dump_root, frames_to_capture=frames,
                                 host=host, port=port, weather=weather)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        run_capture(session, backend=_make_backend(backend_name, session, seed))
    except BridgeError as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_BRIDGE)
    click.echo(json.dumps({"dump_root": str(dump_root), "frames": frames}))


@main.command("run-scenario")
@click.argument("script_path", type=click.Path(exists=True))
@click.argument("dump_root", type=click.Path())
@click.option("--host", default="localhost", show_default=True)
@click.option("--port", default=2000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@_backend_option
def run_scenario_cmd(script_path, dump_root, host, port, seed, backend_name):
    """Play a scenario script and capture its full duration."""
    try:
        script = load_script(script_path)
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        click.echo(f"error: bad script: {e}", err=True)
        sys.exit(EXIT_INPUT)
    session = CaptureSession(dump_root=dump_root, host=host, port=port,
                             scenario=script)
    backend = _make_backend(backend_name, session, seed, ambient_actors=False)
    try:
        run_scenario(session, backend=backend)
    except BridgeError as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_BRIDGE)
    click.echo(json.dumps({"dump_root": str(dump_root), "scenario": script.name}))
