"""
cavtool - design and analysis of membrane-loaded fiber Fabry-Perot cavities.

Every subcommand takes ``--config <file> --out <dir> [--seed N]``, writes
JSON reports and CSV tables into the output directory and prints a short
summary. Exit codes: 0 success, 2 config/parse error, 3 numerical
non-convergence (outputs are still written), 4 infeasible physics.
"""

import logging
import sys
from collections.abc import Callable
from pathlib import Path

import click

from cav_common.errors import CavToolError
from cav_persistence import DirectoryResultStore

from .commands import (
    CommandOutcome,
    run_beta_scan,
    run_dispersion,
    run_fit,
    run_report,
    run_stack,
    run_synth,
)
from .config import LOG_LEVELS, CommandConfig, get_log_level, get_threads, setup_logging

logger = logging.getLogger(__name__)

CONFIG_ERROR_EXIT = 2
NON_CONVERGENCE_EXIT = 3


def common_options(func: Callable) -> Callable:
    """--config, --out and --seed, shared by every subcommand."""
    func = click.option("--seed", type=int, default=0, show_default=True, help="Random seed")(func)
    func = click.option(
        "--out", "out_dir", required=True, type=click.Path(file_okay=False), help="Output directory"
    )(func)
    func = click.option(
        "--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Config JSON file"
    )(func)
    return func


def execute(ctx: click.Context, name: str, config_path: str, out_dir: str, seed: int) -> None:
    """Run one command and translate its outcome into output and an exit status."""
    threads = ctx.obj["threads"]
    logger.info(f"Running {name} with {config_path} -> {out_dir} (seed {seed}, {threads} threads)")
    try:
        config = CommandConfig(config_path, threads=threads)
        store = DirectoryResultStore(out_dir)
        outcome: CommandOutcome
        if name == "dispersion":
            outcome = run_dispersion(config, store, seed, threads)
        elif name == "beta-scan":
            outcome = run_beta_scan(config, store, seed, threads)
        else:
            runner = {"stack": run_stack, "fit": run_fit, "report": run_report, "synth": run_synth}[name]
            outcome = runner(config, store, seed)
    except CavToolError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)
    except (KeyError, TypeError, ValueError) as e:
        # Malformed values inside an otherwise readable config.
        click.echo(f"Error: invalid config {config_path}: {e}", err=True)
        sys.exit(CONFIG_ERROR_EXIT)

    for line in outcome.summary:
        click.echo(line)
    for output in outcome.outputs:
        click.echo(f"  wrote {Path(out_dir) / output}")
    if not outcome.converged:
        click.echo("Error: numerical procedure did not converge", err=True)
        sys.exit(NON_CONVERGENCE_EXIT)


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Log level (default: CAVTOOL_LOG_LEVEL or WARNING)",
)
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=None,
    help="Worker threads for sweeps (default: CAVTOOL_THREADS or CPU count)",
)
@click.pass_context
def cli(ctx: click.Context, log_level: str | None, threads: int | None):
    """cavtool - open-cavity design, emitter dynamics and coupling analysis."""
    setup_logging(get_log_level(log_level))
    ctx.ensure_object(dict)
    ctx.obj["threads"] = get_threads(threads)


@cli.command("stack")
@common_options
@click.pass_context
def stack(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Evaluate or design a layer stack: spectrum, field profile, report."""
    execute(ctx, "stack", config_path, out_dir, seed)


@cli.command("dispersion")
@common_options
@click.pass_context
def dispersion(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Cavity-length vs wavelength resonance map with mode branches."""
    execute(ctx, "dispersion", config_path, out_dir, seed)


@cli.command("fit")
@common_options
@click.pass_context
def fit(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Fit g2, saturation, cavity-scan peaks or power-dependent rates."""
    execute(ctx, "fit", config_path, out_dir, seed)


@cli.command("report")
@common_options
@click.pass_context
def report(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Coupling report: beta, Purcell factor, spectral densities, efficiency."""
    execute(ctx, "report", config_path, out_dir, seed)


@cli.command("beta-scan")
@common_options
@click.pass_context
def beta_scan(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Simulated funneling efficiency over membrane thickness and emitter depth."""
    execute(ctx, "beta-scan", config_path, out_dir, seed)


@cli.command("synth")
@common_options
@click.pass_context
def synth(ctx: click.Context, config_path: str, out_dir: str, seed: int):
    """Seeded synthetic g2, saturation and scan datasets."""
    execute(ctx, "synth", config_path, out_dir, seed)


if __name__ == "__main__":
    cli()
