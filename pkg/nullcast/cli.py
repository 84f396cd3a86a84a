"""
Command-line entry point.

    nullcast <experiment> --config <path> [--seed S] [--trials T] [--out path.csv]
    nullcast --list

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure.
"""

import logging
import sys
from typing import Optional

import click

from .config import get_settings
from .errors import ConfigInvalid, HarnessIOError, NullcastError
from .experiments import CATALOGUE
from .harness import load_config, run_experiment

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_IO = 3


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("experiment", required=False)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Flat YAML config file.")
@click.option("--seed", type=int, help="Master seed (overrides the config).")
@click.option("--trials", type=int, help="Monte Carlo trials (overrides the config).")
@click.option("--out", "out", type=click.Path(dir_okay=False), help="Aggregate CSV path; stdout when omitted.")
@click.option("--raw", is_flag=True, help="Also write per-trial rows next to --out.")
@click.option("--threads", type=int, help="Worker threads (default NULLCAST_THREADS).")
@click.option("--list", "list_only", is_flag=True, help="List experiments and exit.")
def main(experiment: Optional[str], config_path: Optional[str], seed: Optional[int], trials: Optional[int],
         out: Optional[str], raw: bool, threads: Optional[int], list_only: bool) -> None:
    """Run one experiment and emit its aggregate CSV."""
    if list_only:
        for name, entry in CATALOGUE.items():
            click.echo(f"{name.value:<14} {entry.description}")
        return

    try:
        settings = get_settings()
        _configure_logging(settings.log_level)
        if threads is not None and threads < 1:
            raise ConfigInvalid(f"--threads must be >= 1, got {threads}")
        cfg = load_config(
            config_path,
            experiment=experiment,
            seed=seed,
            trials=trials,
            output_path=out,
            raw=raw or None,
        )
        result = run_experiment(cfg, threads=threads or settings.threads)
    except ConfigInvalid as e:
        _fail(str(e), EXIT_CONFIG)
    except HarnessIOError as e:
        _fail(str(e), EXIT_IO)
    except NullcastError as e:
        _fail(f"{e.code}: {e}", 1)

    if result.output_path is None:
        click.echo(result.to_csv(), nl=False)
    else:
        logger.info(f"Wrote {result.output_path}")
