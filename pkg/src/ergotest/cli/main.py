"""CLI entry point for ergotest."""
from __future__ import annotations

import logging
import sys
from typing import Optional, Tuple

import click

from ergotest import __version__, bootstrap
from ergotest.core.errors import ConfigError
from ergotest.maps import available_systems, system_class
from ergotest.observables import available_phi, get_phi
from ergotest.plan import load_config, run as run_config

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


class CliState:
    """Holds global CLI state."""

    def __init__(self, verbose: bool) -> None:
        self.verbose = verbose


def _print_version(_: click.Context, __: click.Parameter, value: bool) -> None:
    if not value or click.get_current_context().resilient_parsing:
        return
    click.echo(f"ergotest {__version__}")
    raise click.exceptions.Exit()


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option("--verbose", is_flag=True, help="Enable verbose logging output.")
@click.option(
    "--version",
    is_flag=True,
    callback=_print_version,
    expose_value=False,
    is_eager=True,
    help="Show the ergotest version and exit.",
)
@click.pass_context
def cli(ctx: click.Context, verbose: bool) -> None:
    """Numerical checks of variance bounds for chaotic dynamical systems."""

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    bootstrap()
    ctx.obj = CliState(verbose=verbose)


_config_option = click.option(
    "--config",
    "config_path",
    type=click.Path(),
    required=True,
    help="YAML or JSON run configuration.",
)
_set_option = click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override a configuration key (dotted keys reach nested mappings).",
)


@cli.command()
@_config_option
@_set_option
@click.option("--workers", type=int, help="Cap on parallel sampling threads (≥ 1).")
@click.option("--no-color", is_flag=True, help="Disable ANSI colors in terminal output.")
@click.pass_obj
def run(
    state: CliState,
    config_path: str,
    overrides: Tuple[str, ...],
    workers: Optional[int],
    no_color: bool,
) -> None:
    """Validate a configuration, run its command and write the artifacts."""

    assignments = list(overrides)
    if workers is not None:
        assignments.append(f"workers={workers}")
    try:
        config = load_config(config_path, assignments)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    raise click.exceptions.Exit(run_config(config, use_color=not no_color))


@cli.command()
@_config_option
@_set_option
def validate(config_path: str, overrides: Tuple[str, ...]) -> None:
    """Check a configuration without running it."""

    try:
        config = load_config(config_path, overrides)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"{config_path}: valid {config.command} configuration for '{config.system}'")


@cli.command()
def catalog() -> None:
    """List the available systems and phi functions."""

    click.echo("systems:")
    for name in available_systems():
        cls = system_class(name)
        params = ", ".join(f"{k}={v:g}" for k, v in cls.defaults.items()) or "-"
        click.echo(f"  {name:<10} {cls.description}  [{params}]")
    click.echo("phi:")
    for name in available_phi():
        phi = get_phi(name)
        lo, hi = phi.support
        click.echo(
            f"  {name:<14} eta={phi.eta:g} holder={phi.holder:.6g} sup={phi.sup_norm:g} support=[{lo:g}, {hi:g}]"
        )


def main(argv: Optional[list[str]] = None) -> int:
    """Program entry point for console_scripts shim."""

    argv = argv if argv is not None else sys.argv[1:]
    try:
        result = cli.main(args=argv, prog_name="ergotest", standalone_mode=False)
    except click.UsageError as err:
        # Exit 2 is reserved for computational failures.
        err.show()
        return 1
    except click.ClickException as err:
        err.show()
        return err.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
