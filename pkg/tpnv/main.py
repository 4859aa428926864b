"""Main CLI application."""

from pathlib import Path
from typing import Annotated

import typer
import z3

from tpnv import analysis, tools
from tpnv.config import get_settings, load_settings
from tpnv.log import configure_logging, verbosity_level
from tpnv.utils import console

app = typer.Typer(
    name="tpnv",
    help="Timed Petri net verifier - zenoness, liveness, boundedness and non-termination.",
    rich_markup_mode="rich",
    no_args_is_help=False,
)

# Decisions
app.command("zeno")(analysis.zeno_command)
app.command("allzeno")(analysis.allzeno_command)
app.command("zerotime")(analysis.zerotime_command)
app.command("live")(analysis.live_command)
app.command("bounded")(analysis.bounded_command)
app.command("nonterm")(analysis.nonterm_command)

# Tools
app.command("translate")(tools.translate_command)
app.command("covergraph")(tools.covergraph_command)
app.command("simulate")(tools.simulate_command)
app.command("build-sets")(tools.build_sets_command)


def version_callback(value: bool) -> None:
    """Show version and exit."""
    if value:
        from tpnv import __version__

        console.print(f"tpnv {__version__} (z3 {z3.get_version_string()})")
        raise typer.Exit()


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    version: Annotated[
        bool | None,
        typer.Option(
            "--version",
            "-v",
            help="Show version and exit",
            callback=version_callback,
            is_eager=True,
        ),
    ] = None,
    verbose: Annotated[
        int,
        typer.Option("--verbose", "-V", count=True, help="Log progress to stderr (-VV for debug)"),
    ] = 0,
    env_file: Annotated[
        Path | None,
        typer.Option("--env-file", help="Read TPNV_* settings from this file", exists=True, dir_okay=False),
    ] = None,
) -> None:
    """Timed Petri net verifier.

    Nets are plain text documents; markings list one token per line:

        net loop
        place p
        trans t
        in t p [0,0]
        out t p [0,0]

        token p 0

    Resource limits come from TPNV_* environment variables, e.g.

        export TPNV_MAX_REGIONS=500000
    """
    settings = load_settings(env_file) if env_file is not None else get_settings()
    configure_logging(verbosity_level(verbose, settings.log_level))
    if ctx.invoked_subcommand is None and not version:
        console.print(ctx.get_help())
        raise typer.Exit()


if __name__ == "__main__":
    app()
