"""Console output, exit codes and file helpers shared by the commands.

Verdicts, tables and JSON go to stdout through ``console``; progress, notices
and error panels go to stderr through ``error_console`` so that stdout stays
parseable.
"""

import json
from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, NoReturn

import typer
from pydantic import BaseModel
from rich.console import Console
from rich.panel import Panel
from rich.syntax import Syntax
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

from tpnv.errors import LimitExceeded, ParseError, SolverUnknown, TpnvError

TPNV_THEME = Theme(
    {
        "info": "cyan",
        "success": "green",
        "warning": "yellow",
        "error": "red bold",
        "muted": "dim",
        "header": "bold cyan",
        "key": "blue",
        "verdict.positive": "bold green",
        "verdict.negative": "bold yellow",
    }
)

console = Console(theme=TPNV_THEME)
error_console = Console(stderr=True, theme=TPNV_THEME)

EXIT_FAILURE = 1
EXIT_PARSE = 3
EXIT_LIMIT = 4


class OutputFormat(str, Enum):
    """Output format options."""

    TEXT = "text"
    JSON = "json"


# ============================================================================
# Styled Output Functions
# ============================================================================


def print_success(message: str, details: str | None = None) -> None:
    """Report a finished side effect on stderr.

    Args:
        message: What was done.
        details: Optional second, dimmed line.
    """
    line = Text.assemble(("✓ ", "success"), message)
    if details:
        line.append(f"\n  {details}", style="muted")
    error_console.print(line)


def print_error(title: str, message: str, details: str | None = None) -> None:
    """Show an error panel on stderr.

    Args:
        title: Panel title, e.g. "Parse error".
        message: The error message.
        details: Optional hint below the message.
    """
    body = Text(message)
    if details:
        body.append("\n" + details, style="muted")
    error_console.print(Panel(body, title=Text(f"✗ {title}", style="error"), border_style="red", expand=False))


def print_line(line: str, style: str | None = None) -> None:
    """Print one result line to stdout, without markup or wrapping."""
    console.print(Text(line, style=style or ""), soft_wrap=True, highlight=False)


def print_verdict(answer: str, positive: bool) -> None:
    print_line(answer, style="verdict.positive" if positive else "verdict.negative")


def print_result_panel(title: str, data: Mapping[str, Any]) -> None:
    """Print statistics as ``key: value`` lines inside a panel.

    Args:
        title: Panel title.
        data: Values to show, in order.
    """
    body = Text("\n").join(Text.assemble((f"{key}: ", "key"), str(value)) for key, value in data.items())
    console.print(Panel(body, title=Text(title, style="success"), border_style="green", expand=False))


# ============================================================================
# Table Output
# ============================================================================


def print_table(rows: Sequence[Mapping[str, Any]], columns: Sequence[str], title: str | None = None) -> None:
    """Print rows as a table; cell values are shown verbatim.

    Args:
        rows: One mapping per row.
        columns: Keys to show; headers are the keys in title case.
        title: Optional table title.
    """
    table = Table(title=title, header_style="header", border_style="muted")
    for column in columns:
        table.add_column(column.title(), overflow="fold")
    for row in rows:
        table.add_row(*(Text(str(row.get(column, ""))) for column in columns))
    console.print(table)


# ============================================================================
# JSON Output
# ============================================================================


def print_json(data: BaseModel | Mapping[str, Any]) -> None:
    """Print a pydantic document or plain mapping as JSON.

    Output is syntax highlighted on a terminal and plain when piped.
    """
    if isinstance(data, BaseModel):
        payload = data.model_dump(mode="json", by_alias=True)
    else:
        payload = dict(data)
    text = json.dumps(payload, indent=2)
    if not console.is_terminal:
        console.out(text, highlight=False)
        return
    console.print(Syntax(text, "json", theme="monokai", word_wrap=True))


# ============================================================================
# Progress Indicators
# ============================================================================


@contextmanager
def spinner(message: str) -> Iterator[None]:
    """Show a spinner on stderr while executing a block.

    Example:
        with spinner("Building zeno set..."):
            zeno = build_zeno(net)
    """
    with error_console.status(Text(message, style="info"), spinner="dots"):
        yield


# ============================================================================
# Errors and files
# ============================================================================


def handle_tpnv_error(e: TpnvError, title: str = "Analysis failed") -> NoReturn:
    """Display a library error and exit with its status code.

    Parse errors exit with 3, exceeded limits and solver give-ups with 4,
    everything else with 1.

    Raises:
        typer.Exit: Always.
    """
    match e:
        case ParseError():
            print_error("Parse error", e.message)
            code = EXIT_PARSE
        case LimitExceeded():
            print_error("Limit exceeded", e.message, details=f"raise TPNV_{e.limit.upper()} to go further")
            code = EXIT_LIMIT
        case SolverUnknown():
            print_error("Solver gave up", e.message, details="raise TPNV_SOLVER_TIMEOUT_MS to retry")
            code = EXIT_LIMIT
        case _:
            print_error(title, e.message, details=type(e).__name__)
            code = EXIT_FAILURE
    raise typer.Exit(code) from None


def read_text(path: Path) -> str:
    """Read a UTF-8 document.

    Raises:
        ParseError: If the file is not valid UTF-8.
    """
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(0, f"{path} is not UTF-8: {e.reason}") from None


def save_to_file(content: str, path: Path) -> None:
    path.write_text(content, encoding="utf-8")
    print_success(f"Saved to {path}")
