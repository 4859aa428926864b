"""Decision commands: zeno, allzeno, zerotime, live, bounded, nonterm.

Every command prints its verdict token on the first stdout line, followed by
witness lines and a stats panel, or a single JSON verdict with ``--format json``.
"""

import time
from collections.abc import Callable
from pathlib import Path
from typing import Annotated

import typer

from tpnv.boundedness import Unbounded, check_bounded, check_nonterm
from tpnv.config import Settings, get_settings
from tpnv.dot import region_tree_to_dot
from tpnv.errors import ParseError, TpnvError
from tpnv.formats import Answer, Verdict, check_marking, load_bundle, parse_marking, parse_tpn
from tpnv.liveness import TokenRef, can_consume, is_live
from tpnv.multiset import Bag
from tpnv.net import TPN, TimedMarking
from tpnv.regions import MRUC, mruc_member
from tpnv.utils import (
    OutputFormat,
    handle_tpnv_error,
    print_json,
    print_line,
    print_result_panel,
    print_verdict,
    read_text,
    save_to_file,
    spinner,
)
from tpnv.zeno import SymbolicSetBundle, build_allzeno, build_zeno, build_zeno_discrete, build_zerotime

NetArg = Annotated[
    Path,
    typer.Argument(help="Net document", exists=True, dir_okay=False, readable=True),
]
MarkingArg = Annotated[
    Path | None,
    typer.Argument(help="Marking file; the empty marking if omitted", exists=True, dir_okay=False, readable=True),
]
FormatOption = Annotated[
    OutputFormat,
    typer.Option("--format", "-f", help="Output format", case_sensitive=False),
]
BundleOption = Annotated[
    Path | None,
    typer.Option("--bundle", "-b", help="Reuse symbolic sets saved by build-sets", exists=True, dir_okay=False),
]


# ============================================================================
# Loading and reporting
# ============================================================================


def load_inputs(net_path: Path, marking_path: Path | None) -> tuple[TPN, TimedMarking]:
    """Parse a timed net and a marking over its places.

    Raises:
        ParseError: If either document is malformed.
    """
    net = parse_tpn(read_text(net_path))
    m: TimedMarking = Bag() if marking_path is None else parse_marking(read_text(marking_path))
    check_marking(net, m)
    return net, m


def require_integer_ages(m: TimedMarking) -> None:
    """Reject markings that a discrete-time run cannot start from.

    Raises:
        ParseError: If some token age is not an integer.
    """
    if any(age.denominator != 1 for _, age in m):
        raise ParseError(0, "discrete time needs integer token ages")


def report(verdict: Verdict, output_format: OutputFormat) -> None:
    if output_format == OutputFormat.JSON:
        print_json(verdict)
        return
    print_verdict(verdict.answer, positive=verdict.answer in ("YES", "BOUNDED"))
    for line in verdict.witness:
        print_line(line)
    if verdict.stats:
        print_result_panel(f"{verdict.command} on {verdict.net}", verdict.stats)


def _yes_no(value: bool) -> Answer:
    return "YES" if value else "NO"


def _symbolic_decision(
    command: str,
    net_path: Path,
    marking_path: Path | None,
    build: Callable[[TPN, Settings], MRUC],
    pick: Callable[[SymbolicSetBundle], MRUC],
    bundle_path: Path | None,
    output_format: OutputFormat,
    check: Callable[[TimedMarking], None] | None = None,
) -> None:
    try:
        net, m = load_inputs(net_path, marking_path)
        if check is not None:
            check(m)
        started = time.perf_counter()
        with spinner(f"Computing the {command} set of {net.name}..."):
            if bundle_path is not None:
                symbolic = pick(load_bundle(bundle_path, net))
            else:
                symbolic = build(net, get_settings())
        answer = mruc_member(m, symbolic)
    except TpnvError as e:
        handle_tpnv_error(e)
    report(
        Verdict(
            command=command,
            net=net.name,
            answer=_yes_no(answer),
            stats={
                "max constant": net.max_constant,
                "minimal regions": len(symbolic),
                "seconds": round(time.perf_counter() - started, 3),
            },
        ),
        output_format,
    )


# ============================================================================
# Commands
# ============================================================================


def zeno_command(
    net: NetArg,
    marking: MarkingArg = None,
    discrete_time: Annotated[
        bool,
        typer.Option("--discrete-time", help="Use integer delays and integer ages"),
    ] = False,
    bundle: BundleOption = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether the marking has a zeno run.

    A zeno run fires infinitely many transitions within finite total time.

    Examples:
        tpnv zeno nets/nasty.tpn nets/nasty-m0.mrk
        tpnv zeno nets/loop.tpn nets/loop.mrk --discrete-time
    """
    if discrete_time:
        _symbolic_decision(
            "zeno",
            net,
            marking,
            build_zeno_discrete,
            lambda b: b.zeno_discrete,
            bundle,
            output_format,
            check=require_integer_ages,
        )
        return
    _symbolic_decision("zeno", net, marking, build_zeno, lambda b: b.zeno, bundle, output_format)


def allzeno_command(
    net: NetArg,
    marking: MarkingArg = None,
    bundle: BundleOption = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether every continuation of the marking can still be made zeno."""
    _symbolic_decision("allzeno", net, marking, build_allzeno, lambda b: b.allzeno, bundle, output_format)


def zerotime_command(
    net: NetArg,
    marking: MarkingArg = None,
    bundle: BundleOption = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether the marking has an infinite run in which no time passes."""
    _symbolic_decision("zerotime", net, marking, build_zerotime, lambda b: b.zerotime, bundle, output_format)


def live_command(
    net: NetArg,
    marking: MarkingArg = None,
    token: Annotated[
        str,
        typer.Option("--token", "-t", help="Token as <place>@<age>, e.g. p@1/2"),
    ] = "",
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether some run lets a transition consume the given token.

    Examples:
        tpnv live nets/small.tpn nets/small-m0.mrk --token R@4.3
    """
    if not token:
        raise typer.BadParameter("--token is required", param_hint="--token")
    try:
        tok = TokenRef.parse(token)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--token") from None
    try:
        tpn, m = load_inputs(net, marking)
        with spinner(f"Exploring consumers of {tok.place}..."):
            now = can_consume(tpn, m, tok)
            live = now or is_live(tpn, m, tok)
    except TpnvError as e:
        handle_tpnv_error(e)
    report(
        Verdict(
            command="live",
            net=tpn.name,
            answer=_yes_no(live),
            stats={"token": f"{tok.place}@{tok.age}", "consumable now": str(now).lower()},
        ),
        output_format,
    )


def bounded_command(
    net: NetArg,
    marking: MarkingArg = None,
    dot: Annotated[
        Path | None,
        typer.Option("--dot", help="Write the region tree as DOT", dir_okay=False),
    ] = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether reachable markings have a bounded number of tokens.

    Prints UNBOUNDED with the branch on which a region strictly covers an
    ancestor, or BOUNDED with the largest marking size.
    """
    try:
        tpn, m = load_inputs(net, marking)
        with spinner(f"Growing the region tree of {tpn.name}..."):
            result = check_bounded(tpn, m)
    except TpnvError as e:
        handle_tpnv_error(e)
    if isinstance(result, Unbounded):
        verdict = Verdict(
            command="bounded",
            net=tpn.name,
            answer="UNBOUNDED",
            witness=[
                "path: " + " ".join(result.path),
                "pump: " + " ".join(result.pump),
                "covered: " + result.tree.nodes[result.ancestor].region.to_text(),
                "witness: " + result.tree.nodes[result.witness].region.to_text(),
            ],
            stats={"tree nodes": len(result.tree)},
        )
    else:
        verdict = Verdict(
            command="bounded",
            net=tpn.name,
            answer="BOUNDED",
            stats={"tree nodes": len(result.tree), "max size": result.max_size},
        )
    report(verdict, output_format)
    if dot is not None:
        save_to_file(region_tree_to_dot(result.tree, tpn.name), dot)


def nonterm_command(
    net: NetArg,
    marking: MarkingArg = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Decide whether the marking has a run firing infinitely many transitions."""
    try:
        tpn, m = load_inputs(net, marking)
        with spinner(f"Searching discrete cycles of {tpn.name}..."):
            answer = check_nonterm(tpn, m)
    except TpnvError as e:
        handle_tpnv_error(e)
    report(Verdict(command="nonterm", net=tpn.name, answer=_yes_no(answer)), output_format)
