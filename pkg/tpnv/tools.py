"""Auxiliary commands: translate, covergraph, simulate, build-sets."""

import random
from pathlib import Path
from typing import Annotated

import typer

from tpnv.analysis import FormatOption, MarkingArg, NetArg, load_inputs
from tpnv.config import get_settings
from tpnv.dot import cover_graph_to_dot, sdtn_to_dot
from tpnv.errors import TpnvError
from tpnv.formats import bundle_document, parse_counts, parse_net, save_bundle, serialize_net
from tpnv.net import Discrete, Elapse, Step, TimedMarking, simulate
from tpnv.omega import OmegaMarking, at_markings, cover_graph_sdtn, pred_inf_sdtn
from tpnv.sdtn import SDTN, TranslationMode, translate
from tpnv.utils import (
    OutputFormat,
    handle_tpnv_error,
    print_json,
    print_line,
    print_result_panel,
    print_success,
    print_table,
    read_text,
    save_to_file,
    spinner,
)
from tpnv.zeno import build_bundle, int_marking


def _format_marking(m: TimedMarking) -> str:
    return "[" + ", ".join(f"({p},{age})" for p, age in m) + "]"


def _format_step(step: Step) -> str:
    if isinstance(step, Elapse):
        return f"elapse {step.amount}"
    assert isinstance(step, Discrete)
    consumed = " ".join(f"{p}@{a}" for p, a in step.binding.consumed)
    produced = " ".join(f"{p}@{a}" for p, a in step.binding.produced)
    return f"{step.transition} [{consumed}] -> [{produced}]"


def translate_command(
    net: NetArg,
    mode: Annotated[
        TranslationMode,
        typer.Option("--mode", "-m", help="dense keeps the control places and transfer", case_sensitive=False),
    ] = TranslationMode.DENSE,
    integer_ages: Annotated[
        bool,
        typer.Option("--integer-ages", help="Only integer and beyond-max age symbols"),
    ] = False,
    output: Annotated[
        Path | None,
        typer.Option("--output", "-o", help="Write the SD-TN document here instead of stdout", dir_okay=False),
    ] = None,
    dot: Annotated[
        Path | None,
        typer.Option("--dot", help="Also write the SD-TN as DOT", dir_okay=False),
    ] = None,
) -> None:
    """Translate a timed net into its SD-TN.

    Examples:
        tpnv translate nets/sdtrans.tpn --mode discrete
        tpnv translate nets/nasty.tpn -o nasty.sdtn --dot nasty.dot
    """
    try:
        tpn, _ = load_inputs(net, None)
        sdtn, tm = translate(tpn, mode, integer_ages=integer_ages)
    except TpnvError as e:
        handle_tpnv_error(e)
    document = serialize_net(sdtn)
    if output is None:
        typer.echo(document, nl=False)
    else:
        save_to_file(document, output)
    if dot is not None:
        save_to_file(sdtn_to_dot(sdtn), dot)
    print_success(
        f"{len(sdtn.places)} places, {len(sdtn.transitions)} transitions",
        details=f"max constant {tm.max}, transfer {'present' if sdtn.transfer else 'absent'}",
    )


def covergraph_command(
    net: NetArg,
    marking: MarkingArg = None,
    dot: Annotated[
        Path | None,
        typer.Option("--dot", help="Write the coverability graph as DOT", dir_okay=False),
    ] = None,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Build the coverability graph of an SD-TN.

    A timed net is first translated in dense mode and its marking encoded with
    every fractional age just above its integer part. For an SD-TN document the
    marking file lists ``count <place> <n|w>`` lines.
    """
    try:
        document = parse_net(read_text(net))
        if isinstance(document.net, SDTN):
            sdtn = document.net
            text = "" if marking is None else read_text(marking)
            start = parse_counts(text, sdtn)
        else:
            tpn, m = load_inputs(net, marking)
            sdtn, tm = translate(tpn, TranslationMode.DENSE)
            start = OmegaMarking.finite(int_marking(m, sdtn, tm))
        with spinner(f"Accelerating {sdtn.name}..."):
            graph = cover_graph_sdtn(sdtn, start)
            infinite = pred_inf_sdtn(sdtn, start)
    except TpnvError as e:
        handle_tpnv_error(e)
    accelerated = sorted(str(u) for u in at_markings(graph))
    if output_format == OutputFormat.JSON:
        print_json(
            {
                "net": sdtn.name,
                "places": list(graph.places),
                "nodes": [str(n) for n in graph.nodes],
                "edges": [[e.source, e.label, e.target] for e in graph.edges],
                "at_markings": accelerated,
                "infinite_run": infinite,
            }
        )
    else:
        print_line(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges")
        rows = [
            {"id": i, "label": str(label), "parent": "-" if graph.parents[i] is None else graph.parents[i]}
            for i, label in enumerate(graph.nodes)
        ]
        print_table(rows, ["id", "label", "parent"], title=f"Coverability graph of {sdtn.name}")
        print_result_panel(
            "Summary",
            {
                "places": " ".join(graph.places),
                "after transfer": " ".join(accelerated) or "-",
                "infinite run": "yes" if infinite else "no",
            },
        )
    if dot is not None:
        save_to_file(cover_graph_to_dot(graph, sdtn.name), dot)


def simulate_command(
    net: NetArg,
    marking: MarkingArg = None,
    steps: Annotated[
        int,
        typer.Option("--steps", "-n", help="Maximum number of steps", min=0),
    ] = 20,
    seed: Annotated[
        int,
        typer.Option("--seed", "-s", help="Random seed; equal seeds give equal runs"),
    ] = 0,
    output_format: FormatOption = OutputFormat.TEXT,
) -> None:
    """Draw a random run from the marking."""
    try:
        tpn, m = load_inputs(net, marking)
        run = simulate(tpn, m, steps, random.Random(seed))
        markings = list(run.markings(tpn))
    except TpnvError as e:
        handle_tpnv_error(e)
    rows = [
        {"step": i, "move": _format_step(step), "marking": _format_marking(after)}
        for i, (step, after) in enumerate(zip(run.steps, markings[1:], strict=True), start=1)
    ]
    if output_format == OutputFormat.JSON:
        print_json({"net": tpn.name, "seed": seed, "start": _format_marking(m), "steps": rows})
        return
    print_line(_format_marking(markings[-1]))
    print_table(rows, ["step", "move", "marking"], title=f"Run of {tpn.name} (seed {seed})")


def build_sets_command(
    net: NetArg,
    output: Annotated[
        Path,
        typer.Option("--output", "-o", help="Bundle file to write", dir_okay=False),
    ],
    jobs: Annotated[
        int | None,
        typer.Option("--jobs", "-j", help="Worker threads (default TPNV_JOBS)", min=1),
    ] = None,
) -> None:
    """Compute and save every symbolic set of a net.

    The bundle can be passed to zeno, allzeno and zerotime with --bundle.
    """
    settings = get_settings()
    if jobs is not None:
        settings = settings.model_copy(update={"jobs": jobs})
    try:
        tpn, _ = load_inputs(net, None)
        with spinner(f"Building symbolic sets of {tpn.name} with {settings.jobs} job(s)..."):
            bundle = build_bundle(tpn, settings)
        save_bundle(bundle, output)
    except TpnvError as e:
        handle_tpnv_error(e)
    print_success(f"Saved bundle to {output}")
    print_result_panel(
        f"Symbolic sets of {tpn.name}",
        {name: f"{len(regions)} minimal regions" for name, regions in bundle_document(bundle).sets.items()},
    )
