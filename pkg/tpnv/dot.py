"""DOT export for nets, coverability graphs and region trees."""

from __future__ import annotations

import graphviz

from tpnv.boundedness import NodeStatus, RegionTree
from tpnv.net import TPN
from tpnv.omega import CoverGraph
from tpnv.sdtn import SDTN, TRANSFER

_STATUS_STYLE: dict[NodeStatus, dict[str, str]] = {
    NodeStatus.INTERIOR: {"shape": "box"},
    NodeStatus.UNSUCCESSFUL: {"shape": "box", "style": "filled", "fillcolor": "lightgrey"},
    NodeStatus.DUPLICATE: {"shape": "box", "style": "dashed"},
    NodeStatus.WITNESS: {"shape": "box", "style": "filled", "fillcolor": "salmon"},
    NodeStatus.OPEN: {"shape": "box", "style": "dotted"},
}


def _place_id(place: str) -> str:
    return f"p:{place}"


def _transition_id(transition: str) -> str:
    return f"t:{transition}"


def tpn_to_dot(net: TPN) -> str:
    """Places as circles, transitions as boxes, arcs labeled with their intervals."""
    dot = graphviz.Digraph(net.name, encoding="utf-8")
    dot.attr(rankdir="LR")
    for p in net.places:
        dot.node(_place_id(p), p, shape="circle")
    for t in net.transitions:
        dot.node(_transition_id(t), t, shape="box")
    for arc in net.input_arcs:
        dot.edge(_place_id(arc.place), _transition_id(arc.transition), label=str(arc.interval))
    for arc in net.output_arcs:
        dot.edge(_transition_id(arc.transition), _place_id(arc.place), label=str(arc.interval))
    return dot.source


def sdtn_to_dot(net: SDTN) -> str:
    """An SD-TN; transfer moves are dashed, ignored places greyed."""
    dot = graphviz.Digraph(net.name, encoding="utf-8")
    dot.attr(rankdir="LR")
    for p in net.places:
        extra = {"style": "filled", "fillcolor": "lightgrey"} if p in net.ignored else {}
        dot.node(_place_id(p), p, shape="circle", **extra)
    for t in net.transitions:
        dot.node(_transition_id(t.name), t.name, shape="box")
        for p in sorted(t.inputs):
            dot.edge(_place_id(p), _transition_id(t.name))
        for p in sorted(t.outputs):
            dot.edge(_transition_id(t.name), _place_id(p))
    if net.transfer is not None:
        dot.node(_transition_id(TRANSFER), TRANSFER, shape="box", style="bold")
        for p in sorted(net.transfer.inputs):
            dot.edge(_place_id(p), _transition_id(TRANSFER))
        for p in sorted(net.transfer.outputs):
            dot.edge(_transition_id(TRANSFER), _place_id(p))
        for src, tgt in net.transfer.moves:
            dot.edge(_place_id(src), _place_id(tgt), style="dashed")
    return dot.source


def cover_graph_to_dot(graph: CoverGraph, name: str = "cover") -> str:
    """Node labels print omega as ``w``; transfer edges are dashed."""
    dot = graphviz.Digraph(name, encoding="utf-8")
    for i, label in enumerate(graph.nodes):
        dot.node(str(i), str(label), shape="box", peripheries="2" if i == 0 else "1")
    for edge in graph.edges:
        style = "dashed" if edge.label == TRANSFER else "solid"
        dot.edge(str(edge.source), str(edge.target), label=edge.label, style=style)
    return dot.source


def region_tree_to_dot(tree: RegionTree, name: str = "regions") -> str:
    """Region tree with node status as style; duplicates and witnesses point back at their ancestor."""
    dot = graphviz.Digraph(name, encoding="utf-8")
    for node in tree.nodes:
        dot.node(str(node.id), node.region.to_text(), **_STATUS_STYLE[node.status])
        if node.parent is not None:
            dot.edge(str(node.parent), str(node.id), label=node.label or "")
        if node.ancestor is not None:
            dot.edge(str(node.id), str(node.ancestor), style="dotted", constraint="false")
    return dot.source
