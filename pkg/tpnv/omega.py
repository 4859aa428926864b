"""Omega-coverability analysis of Petri nets and SD-TNs.

Karp-Miller graphs over omega-markings, strongly connected component automata,
the nonnegative-cycle test (an integer feasibility problem solved with z3),
the infinite-run predicate and the Valk-Jantzen search for the minimal
elements of an upward-closed set given by a monotone predicate.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import z3

from tpnv.config import Settings, get_settings
from tpnv.errors import IsTransfer, LimitExceeded, NonMonotonePredicate, ShapeMismatch, SolverUnknown
from tpnv.sdtn import (
    CONTROL_PLACES,
    P_DISC,
    SDTN,
    TRANSFER,
    SDTNMarking,
    Vector,
    fire_vector,
    is_enabled_vector,
    transfer_vector,
)

logger = logging.getLogger(__name__)

OMEGA = math.inf


# ============================================================================
# Omega markings and effects
# ============================================================================


@dataclass(frozen=True, slots=True)
class OmegaMarking:
    """A vector over the naturals extended with omega (``math.inf``)."""

    counts: Vector

    @classmethod
    def of(cls, values: Iterable[int | float | str]) -> OmegaMarking:
        """Build from numbers, with ``"w"`` accepted for omega."""
        return cls(tuple(OMEGA if v in ("w", "ω") else v for v in values))  # type: ignore[misc]

    @classmethod
    def finite(cls, marking: SDTNMarking) -> OmegaMarking:
        return cls(marking.counts)

    def __le__(self, other: OmegaMarking) -> bool:
        return all(a <= b for a, b in zip(self.counts, other.counts, strict=True))

    def __lt__(self, other: OmegaMarking) -> bool:
        return self <= other and self != other

    @property
    def is_finite(self) -> bool:
        return all(v != OMEGA for v in self.counts)

    def __str__(self) -> str:
        return "(" + ",".join("w" if v == OMEGA else str(int(v)) for v in self.counts) + ")"


@dataclass(frozen=True, slots=True)
class EffectVector:
    """Per-place displacement of an ordinary transition."""

    delta: tuple[int, ...]


def effect_vector(net: SDTN, transition: str) -> EffectVector:
    """The displacement ``M2 - M1`` caused by firing an ordinary transition.

    Raises:
        IsTransfer: If asked for the transfer, whose effect depends on the marking.
    """
    if transition == TRANSFER:
        raise IsTransfer("the transfer has no fixed effect vector")
    t = net.transition(transition)
    return EffectVector(tuple(int(p in t.outputs) - int(p in t.inputs) for p in net.places))


def _petri_part_effect(net: SDTN) -> tuple[int, ...]:
    tr = net.transfer
    assert tr is not None
    return tuple(int(p in tr.outputs) - int(p in tr.inputs) for p in net.places)


# ============================================================================
# Coverability graphs
# ============================================================================


@dataclass(frozen=True, slots=True)
class CoverEdge:
    source: int
    label: str
    target: int


@dataclass(frozen=True)
class CoverGraph:
    """A Karp-Miller graph. Node 0 is the root.

    Attributes:
        places: Coordinates of the node labels.
        nodes: Node labels, indexed by node id.
        edges: Labeled edges between node ids.
        parents: Tree parent of every node, None for the root.
    """

    places: tuple[str, ...]
    nodes: tuple[OmegaMarking, ...]
    edges: tuple[CoverEdge, ...]
    parents: tuple[int | None, ...]

    @property
    def root(self) -> OmegaMarking:
        return self.nodes[0]

    def node_id(self, label: OmegaMarking) -> int:
        return self.nodes.index(label)

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(len(self.nodes)))
        for i, edge in enumerate(self.edges):
            graph.add_edge(edge.source, edge.target, key=i, label=edge.label)
        return graph


def _accelerate(
    candidate: Vector,
    parent: int,
    by_transfer: bool,
    labels: list[Vector],
    parents: list[int | None],
    entered_by_transfer: list[bool],
    sources: frozenset[int],
) -> Vector:
    crossed = by_transfer
    node: int | None = parent
    while node is not None:
        ancestor = labels[node]
        if ancestor != candidate and all(a <= c for a, c in zip(ancestor, candidate, strict=True)):
            if not crossed:
                candidate = tuple(OMEGA if c > a else c for a, c in zip(ancestor, candidate, strict=True))
            elif by_transfer and entered_by_transfer[node]:
                candidate = tuple(
                    OMEGA if c > a and i not in sources else c
                    for i, (a, c) in enumerate(zip(ancestor, candidate, strict=True))
                )
        crossed = crossed or entered_by_transfer[node]
        node = parents[node]
    return candidate


def _build_cover_graph(net: SDTN, start: OmegaMarking, settings: Settings | None) -> CoverGraph:
    limit = get_settings(settings).max_cover_nodes
    ignored = [net.index[p] for p in net.ignored]
    sources = frozenset(net.index[s] for s in net.transfer.sources) if net.transfer else frozenset()

    def clean(v: Vector) -> Vector:
        if not ignored:
            return v
        out = list(v)
        for i in ignored:
            out[i] = 0
        return tuple(out)

    root = clean(start.counts)
    if len(root) != len(net.places):
        raise ShapeMismatch(f"marking has {len(root)} entries, net {net.name} has {len(net.places)} places")
    labels: list[Vector] = [root]
    ids = {root: 0}
    parents: list[int | None] = [None]
    entered_by_transfer = [False]
    edges: list[CoverEdge] = []
    queue = deque([0])
    labels_order = net.labels()
    while queue:
        i = queue.popleft()
        current = labels[i]
        for label in labels_order:
            if not is_enabled_vector(net, current, label):
                continue
            by_transfer = label == TRANSFER
            nxt = clean(transfer_vector(net, current) if by_transfer else fire_vector(net, current, label))
            nxt = _accelerate(nxt, i, by_transfer, labels, parents, entered_by_transfer, sources)
            j = ids.get(nxt)
            if j is None:
                if len(labels) >= limit:
                    raise LimitExceeded("max_cover_nodes", limit)
                j = len(labels)
                labels.append(nxt)
                ids[nxt] = j
                parents.append(i)
                entered_by_transfer.append(by_transfer)
                queue.append(j)
            edges.append(CoverEdge(i, label, j))
    logger.debug("cover graph of %s: %d nodes, %d edges", net.name, len(labels), len(edges))
    return CoverGraph(net.places, tuple(OmegaMarking(v) for v in labels), tuple(edges), tuple(parents))


def cover_graph_pn(net: SDTN, start: OmegaMarking, settings: Settings | None = None) -> CoverGraph:
    """Karp-Miller graph of a plain Petri net.

    Raises:
        ShapeMismatch: If the net has a transfer.
    """
    if net.transfer is not None:
        raise ShapeMismatch(f"{net.name} has a transfer; use cover_graph_sdtn")
    return _build_cover_graph(net, start, settings)


def cover_graph_sdtn(net: SDTN, start: OmegaMarking, settings: Settings | None = None) -> CoverGraph:
    """Coverability graph of an SD-TN.

    Loops without the transfer are accelerated as in Petri nets. A loop through
    the transfer is accelerated only between two nodes entered by the transfer,
    and never on a transfer source.
    """
    return _build_cover_graph(net, start, settings)


def at_markings(graph: CoverGraph) -> frozenset[OmegaMarking]:
    """Labels of nodes entered by a transfer edge."""
    return frozenset(graph.nodes[e.target] for e in graph.edges if e.label == TRANSFER)


# ============================================================================
# SCC automata and cycle systems
# ============================================================================


@dataclass(frozen=True, slots=True)
class AutomatonEdge:
    source: int
    target: int
    label: str
    effect: tuple[int, ...]


@dataclass(frozen=True)
class SCCAutomaton:
    """The maximal strongly connected subgraph around one node.

    ``effect`` vectors range over ``coordinates``; a transfer edge carries the
    effect of the transfer's Petri part.
    """

    states: tuple[int, ...]
    initial: int
    edges: tuple[AutomatonEdge, ...]
    coordinates: tuple[str, ...]


def _components(graph: CoverGraph) -> list[frozenset[int]]:
    components = nx.strongly_connected_components(graph.to_networkx())
    return sorted((frozenset(c) for c in components), key=min)


def _automaton(net: SDTN, graph: CoverGraph, component: frozenset[int], initial: int) -> SCCAutomaton:
    keep = [i for i, p in enumerate(net.places) if p not in net.ignored]
    effects: dict[str, tuple[int, ...]] = {}
    edges: list[AutomatonEdge] = []
    for edge in graph.edges:
        if edge.source not in component or edge.target not in component:
            continue
        if edge.label not in effects:
            full = _petri_part_effect(net) if edge.label == TRANSFER else effect_vector(net, edge.label).delta
            effects[edge.label] = tuple(full[i] for i in keep)
        edges.append(AutomatonEdge(edge.source, edge.target, edge.label, effects[edge.label]))
    coordinates = tuple(net.places[i] for i in keep)
    return SCCAutomaton(tuple(sorted(component)), initial, tuple(edges), coordinates)


def scc_automaton(net: SDTN, graph: CoverGraph, node: int) -> SCCAutomaton:
    """The automaton over the maximal SCC containing ``node``."""
    for component in _components(graph):
        if node in component:
            return _automaton(net, graph, component, node)
    raise ValueError(f"node {node} is not in the graph")


def _total(terms: Sequence[z3.ArithRef]) -> z3.ArithRef:
    return z3.Sum(terms) if terms else z3.IntVal(0)


# Closed walks of at most this many edges are tried before any solver call.
_SHORT_CYCLE_LENGTH = 4
_SHORT_CYCLE_LIMIT = 5_000


@dataclass(frozen=True)
class _CycleProblem:
    edges: Sequence[tuple[int, int]]
    rows: Sequence[Sequence[int]]
    root: int | None
    required: frozenset[int]
    timeout_ms: int

    def admits(self, used: Iterable[int]) -> bool:
        """Whether a set of edges can still carry a walk meeting the root and required-edge conditions."""
        used = set(used)
        if self.required and not self.required & used:
            return False
        return self.root is None or any(self.edges[e][0] == self.root for e in used)


def _short_cycle(problem: _CycleProblem, usable: Sequence[int]) -> list[int] | None:
    """A closed walk using each edge at most once, of bounded length, with nonnegative sums."""
    by_source: dict[int, list[int]] = {}
    for e in usable:
        by_source.setdefault(problem.edges[e][0], []).append(e)
    successions = nx.DiGraph()
    successions.add_nodes_from(usable)
    for e in usable:
        successions.add_edges_from((e, f) for f in by_source.get(problem.edges[e][1], []))
    cycles = nx.simple_cycles(successions, length_bound=_SHORT_CYCLE_LENGTH)
    for _, cycle in zip(range(_SHORT_CYCLE_LIMIT), cycles, strict=False):
        if problem.admits(cycle) and all(sum(row[e] for e in cycle) >= 0 for row in problem.rows):
            return cycle
    return None


def _check(solver: z3.Solver) -> z3.ModelRef | None:
    verdict = solver.check()
    if verdict == z3.unknown:
        raise SolverUnknown(f"z3 returned unknown: {solver.reason_unknown()}")
    return solver.model() if verdict == z3.sat else None


def _maximal_support(problem: _CycleProblem, active: frozenset[int]) -> dict[int, Fraction] | None:
    """The sum of rational balanced flows on ``active`` whose support is the union of all supports.

    Balanced flows meeting the constraints are closed under addition, so the
    union of their supports is itself the support of one such flow.
    """
    solver = z3.Solver()
    solver.set("timeout", problem.timeout_ms)
    x = {e: z3.Real(f"x_{e}") for e in sorted(active)}
    for var in x.values():
        solver.add(var >= 0)
    solver.add(_total(list(x.values())) >= 1)
    if problem.required:
        solver.add(_total([x[e] for e in problem.required & active]) >= 1)
    if problem.root is not None:
        solver.add(_total([x[e] for e in active if problem.edges[e][0] == problem.root]) >= 1)
    for v in {s for e in active for s in problem.edges[e]}:
        incoming = [x[e] for e in active if problem.edges[e][1] == v]
        outgoing = [x[e] for e in active if problem.edges[e][0] == v]
        solver.add(_total(incoming) == _total(outgoing))
    for row in problem.rows:
        terms = [row[e] * x[e] for e in active if row[e]]
        if terms:
            solver.add(_total(terms) >= 0)

    flow: dict[int, Fraction] = {}

    def absorb(model: z3.ModelRef) -> None:
        for e, var in x.items():
            value = model.eval(var, model_completion=True)
            share = Fraction(value.numerator_as_long(), value.denominator_as_long())
            if share:
                flow[e] = flow.get(e, Fraction(0)) + share

    model = _check(solver)
    if model is None:
        return None
    absorb(model)
    for e in x:
        if e in flow:
            continue
        solver.push()
        solver.add(x[e] >= 1)
        model = _check(solver)
        solver.pop()
        if model is not None:
            absorb(model)
    return flow


def solve_cycle_system(
    states: Sequence[int],
    edges: Sequence[tuple[int, int]],
    rows: Sequence[Sequence[int]],
    *,
    root: int | None,
    zero: Iterable[int] = (),
    required: Iterable[int] = (),
    timeout_ms: int = 60_000,
) -> dict[int, int] | None:
    """Find edge multiplicities forming a closed walk with nonnegative weighted sums.

    Short closed walks are tried first. Otherwise the maximal support of the
    balanced flows is computed with rational arithmetic; if it is strongly
    connected the summed flow, scaled to integers, is a witness, and if not
    the search repeats inside each of its strongly connected components.

    Args:
        states: Automaton states; edges leaving them are ignored.
        edges: ``(source, target)`` per edge.
        rows: Constraints ``sum(row[e] * x[e]) >= 0``, one coefficient per edge.
        root: State the walk must visit, or None for any state.
        zero: Edges that must not be used.
        required: Edges of which at least one must be used, if any are given.
        timeout_ms: Solver timeout per call.

    Returns:
        Edge multiplicities of a witness, or None if there is none.

    Raises:
        SolverUnknown: If z3 cannot decide a system.
    """
    inside = set(states)
    banned = set(zero)
    usable = [e for e, (src, tgt) in enumerate(edges) if src in inside and tgt in inside and e not in banned]
    problem = _CycleProblem(edges, rows, root, frozenset(required), timeout_ms)
    if not usable:
        return None

    cycle = _short_cycle(problem, usable)
    if cycle is not None:
        return {e: int(e in cycle) for e in range(len(edges))}

    pending = [frozenset(usable)]
    while pending:
        active = pending.pop()
        if not problem.admits(active):
            continue
        flow = _maximal_support(problem, active)
        if flow is None:
            continue
        support = nx.MultiDiGraph()
        support.add_edges_from((*edges[e], e) for e in flow)
        components = list(nx.strongly_connected_components(support))
        if len(components) == 1:
            scale = math.lcm(*(share.denominator for share in flow.values()))
            return {e: int(flow.get(e, 0) * scale) for e in range(len(edges))}
        logger.debug("cycle support splits into %d components", len(components))
        for component in components:
            inner = frozenset(e for e in flow if edges[e][0] in component and edges[e][1] in component)
            if inner:
                pending.append(inner)
    return None


def _effect_rows(automaton: SCCAutomaton) -> list[list[int]]:
    return [[edge.effect[c] for edge in automaton.edges] for c in range(len(automaton.coordinates))]


def exists_nonneg_cycle(
    automaton: SCCAutomaton,
    *,
    through_initial: bool = True,
    settings: Settings | None = None,
) -> bool:
    """Whether a nonempty closed walk of the automaton has a nonnegative total effect.

    Args:
        automaton: The SCC automaton.
        through_initial: Require the walk to pass through the initial state.
        settings: Solver timeout source.
    """
    witness = solve_cycle_system(
        automaton.states,
        [(e.source, e.target) for e in automaton.edges],
        _effect_rows(automaton),
        root=automaton.initial if through_initial else None,
        timeout_ms=get_settings(settings).solver_timeout_ms,
    )
    return witness is not None


def _folded_rows(net: SDTN, automaton: SCCAutomaton) -> list[list[int]]:
    """Effects for walks through the transfer: production into a source counts for its target."""
    assert net.transfer is not None
    column = {p: c for c, p in enumerate(automaton.coordinates)}
    target_of = dict(net.transfer.moves)
    source_of = {tgt: src for src, tgt in net.transfer.moves}
    rows: list[list[int]] = []
    for c, place in enumerate(automaton.coordinates):
        if place in target_of:
            rows.append([0] * len(automaton.edges))
            continue
        folded = column.get(source_of.get(place, ""))
        row: list[int] = []
        for edge in automaton.edges:
            value = edge.effect[c]
            if folded is not None and edge.label != TRANSFER:
                value += edge.effect[folded]
            row.append(value)
        rows.append(row)
    for src in target_of:
        if src in column:
            c = column[src]
            rows.append([0 if e.label == TRANSFER else e.effect[c] for e in automaton.edges])
    return rows


def _has_infinite_run(net: SDTN, graph: CoverGraph, settings: Settings | None) -> bool:
    timeout = get_settings(settings).solver_timeout_ms
    for component in _components(graph):
        automaton = _automaton(net, graph, component, min(component))
        if not automaton.edges:
            continue
        pairs = [(e.source, e.target) for e in automaton.edges]
        transfers = [i for i, e in enumerate(automaton.edges) if e.label == TRANSFER]
        plain = solve_cycle_system(
            automaton.states, pairs, _effect_rows(automaton), root=None, zero=transfers, timeout_ms=timeout
        )
        if plain is not None:
            return True
        if transfers:
            folded = solve_cycle_system(
                automaton.states,
                pairs,
                _folded_rows(net, automaton),
                root=None,
                required=transfers,
                timeout_ms=timeout,
            )
            if folded is not None:
                return True
    return False


def pred_inf_pn(net: SDTN, u: OmegaMarking, settings: Settings | None = None) -> bool:
    """Whether some finite marking below ``u`` has an infinite run (plain nets)."""
    return _has_infinite_run(net, cover_graph_pn(net, u, settings), settings)


def pred_inf_sdtn(net: SDTN, u: OmegaMarking, settings: Settings | None = None) -> bool:
    """Whether some finite marking below ``u`` has an infinite run (SD-TNs)."""
    return _has_infinite_run(net, cover_graph_sdtn(net, u, settings), settings)


# ============================================================================
# Minimal elements
# ============================================================================

Predicate = Callable[[OmegaMarking], bool]


def _dominated(v: Vector, by: Iterable[Vector]) -> bool:
    return any(all(a <= b for a, b in zip(v, w, strict=True)) for w in by)


def valk_jantzen(dimension: int, pred: Predicate, settings: Settings | None = None) -> frozenset[tuple[int, ...]]:
    """Minimal elements of the upward-closed set whose down-intersection test is ``pred``.

    ``pred(u)`` must answer whether some finite vector below ``u`` lies in the set.

    Raises:
        NonMonotonePredicate: If a coordinate cannot be made finite, which a
            monotone predicate never causes.
    """
    gallop_limit = get_settings(settings).gallop_limit
    answers: dict[Vector, bool] = {}
    known_false: list[Vector] = []

    def ask(v: Vector) -> bool:
        if v not in answers:
            if _dominated(v, known_false):
                answers[v] = False
            else:
                answers[v] = pred(OmegaMarking(v))
                if not answers[v]:
                    known_false.append(v)
        return answers[v]

    def lowest(v: list[int | float], i: int) -> int:
        def with_value(n: int) -> Vector:
            return tuple(v[:i]) + (n,) + tuple(v[i + 1 :])

        if v[i] == OMEGA:
            bad, good = -1, 0
            while not ask(with_value(good)):
                bad, good = good, max(1, 2 * good)
                if good > gallop_limit:
                    raise NonMonotonePredicate(f"coordinate {i} stays unbounded beyond {gallop_limit}")
        else:
            bad, good = -1, int(v[i])
        while good - bad > 1:
            mid = (bad + good) // 2
            if ask(with_value(mid)):
                good = mid
            else:
                bad = mid
        return good

    found: list[tuple[int, ...]] = []
    frontier: set[Vector] = {(OMEGA,) * dimension}
    while frontier:
        chosen: Vector | None = None
        for w in sorted(frontier):
            if ask(w):
                chosen = w
                break
            frontier.discard(w)
        if chosen is None:
            break
        z: list[int | float] = list(chosen)
        for i in range(dimension):
            z[i] = lowest(z, i)
        minimal = tuple(int(n) for n in z)
        if not ask(minimal):
            raise NonMonotonePredicate(f"minimized vector {minimal} fails the predicate")
        found.append(minimal)
        logger.debug("minimal element %s (%d found)", minimal, len(found))
        cuts = [
            tuple(minimal[i] - 1 if j == i else OMEGA for j in range(dimension))
            for i in range(dimension)
            if minimal[i] > 0
        ]
        merged = {tuple(min(a, b) for a, b in zip(w, cut, strict=True)) for w in frontier for cut in cuts}
        frontier = {w for w in merged if not any(w != o and _dominated(w, [o]) for o in merged)}
    logger.info("valk_jantzen: %d minimal elements, %d predicate calls", len(found), len(answers))
    return frozenset(found)


def inf_min(net: SDTN, settings: Settings | None = None) -> frozenset[SDTNMarking]:
    """Minimal markings of a plain net (no transfer) admitting an infinite run."""
    free = [i for i, p in enumerate(net.places) if p not in net.ignored]

    def embed(u: OmegaMarking) -> OmegaMarking:
        full: list[int | float] = [0] * len(net.places)
        for i, v in zip(free, u.counts, strict=True):
            full[i] = v
        return OmegaMarking(tuple(full))

    def pred(u: OmegaMarking) -> bool:
        return pred_inf_pn(net, embed(u), settings)

    vectors = valk_jantzen(len(free), pred, settings)
    return frozenset(SDTNMarking(tuple(int(v) for v in embed(OmegaMarking(vec)).counts)) for vec in vectors)


def inf_min_standard(net: SDTN, settings: Settings | None = None) -> frozenset[SDTNMarking]:
    """Minimal standard markings of a dense translation admitting an infinite run.

    Control places are pinned to the standard pattern; the search runs over
    the symbolic places only.
    """
    control = set(CONTROL_PLACES)
    free = [i for i, p in enumerate(net.places) if p not in control]
    disc = net.index[P_DISC]

    def embed(values: Sequence[int | float]) -> Vector:
        full: list[int | float] = [0] * len(net.places)
        full[disc] = 1
        for i, v in zip(free, values, strict=True):
            full[i] = v
        return tuple(full)

    def pred(u: OmegaMarking) -> bool:
        return pred_inf_sdtn(net, OmegaMarking(embed(u.counts)), settings)

    vectors = valk_jantzen(len(free), pred, settings)
    return frozenset(SDTNMarking(tuple(int(v) for v in embed(vec))) for vec in vectors)
