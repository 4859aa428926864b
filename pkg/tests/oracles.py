"""Brute-force reference procedures and random instance generators."""

import random
from collections import deque
from collections.abc import Iterator
from fractions import Fraction
from itertools import product

import networkx as nx

from tpnv.multiset import Bag
from tpnv.net import TPN, Arc, Interval, TimedMarking, enabled
from tpnv.omega import AutomatonEdge, SCCAutomaton
from tpnv.regions import MRUC, Region, post_regions, region_leq, region_of
from tpnv.sdtn import SDTN, TRANSFER, Vector, fire_vector, is_enabled_vector, transfer_vector

# ============================================================================
# Random instances
# ============================================================================


def random_interval(rng: random.Random, top: int) -> Interval:
    lower = rng.randint(0, top)
    roll = rng.random()
    if roll < 0.3:
        return Interval.point(lower)
    if roll < 0.5 or lower == top:
        return Interval(lower, None, rng.random() < 0.7, False)
    upper = rng.randint(lower + 1, top)
    return Interval(lower, upper, rng.random() < 0.7, rng.random() < 0.7)


def random_net(rng: random.Random, max_places: int = 3, max_transitions: int = 3, top: int = 2) -> TPN:
    """A net whose transitions all have at least one input arc."""
    places = tuple(f"p{i}" for i in range(rng.randint(1, max_places)))
    transitions = tuple(f"t{i}" for i in range(rng.randint(1, max_transitions)))
    ins: list[Arc] = []
    outs: list[Arc] = []
    for t in transitions:
        for p in rng.sample(places, rng.randint(1, min(2, len(places)))):
            ins.append(Arc(t, p, random_interval(rng, top)))
        for p in rng.sample(places, rng.randint(0, min(2, len(places)))):
            outs.append(Arc(t, p, random_interval(rng, top)))
    return TPN(f"random-{rng.randrange(10**6)}", places, transitions, tuple(ins), tuple(outs))


def random_marking(rng: random.Random, net: TPN, max_tokens: int = 3, integer: bool = False) -> TimedMarking:
    tokens: list[tuple[str, Fraction]] = []
    for _ in range(rng.randint(0, max_tokens)):
        age = Fraction(rng.randint(0, net.max_constant + 1))
        if not integer and rng.random() < 0.5:
            age += Fraction(rng.randint(1, 9), 10)
        tokens.append((rng.choice(net.places), age))
    return Bag.of(tokens)


def random_automaton(rng: random.Random, max_states: int = 6, max_edges: int = 8, dimension: int = 3) -> SCCAutomaton:
    states = tuple(range(rng.randint(1, max_states)))
    edges = tuple(
        AutomatonEdge(
            rng.choice(states),
            rng.choice(states),
            f"e{i}",
            tuple(rng.randint(-2, 2) for _ in range(dimension)),
        )
        for i in range(rng.randint(1, max_edges))
    )
    coordinates = tuple(f"c{i}" for i in range(dimension))
    return SCCAutomaton(states, 0, edges, coordinates)


# ============================================================================
# Cycles
# ============================================================================


def closed_walk_oracle(automaton: SCCAutomaton, max_length: int = 12) -> bool:
    """Enumerate closed walks through the initial state up to a length bound."""
    outgoing: dict[int, list[AutomatonEdge]] = {s: [] for s in automaton.states}
    for edge in automaton.edges:
        outgoing[edge.source].append(edge)
    dimension = len(automaton.coordinates)
    stack: list[tuple[int, tuple[int, ...], int]] = [(automaton.initial, (0,) * dimension, 0)]
    while stack:
        state, total, length = stack.pop()
        if length and state == automaton.initial and all(v >= 0 for v in total):
            return True
        if length == max_length:
            continue
        for edge in outgoing[state]:
            stack.append((edge.target, tuple(a + b for a, b in zip(total, edge.effect, strict=True)), length + 1))
    return False


def is_closed_walk(automaton: SCCAutomaton, multiplicities: dict[int, int]) -> bool:
    """Check that edge multiplicities describe a nonnegative closed walk through the initial state."""
    used = [(automaton.edges[e], n) for e, n in multiplicities.items() if n > 0]
    if not used:
        return False
    balance: dict[int, int] = {}
    graph = nx.DiGraph()
    for edge, n in used:
        balance[edge.source] = balance.get(edge.source, 0) + n
        balance[edge.target] = balance.get(edge.target, 0) - n
        graph.add_edge(edge.source, edge.target)
    if any(balance.values()) or automaton.initial not in graph or not nx.is_strongly_connected(graph):
        return False
    dimension = len(automaton.coordinates)
    totals = [sum(automaton.edges[e].effect[c] * n for e, n in multiplicities.items()) for c in range(dimension)]
    return all(v >= 0 for v in totals)


# ============================================================================
# Discrete time
# ============================================================================

Config = tuple[tuple[str, int], ...]


def _config(tokens: list[tuple[str, int]]) -> Config:
    return tuple(sorted(tokens))


def _integer_ages(interval: Interval, top: int) -> list[int]:
    ages = [k for k in range(top + 1) if interval.contains(k)]
    if interval.unbounded:
        ages.append(top + 1)
    return ages


def _firings(net: TPN, config: Config) -> set[Config]:
    top = net.max_constant
    out: set[Config] = set()
    for t in net.transitions:
        ins, outs = net.inputs_of(t), net.outputs_of(t)
        choices = [[tok for tok in set(config) if tok[0] == a.place and a.interval.contains(tok[1])] for a in ins]
        if not all(choices):
            continue
        for consumed in product(*choices):
            rest = list(config)
            for tok in consumed:
                rest.remove(tok)
            for produced in product(*([(a.place, age) for age in _integer_ages(a.interval, top)] for a in outs)):
                out.add(_config(rest + list(produced)))
    return out


def _tick(config: Config, top: int) -> Config:
    return _config([(p, min(k + 1, top + 1)) for p, k in config])


def _covers(small: Config, large: Config) -> bool:
    return Bag.of(small) <= Bag.of(large)


def zero_time_infinite(net: TPN, config: Config, node_limit: int = 2_000) -> bool | None:
    """Whether transitions alone can fire forever, by a tree stopped at covered ancestors."""
    stack: list[tuple[Config, tuple[Config, ...]]] = [(config, ())]
    nodes = 0
    while stack:
        current, ancestors = stack.pop()
        if any(_covers(a, current) for a in ancestors):
            return True
        nodes += 1
        if nodes > node_limit:
            return None
        for nxt in _firings(net, current):
            stack.append((nxt, (*ancestors, current)))
    return False


def discrete_zeno_oracle(net: TPN, m: TimedMarking, node_limit: int = 300) -> bool | None:
    """Search the integer configurations reachable from ``m`` for one that fires forever in zero time.

    Returns None when the search is cut short before an answer is certain.
    """
    top = net.max_constant
    start = _config([(p, min(int(age), top + 1)) for p, age in m])
    seen = {start}
    queue = deque([start])
    inconclusive = False
    while queue:
        current = queue.popleft()
        verdict = zero_time_infinite(net, current)
        if verdict:
            return True
        if verdict is None:
            inconclusive = True
        for nxt in (*_firings(net, current), _tick(current, top)):
            if nxt in seen:
                continue
            if len(seen) >= node_limit:
                inconclusive = True
                continue
            seen.add(nxt)
            queue.append(nxt)
    return None if inconclusive else False


# ============================================================================
# Forward region exploration
# ============================================================================


def forward_cover_oracle(net: TPN, m: TimedMarking, target: MRUC, node_limit: int = 2_000) -> bool | None:
    """Explore regions forward from ``m`` until one lies in the target's closure."""
    start = region_of(m, net.max_constant)
    seen = {start}
    queue = deque([start])
    while queue:
        region = queue.popleft()
        if any(region_leq(t, region) for t in target.regions):
            return True
        for nxt in post_regions(net, region):
            if nxt not in seen:
                if len(seen) >= node_limit:
                    return None
                seen.add(nxt)
                queue.append(nxt)
    return False


def representative(region: Region) -> TimedMarking:
    """A concrete marking inside a region: fractional classes spread evenly over (0, 1)."""
    tokens: list[tuple[str, Fraction]] = [(p, Fraction(k)) for p, k in region.b0]
    step = Fraction(1, len(region.word) + 1)
    for i, cls in enumerate(region.word):
        tokens += [(p, k + (i + 1) * step) for p, k in cls]
    tokens += [(p, Fraction(region.max + 1)) for p in region.bmax]
    return Bag.of(tokens)


def live_token_oracle(net: TPN, m: TimedMarking, token: tuple[str, Fraction], node_limit: int = 2_000) -> bool | None:
    """Explore regions forward with the token parked until some consumer can take it.

    Each region is checked on a concrete representative with the parked token
    put back on its place.
    """
    place, age = token
    parked = f"{place}*"
    extended = net.with_place(parked)
    consumers = [t for t in net.transitions if net.input_interval(t, place) is not None]
    start = region_of(m.remove(token).add((parked, age)), net.max_constant)
    seen = {start}
    queue = deque([start])
    while queue:
        region = queue.popleft()
        concrete = representative(region)
        aged = next(a for p, a in concrete if p == parked)
        restored = concrete.remove((parked, aged)).add((place, aged))
        for t in consumers:
            interval = net.input_interval(t, place)
            if interval is not None and interval.contains(aged) and enabled(net, restored, t):
                return True
        for nxt in post_regions(extended, region):
            if nxt not in seen:
                if len(seen) >= node_limit:
                    return None
                seen.add(nxt)
                queue.append(nxt)
    return False


# ============================================================================
# SD-TN runs
# ============================================================================


def sdtn_infinite_run_oracle(net: SDTN, start: Vector, node_limit: int = 3_000) -> bool | None:
    """Depth-first search for a marking that covers one of its own ancestors.

    Ignored places are never read by any transition and are zeroed. A covered
    ancestor gives a repeatable lasso; a finished search without one means the
    reachable markings are finitely many and acyclic. Returns None when the
    node limit is hit first.
    """
    ignored = {net.index[p] for p in net.ignored}
    labels = [t.name for t in net.transitions] + ([TRANSFER] if net.transfer is not None else [])

    def project(v: Vector) -> Vector:
        return tuple(0 if i in ignored else int(n) for i, n in enumerate(v))

    def successors(v: Vector) -> Iterator[Vector]:
        for label in labels:
            if is_enabled_vector(net, v, label):
                yield project(transfer_vector(net, v) if label == TRANSFER else fire_vector(net, v, label))

    root = project(start)
    seen = {root}
    path = [root]
    frontier = [successors(root)]
    while frontier:
        nxt = next(frontier[-1], None)
        if nxt is None:
            frontier.pop()
            path.pop()
            continue
        if any(all(a >= b for a, b in zip(nxt, ancestor, strict=True)) for ancestor in path):
            return True
        if nxt in seen:
            continue
        if len(seen) >= node_limit:
            return None
        seen.add(nxt)
        path.append(nxt)
        frontier.append(successors(nxt))
    return False
