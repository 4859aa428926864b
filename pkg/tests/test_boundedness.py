"""Tests for syntactic boundedness and non-termination."""

import random
from fractions import Fraction
from itertools import pairwise

import pytest

from tests.conftest import net_of
from tests.oracles import random_marking, random_net
from tpnv.boundedness import (
    TIME,
    Bounded,
    NodeStatus,
    Unbounded,
    check_bounded,
    check_nonterm,
    labeled_successors,
    region_graph,
)
from tpnv.config import Settings
from tpnv.errors import LimitExceeded
from tpnv.multiset import Bag
from tpnv.net import TPN, canonical_binding, fire_discrete, marking, simulate
from tpnv.regions import Region, discrete_post, region_leq, region_of, time_succ


def test_time_only_net_is_bounded(oneplace_net: TPN) -> None:
    """Test a net whose markings only age."""
    result = check_bounded(oneplace_net, marking(("p", 0)))
    assert isinstance(result, Bounded)
    assert result.max_size == 1
    assert len(result.tree) == 2
    assert result.tree.root.status is NodeStatus.INTERIOR
    assert result.tree.nodes[1].status is NodeStatus.UNSUCCESSFUL
    assert result.tree.nodes[1].label == TIME


def test_pump_is_unbounded(pump_net: TPN) -> None:
    """Test a transition that adds a token every time it fires."""
    result = check_bounded(pump_net, marking(("p", 0)))
    assert isinstance(result, Unbounded)
    assert result.path == ["t"]
    assert result.pump == ["t"]
    assert result.ancestor == 0
    assert result.tree.nodes[result.witness].status is NodeStatus.WITNESS

    m = marking(("p", 0))
    sizes = []
    for _ in range(3):
        m = fire_discrete(pump_net, m, "t", canonical_binding(pump_net, "t", [("p", Fraction(0))]))
        sizes.append(len(m))
    assert sizes == [2, 3, 4]


def test_zero_time_loop_is_bounded(loop_net: TPN) -> None:
    """Test that repeating a region is not growth."""
    result = check_bounded(loop_net, marking(("p", 0)))
    assert isinstance(result, Bounded)
    assert result.max_size == 1
    assert NodeStatus.DUPLICATE in {n.status for n in result.tree.nodes}


def test_empty_marking_is_bounded(pump_net: TPN) -> None:
    """Test that nothing fires without tokens."""
    result = check_bounded(pump_net, Bag())
    assert isinstance(result, Bounded)
    assert result.max_size == 0
    assert len(result.tree) == 1


def test_tree_limit(pump_net: TPN) -> None:
    """Test the node cap."""
    tight = Settings(_env_file=None, max_tree_nodes=1)  # type: ignore[call-arg]
    with pytest.raises(LimitExceeded) as excinfo:
        check_bounded(pump_net, marking(("p", 0)), tight)
    assert excinfo.value.limit == "max_tree_nodes"


def test_labeled_successors_put_time_first(pump_net: TPN) -> None:
    """Test the order of successors."""
    labels = [label for label, _ in labeled_successors(pump_net, region_of(marking(("p", 0)), 0))]
    assert labels == [TIME, "t"]


def test_region_graph_folds_duplicates(loop_net: TPN) -> None:
    """Test that a duplicate becomes an edge back to its ancestor."""
    result = check_bounded(loop_net, marking(("p", 0)))
    assert isinstance(result, Bounded)
    graph = region_graph(result.tree)
    assert graph.has_edge(0, 0)
    assert graph[0][0]["discrete"]


@pytest.mark.parametrize(
    ("net_name", "tokens", "expected"),
    [
        ("loop", [("p", 0)], True),
        ("loop", [("p", "0.5")], False),
        ("pump", [("p", 0)], True),
        ("oneplace", [("p", 0)], False),
        ("pump", [], False),
    ],
)
def test_nonterm(
    net_name: str,
    tokens: list[tuple[str, int | str]],
    expected: bool,
    loop_net: TPN,
    pump_net: TPN,
    oneplace_net: TPN,
) -> None:
    """Test infinitely many transition firings."""
    net = {"loop": loop_net, "pump": pump_net, "oneplace": oneplace_net}[net_name]
    assert check_nonterm(net, marking(*tokens)) is expected


def test_nonterm_with_waiting() -> None:
    """Test a loop that fires once per time unit."""
    net = net_of("aging", "p", [("in", "t", "p", "[1,1]"), ("out", "t", "p", "[0,0]")])
    assert check_nonterm(net, marking(("p", 0)))
    assert isinstance(check_bounded(net, marking(("p", 0))), Bounded)
    assert not check_nonterm(net, marking(("p", 2)))


# ============================================================================
# Witness replay
# ============================================================================

Steps = list[tuple[str, Region]]


def follow(net: TPN, start: Region, reference: Steps) -> Steps:
    """Repeat the labels of ``reference`` from a region above its first region.

    Timed steps may take several region successors; every step ends above the
    matching reference region.
    """
    current = start
    steps: Steps = []
    for label, target in reference:
        if label == TIME:
            for _ in range(2 * (current.size + 1) * (current.max + 2)):
                if region_leq(target, current):
                    break
                current = time_succ(current)
            assert region_leq(target, current), f"time cannot reach {target}"
        else:
            above = sorted(
                (r for r in discrete_post(net, current, label) if region_leq(target, r)),
                key=lambda r: (r.size, r.to_text()),
            )
            assert above, f"{label} cannot reach {target}"
            current = above[0]
        steps.append((label, current))
    return steps


def check_pumps(net: TPN, result: Unbounded, repeats: int = 2) -> None:
    """Replay the witness branch, then its pump ``repeats`` more times with growing sizes."""
    nodes = result.tree.path(result.witness)
    for parent, child in pairwise(nodes):
        assert child.label is not None
        assert (child.label, child.region) in labeled_successors(net, parent.region)
    start = next(i for i, n in enumerate(nodes) if n.id == result.ancestor)
    reference: Steps = [(n.label, n.region) for n in nodes[start + 1 :] if n.label is not None]
    assert [label for label, _ in reference] == result.pump
    sizes = [nodes[start].region.size, nodes[-1].region.size]
    current = nodes[-1].region
    for _ in range(repeats):
        reference = follow(net, current, reference)
        current = reference[-1][1]
        sizes.append(current.size)
    assert all(a < b for a, b in pairwise(sizes)), sizes


def test_aging_pump_replays() -> None:
    """Test a pump that needs time to pass before each firing."""
    net = net_of(
        "aging-pump",
        "p q",
        [("in", "t", "p", "[1,1]"), ("out", "t", "p", "[0,0]"), ("out", "t", "q", "[0,0]")],
    )
    result = check_bounded(net, marking(("p", 0)))
    assert isinstance(result, Unbounded)
    assert TIME in result.pump
    check_pumps(net, result)


def test_pump_replays(pump_net: TPN) -> None:
    """Test the region replay on the one-transition pump."""
    result = check_bounded(pump_net, marking(("p", 0)))
    assert isinstance(result, Unbounded)
    check_pumps(pump_net, result, repeats=3)


@pytest.mark.parametrize("seed", [*range(10), *(pytest.param(s, marks=pytest.mark.slow) for s in range(10, 100))])
def test_bounded_results_hold_on_runs(seed: int) -> None:
    """Test unbounded witnesses by pumping and bounded ones by random runs."""
    rng = random.Random(seed)
    net = random_net(rng, max_places=2, max_transitions=2, top=1)
    m = random_marking(rng, net)
    try:
        result = check_bounded(net, m, Settings(_env_file=None, max_tree_nodes=5_000))  # type: ignore[call-arg]
    except LimitExceeded:
        pytest.skip(f"{net.name}: region tree too large")
    if isinstance(result, Unbounded):
        check_pumps(net, result)
        return
    assert result.max_size >= len(m)
    for _ in range(5):
        run = simulate(net, m, 30, rng)
        assert all(len(current) <= result.max_size for current in run.markings(net))
