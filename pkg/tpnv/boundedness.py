"""Syntactic boundedness and non-termination.

Both decisions grow a Karp–Miller style tree of regions from the region of the
initial marking. A branch stops when its node has no successor, repeats an
ancestor, or strictly covers an ancestor; the last case proves that the
number of tokens grows without bound.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import networkx as nx

from tpnv.config import Settings, get_settings
from tpnv.errors import LimitExceeded
from tpnv.net import TPN, TimedMarking
from tpnv.regions import Region, discrete_post, region_less_strict, region_of, time_succ

logger = logging.getLogger(__name__)

TIME = "time"
"""Edge label of a timed step in a region tree."""


class NodeStatus(str, Enum):
    INTERIOR = "interior"
    UNSUCCESSFUL = "unsuccessful"
    DUPLICATE = "duplicate"
    WITNESS = "witness"
    OPEN = "open"


@dataclass(slots=True)
class TreeNode:
    """A node of a region tree.

    Attributes:
        id: Position in ``RegionTree.nodes``.
        region: The node label.
        parent: Parent id, ``None`` for the root.
        label: Label of the edge from the parent: a transition name or ``TIME``.
        status: How the node was closed.
        ancestor: For duplicates and witnesses, the matching strict ancestor.
    """

    id: int
    region: Region
    parent: int | None
    label: str | None
    status: NodeStatus = NodeStatus.OPEN
    ancestor: int | None = None


@dataclass
class RegionTree:
    """A region tree rooted at the region of the initial marking."""

    nodes: list[TreeNode] = field(default_factory=list)

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def add(self, region: Region, parent: int | None, label: str | None) -> TreeNode:
        node = TreeNode(len(self.nodes), region, parent, label)
        self.nodes.append(node)
        return node

    def path(self, node_id: int) -> list[TreeNode]:
        """Nodes from the root down to ``node_id``, both included."""
        out: list[TreeNode] = []
        current: int | None = node_id
        while current is not None:
            node = self.nodes[current]
            out.append(node)
            current = node.parent
        out.reverse()
        return out

    def children(self, node_id: int) -> list[TreeNode]:
        return [n for n in self.nodes if n.parent == node_id]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Bounded:
    """The closed tree and the largest label size in it."""

    tree: RegionTree
    max_size: int


@dataclass(frozen=True)
class Unbounded:
    """A branch on which a region strictly covers one of its ancestors."""

    tree: RegionTree
    ancestor: int
    witness: int

    @property
    def path(self) -> list[str]:
        """Edge labels from the root to the witness."""
        return [n.label for n in self.tree.path(self.witness)[1:] if n.label is not None]

    @property
    def pump(self) -> list[str]:
        """Edge labels from the covered ancestor to the witness."""
        nodes = self.tree.path(self.witness)
        start = next(i for i, n in enumerate(nodes) if n.id == self.ancestor)
        return [n.label for n in nodes[start + 1 :] if n.label is not None]


BoundednessResult = Bounded | Unbounded


def labeled_successors(net: TPN, region: Region) -> list[tuple[str, Region]]:
    """Successor regions with their step labels, timed step first."""
    out: list[tuple[str, Region]] = []
    later = time_succ(region)
    if later != region:
        out.append((TIME, later))
    for t in net.transitions:
        for succ in sorted(discrete_post(net, region, t), key=lambda r: (r.size, r.to_text())):
            out.append((t, succ))
    return out


def check_bounded(net: TPN, m0: TimedMarking, settings: Settings | None = None) -> BoundednessResult:
    """Decide whether the sizes of markings reachable from ``m0`` are bounded.

    Nodes are expanded breadth first. Each node is checked against its strict
    ancestors only.

    Raises:
        LimitExceeded: If the tree outgrows ``max_tree_nodes``.
    """
    limit = get_settings(settings).max_tree_nodes
    tree = RegionTree()
    tree.add(region_of(m0, net.max_constant), None, None)
    queue: deque[int] = deque([0])
    while queue:
        node = tree.nodes[queue.popleft()]
        successors = labeled_successors(net, node.region)
        ancestors = tree.path(node.id)[:-1]
        if not successors:
            node.status = NodeStatus.UNSUCCESSFUL
            continue
        same = next((a for a in ancestors if a.region == node.region), None)
        if same is not None:
            node.status, node.ancestor = NodeStatus.DUPLICATE, same.id
            continue
        below = next((a for a in ancestors if region_less_strict(a.region, node.region)), None)
        if below is not None:
            node.status, node.ancestor = NodeStatus.WITNESS, below.id
            logger.info("unbounded: node %d covers ancestor %d (%d nodes)", node.id, below.id, len(tree))
            return Unbounded(tree, below.id, node.id)
        node.status = NodeStatus.INTERIOR
        for label, succ in successors:
            if len(tree) >= limit:
                raise LimitExceeded("max_tree_nodes", limit)
            queue.append(tree.add(succ, node.id, label).id)
    size = max(n.region.size for n in tree.nodes)
    logger.info("bounded: %d tree nodes, max size %d", len(tree), size)
    return Bounded(tree, size)


def region_graph(tree: RegionTree) -> nx.DiGraph:
    """Fold a closed tree into a graph by redirecting duplicates to their ancestors.

    Edges carry ``discrete=True`` when some step between the two nodes fires a
    transition.
    """

    def rep(node: TreeNode) -> int:
        return node.ancestor if node.status is NodeStatus.DUPLICATE and node.ancestor is not None else node.id

    graph = nx.DiGraph()
    graph.add_nodes_from(rep(n) for n in tree.nodes)
    for node in tree.nodes:
        if node.parent is None:
            continue
        u, v = rep(tree.nodes[node.parent]), rep(node)
        discrete = node.label != TIME
        if graph.has_edge(u, v):
            graph[u][v]["discrete"] = graph[u][v]["discrete"] or discrete
        else:
            graph.add_edge(u, v, discrete=discrete)
    return graph


def check_nonterm(net: TPN, m: TimedMarking, settings: Settings | None = None) -> bool:
    """Whether some run from ``m`` fires infinitely many transitions."""
    result = check_bounded(net, m, settings)
    if isinstance(result, Unbounded):
        return True
    graph = region_graph(result.tree)
    component = {n: i for i, scc in enumerate(nx.strongly_connected_components(graph)) for n in scc}
    for u, v, data in graph.edges(data=True):
        if data["discrete"] and component[u] == component[v]:
            logger.debug("discrete cycle through tree node %d", u)
            return True
    return False
