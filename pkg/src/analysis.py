"""Dependency-graph analysis: well-definedness, memory bounds and evaluation order."""

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from src.exceptions import IllDefinedSpecification
from src.logger import app_logger
from src.syntax import Specification, free_streams

# Exact zero-walk search gives up beyond this many (node, weight) states
_ZERO_WALK_STATE_LIMIT = 200_000


@dataclass(frozen=True)
class Edge:
    """``source`` reads ``target`` at offset ``weight``."""
    source: str
    target: str
    weight: int

    def __str__(self) -> str:
        return f"{self.source} -[{self.weight}]-> {self.target}"


@dataclass(frozen=True)
class ZeroCycle:
    """Witness closed path of total weight zero."""
    edges: Tuple[Edge, ...]

    @property
    def weight(self) -> int:
        return sum(e.weight for e in self.edges)

    def __str__(self) -> str:
        return ", ".join(str(e) for e in self.edges)


class DependencyGraph:
    """Weighted multigraph over stream names; one edge per distinct (source, target, weight)."""

    def __init__(self, names: Sequence[str], inputs: Iterable[str] = (), edges: Iterable[Edge] = ()):
        input_names = set(inputs)
        self.graph = nx.MultiDiGraph()
        for position, name in enumerate(names):
            self.graph.add_node(name, order=position, is_input=name in input_names)
        for edge in edges:
            self.add_edge(edge)

    def add_edge(self, edge: Edge) -> None:
        for name in (edge.source, edge.target):
            if name not in self.graph:
                self.graph.add_node(name, order=self.graph.number_of_nodes(), is_input=False)
        self.graph.add_edge(edge.source, edge.target, key=edge.weight, weight=edge.weight)

    def copy(self) -> "DependencyGraph":
        clone = DependencyGraph([])
        clone.graph = self.graph.copy()
        return clone

    def order(self, name: str) -> int:
        return self.graph.nodes[name]["order"]

    def is_input(self, name: str) -> bool:
        return self.graph.nodes[name]["is_input"]

    @property
    def nodes(self) -> List[str]:
        return sorted(self.graph.nodes, key=self.order)

    def edges(self) -> List[Edge]:
        found = [Edge(u, v, w) for u, v, w in self.graph.edges(keys=True)]
        return sorted(found, key=lambda e: (self.order(e.source), self.order(e.target), e.weight))

    def weights(self) -> List[int]:
        return [w for _, _, w in self.graph.edges(keys=True)]

    def collapsed(self, nodes: Iterable[str], pick) -> nx.DiGraph:
        """Simple digraph on ``nodes`` keeping ``pick`` (min or max) of parallel weights."""
        keep = set(nodes)
        simple = nx.DiGraph()
        simple.add_nodes_from(keep)
        for u, v, w in self.graph.edges(keys=True):
            if u in keep and v in keep:
                current = simple.edges[u, v]["weight"] if simple.has_edge(u, v) else None
                simple.add_edge(u, v, weight=w if current is None else pick(current, w))
        return simple

    def cyclic_components(self) -> List[List[str]]:
        """Strongly connected components that contain a cycle, in declaration order."""
        components = []
        for component in nx.strongly_connected_components(self.graph):
            members = sorted(component, key=self.order)
            if len(members) > 1 or self.graph.has_edge(members[0], members[0]):
                components.append(members)
        return sorted(components, key=lambda c: self.order(c[0]))

    def to_dot(self) -> str:
        lines = ["digraph dependencies {", "  rankdir=LR;"]
        for name in self.nodes:
            shape = "box" if self.is_input(name) else "ellipse"
            lines.append(f"  {json.dumps(name)} [shape={shape}];")
        for edge in self.edges():
            lines.append(f"  {json.dumps(edge.source)} -> {json.dumps(edge.target)} [label=\"{edge.weight}\"];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_graph(spec: Specification) -> DependencyGraph:
    """Offset dependencies of every output body, defaults included."""
    position = {name: i for i, name in enumerate(spec.names)}
    edges = sorted(
        {Edge(decl.name, stream, offset) for decl in spec.outputs for stream, offset in free_streams(decl.body)},
        key=lambda e: (position[e.source], position[e.target], e.weight),
    )
    return DependencyGraph(spec.names, [d.name for d in spec.inputs], edges)


# Cycle searches

def _negative_cycle(g: DependencyGraph, simple: nx.DiGraph, cost: Callable[[int], int]) -> Optional[List[Edge]]:
    """A simple cycle of negative total ``cost``, recovered from Bellman-Ford predecessors.

    Every node starts at distance zero, as if reached from a virtual source. An
    update in the last of n rounds proves a negative cycle, and walking n
    predecessor steps back from the updated node lands on it.
    """
    arcs = sorted(
        ((u, v, data["weight"]) for u, v, data in simple.edges(data=True)),
        key=lambda arc: (g.order(arc[0]), g.order(arc[1])),
    )
    for u, v, w in arcs:
        if u == v and cost(w) < 0:
            return [Edge(u, v, w)]
    distance = {name: 0 for name in simple.nodes}
    parent: Dict[str, str] = {}
    updated: Optional[str] = None
    for _ in range(simple.number_of_nodes()):
        updated = None
        for u, v, w in arcs:
            if distance[u] + cost(w) < distance[v]:
                distance[v] = distance[u] + cost(w)
                parent[v] = u
                updated = v
        if updated is None:
            return None
    node = updated
    for _ in range(simple.number_of_nodes()):
        node = parent[node]
    nodes = [node]
    current = parent[node]
    while current != node:
        nodes.append(current)
        current = parent[current]
    nodes.reverse()
    closed = nodes + nodes[:1]
    return [Edge(u, v, simple.edges[u, v]["weight"]) for u, v in zip(closed, closed[1:])]


def _rotate(g: DependencyGraph, edges: List[Edge]) -> Tuple[Edge, ...]:
    start = min(range(len(edges)), key=lambda i: g.order(edges[i].source))
    return tuple(edges[start:] + edges[:start])


def _signed_cycle(g: DependencyGraph, component: List[str], sign: int) -> Optional[List[Edge]]:
    """A cycle of weight <= 0 (sign -1) or >= 0 (sign +1) inside ``component``.

    Scaling by (n + 1) and subtracting one per edge turns "weight <= 0" into a
    strictly negative cycle, which Bellman-Ford finds exactly.
    """
    simple = g.collapsed(component, min if sign < 0 else max)
    scale = len(component) + 1
    return _negative_cycle(g, simple, lambda w: -sign * w * scale - 1)


def _zero_walk(g: DependencyGraph, component: List[str]) -> Optional[List[Edge]]:
    """Breadth-first search for a closed walk of weight exactly zero."""
    members = set(component)
    outgoing: Dict[str, List[Tuple[str, int]]] = {name: [] for name in component}
    for u, v, w in g.graph.edges(keys=True):
        if u in members and v in members:
            outgoing[u].append((v, w))
    largest = max((abs(w) for edges in outgoing.values() for _, w in edges), default=1) or 1
    bound = 2 * len(component) * len(component) * largest
    start = (component[0], 0)
    parents: Dict[Tuple[str, int], Tuple[Tuple[str, int], Edge]] = {}
    queue = deque([start])
    while queue and len(parents) < _ZERO_WALK_STATE_LIMIT:
        node, total = state = queue.popleft()
        for target, weight in outgoing[node]:
            successor = (target, total + weight)
            edge = Edge(node, target, weight)
            if successor == start:
                walk = [edge]
                while state != start:
                    state, step = parents[state]
                    walk.append(step)
                return list(reversed(walk))
            if abs(successor[1]) <= bound and successor not in parents:
                parents[successor] = (state, edge)
                queue.append(successor)
    return None


def check_well_defined(g: DependencyGraph) -> Optional[ZeroCycle]:
    """None when no closed path of weight zero exists, else a witness.

    A component has a zero-weight closed path exactly when it holds a cycle of
    weight <= 0 and a cycle of weight >= 0: a zero simple cycle, or cycles of
    both signs whose repetitions cancel out.
    """
    for component in g.cyclic_components():
        nonpositive = _signed_cycle(g, component, -1)
        if nonpositive is None:
            continue
        nonnegative = _signed_cycle(g, component, +1)
        if nonnegative is None:
            continue
        for cycle in (nonpositive, nonnegative):
            if sum(e.weight for e in cycle) == 0:
                return ZeroCycle(_rotate(g, cycle))
        walk = _zero_walk(g, component)
        if walk is not None:
            return ZeroCycle(tuple(walk))
        app_logger.debug(f"no exact zero walk found in {component}; reporting both signed cycles")
        return ZeroCycle(_rotate(g, nonpositive) + _rotate(g, nonnegative))
    return None


def positive_cycle(g: DependencyGraph) -> Optional[Tuple[Edge, ...]]:
    """A cycle of strictly positive weight, if any."""
    for component in g.cyclic_components():
        cycle = _negative_cycle(g, g.collapsed(component, max), lambda w: -w)
        if cycle is not None:
            return _rotate(g, cycle)
    return None


def efficiently_monitorable(g: DependencyGraph) -> bool:
    return positive_cycle(g) is None


def memory_bounds(g: DependencyGraph) -> Tuple[int, int]:
    """(min_back_ref, max_latency) over edge weights, clamped at zero."""
    weights = g.weights()
    return min([0] + weights), max([0] + weights)


def zero_order(g: DependencyGraph) -> List[str]:
    """Inputs first, then outputs so that offset-0 dependencies come first."""
    zero = nx.DiGraph()
    zero.add_nodes_from(g.graph.nodes)
    for edge in g.edges():
        if edge.weight == 0:
            zero.add_edge(edge.target, edge.source)
    try:
        return list(nx.lexicographical_topological_sort(
            zero, key=lambda name: (0 if g.is_input(name) else 1, g.order(name))))
    except nx.NetworkXUnfeasible:
        raise IllDefinedSpecification("offset-0 dependencies form a cycle")


def lookahead_bound(g: DependencyGraph) -> int:
    """Heaviest path weight, clamped at zero; needs the absence of positive cycles."""
    root = object()
    longest = g.collapsed(g.graph.nodes, max)
    for u, v, data in longest.edges(data=True):
        data["cost"] = -data["weight"]
    longest.add_edges_from(((root, name) for name in g.graph.nodes), cost=0)
    distances = nx.single_source_bellman_ford_path_length(longest, root, weight="cost")
    return max([0] + [-d for d in distances.values()])


@dataclass
class AnalysisResult:
    """Everything the engine needs to know about a specification's graph."""
    graph: DependencyGraph
    min_back_ref: int
    max_latency: int
    zero_order: List[str] = field(default_factory=list)
    efficiently_monitorable: bool = True
    zero_cycle: Optional[ZeroCycle] = None
    positive_cycle: Optional[Tuple[Edge, ...]] = None
    lookahead_bound: Optional[int] = None

    @property
    def well_defined(self) -> bool:
        return self.zero_cycle is None

    @property
    def window(self) -> int:
        return self.max_latency - self.min_back_ref

    def describe(self) -> List[str]:
        """Human-readable report lines."""
        lines = ["streams:"]
        lines += [f"  {name}{' (input)' if self.graph.is_input(name) else ''}" for name in self.graph.nodes]
        lines.append("edges:")
        lines += [f"  {edge}" for edge in self.graph.edges()]
        lines.append(f"minBackRef: {self.min_back_ref}")
        lines.append(f"maxLatency: {self.max_latency}")
        lines.append(f"well-defined: {'yes' if self.well_defined else 'no'}")
        if self.zero_cycle is not None:
            lines.append(f"zero-weight cycle: {self.zero_cycle}")
        lines.append(f"efficiently monitorable: {'yes' if self.efficiently_monitorable else 'no'}")
        if self.positive_cycle is not None:
            lines.append(f"positive cycle: {', '.join(str(e) for e in self.positive_cycle)}")
        if self.zero_order:
            lines.append(f"evaluation order: {', '.join(self.zero_order)}")
        return lines

    def to_dict(self) -> Dict[str, object]:
        return {
            "streams": self.graph.nodes,
            "edges": [[e.source, e.target, e.weight] for e in self.graph.edges()],
            "min_back_ref": self.min_back_ref,
            "max_latency": self.max_latency,
            "well_defined": self.well_defined,
            "efficiently_monitorable": self.efficiently_monitorable,
            "zero_order": self.zero_order,
        }


def analyze(spec: Specification) -> AnalysisResult:
    """Run every analysis over ``spec``."""
    graph = build_graph(spec)
    low, high = memory_bounds(graph)
    result = AnalysisResult(graph=graph, min_back_ref=low, max_latency=high)
    result.zero_cycle = check_well_defined(graph)
    result.positive_cycle = positive_cycle(graph)
    result.efficiently_monitorable = result.positive_cycle is None
    if result.well_defined:
        result.zero_order = zero_order(graph)
        if result.efficiently_monitorable:
            result.lookahead_bound = lookahead_bound(graph)
    app_logger.info(
        f"analysis: {len(graph.nodes)} streams, {len(graph.edges())} edges, "
        f"window {result.window}, well-defined={result.well_defined}, "
        f"efficiently monitorable={result.efficiently_monitorable}"
    )
    return result
