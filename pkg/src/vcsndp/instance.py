"""Network design instances and the element connectivity subinstances carved out of them."""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from .labels import Variant

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class Edge:
    """An undirected edge with a non-negative cost."""
    u: int
    v: int
    cost: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "cost", Fraction(self.cost))
        if self.u == self.v:
            raise ValueError(f"Self loop at vertex {self.u}")
        if self.cost < 0:
            raise ValueError(f"Edge ({self.u}, {self.v}) has negative cost {self.cost}")

    @property
    def key(self) -> Pair:
        """The unordered endpoint pair."""
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class SndpInstance:
    """An undirected graph with edge costs, terminals and connectivity requirements.

    Requirement keys are (min, max) terminal pairs for the general variant and (source, terminal) for the
    single-source variant.  Edges are addressed by their position in edges.
    """
    vertex_count: int
    edges: Tuple[Edge, ...]
    terminals: Tuple[int, ...]
    requirements: Dict[Pair, int]
    k: int
    variant: Variant = Variant.GENERAL
    source: Optional[int] = None
    _endpoints: Dict[Pair, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "terminals", tuple(self.terminals))
        if self.vertex_count < 1:
            raise ValueError("An instance needs at least one vertex")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")

        endpoints = {}
        for idx, edge in enumerate(self.edges):
            self._check_vertex(edge.u)
            self._check_vertex(edge.v)
            if edge.key in endpoints:
                raise ValueError(f"Duplicate edge {edge.key} at positions {endpoints[edge.key]} and {idx}")
            endpoints[edge.key] = idx
        object.__setattr__(self, "_endpoints", endpoints)

        for t in self.terminals:
            self._check_vertex(t)
        if len(set(self.terminals)) != len(self.terminals):
            raise ValueError("Terminals must be distinct")

        if self.variant is Variant.SINGLE_SOURCE:
            if self.source is None:
                raise ValueError("A single-source instance needs a source vertex")
            self._check_vertex(self.source)
            if self.source in self.terminals:
                raise ValueError(f"Source {self.source} must not also be listed as a terminal")
        elif self.source is not None:
            raise ValueError("Only single-source instances have a source vertex")

        requirements = {}
        for pair, req in self.requirements.items():
            key = self._normalize(pair)
            if key in requirements:
                raise ValueError(f"Requirement {key} is given more than once")
            requirements[key] = req
        object.__setattr__(self, "requirements", requirements)
        for pair, req in self.requirements.items():
            if not 0 <= req <= self.k:
                raise ValueError(f"Requirement r{pair}={req} is outside 0..{self.k}")

    def _check_vertex(self, x: int):
        if not 0 <= x < self.vertex_count:
            raise ValueError(f"Vertex {x} is outside 0..{self.vertex_count - 1}")

    def _normalize(self, pair: Pair) -> Pair:
        u, v = pair
        terminals = set(self.terminals)
        if self.variant is Variant.SINGLE_SOURCE:
            t = v if u == self.source else u
            if self.source not in (u, v) or t not in terminals:
                raise ValueError(f"Requirement {pair} must join the source {self.source} to a terminal")
            return self.source, t
        if u == v:
            raise ValueError(f"Requirement {pair} joins a vertex to itself")
        if u not in terminals or v not in terminals:
            raise ValueError(f"Requirement {pair} involves a non-terminal vertex")
        return (u, v) if u < v else (v, u)

    def requirement(self, u: int, v: int) -> int:
        """r(u, v), or 0 when none was given."""
        try:
            return self.requirements.get(self._normalize((u, v)), 0)
        except ValueError:
            return 0

    def positive_requirements(self) -> List[Tuple[Pair, int]]:
        """All requirements above zero, ordered by pair."""
        return sorted((pair, req) for pair, req in self.requirements.items() if req > 0)

    def edge_index(self, u: int, v: int) -> Optional[int]:
        """Position of the edge joining u and v, if any."""
        return self._endpoints.get((u, v) if u < v else (v, u))

    def all_edges(self) -> FrozenSet[int]:
        """Every edge index."""
        return frozenset(range(len(self.edges)))

    def cost_of(self, edge_ids: Iterable[int]) -> Fraction:
        """Total cost of a set of edges, each counted once."""
        return sum((self.edges[idx].cost for idx in set(edge_ids)), Fraction(0))

    def restricted_to(self, edge_ids: Iterable[int]) -> "SndpInstance":
        """The same instance with only the given edges.  Edge i of the result is the i-th smallest given id."""
        kept = sorted(set(edge_ids))
        return SndpInstance(vertex_count=self.vertex_count, edges=tuple(self.edges[idx] for idx in kept),
                            terminals=self.terminals, requirements=dict(self.requirements), k=self.k,
                            variant=self.variant, source=self.source)


@dataclass(frozen=True)
class Subinstance:
    """One element connectivity problem: the whole graph with a subset of the terminals.

    terminal_subset holds the terminals T_i taken from one family subset.  terminal_set is what element connectivity
    treats as terminals: T_i itself, or T_i plus the source in the single-source variant.  subset_indices lists every
    family subset (j, c) that produced this same terminal subset.
    """
    parent: SndpInstance
    subset_index: Tuple[int, int]
    terminal_subset: FrozenSet[int]
    terminal_set: FrozenSet[int]
    induced_requirements: Dict[Pair, int]
    subset_indices: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not self.subset_indices:
            object.__setattr__(self, "subset_indices", (self.subset_index,))
        for pair, req in self.induced_requirements.items():
            if self.parent.requirements.get(pair) != req:
                raise ValueError(f"Requirement r{pair}={req} is not a requirement of the parent instance")
            if not set(pair) <= self.terminal_set:
                raise ValueError(f"Requirement {pair} leaves the subinstance terminal set")

    def positive_requirements(self) -> List[Tuple[Pair, int]]:
        """Induced requirements above zero, ordered by pair."""
        return sorted((pair, req) for pair, req in self.induced_requirements.items() if req > 0)


def as_instance_edges(edges: Iterable[Union[Edge, Tuple[int, int], Tuple[int, int, Union[int, str, Fraction]]]]
                      ) -> Tuple[Edge, ...]:
    """Accept Edge objects, (u, v) pairs with unit cost, or (u, v, cost) triples."""
    out = []
    for edge in edges:
        if isinstance(edge, Edge):
            out.append(edge)
        elif len(edge) == 2:
            out.append(Edge(edge[0], edge[1]))
        else:
            out.append(Edge(edge[0], edge[1], Fraction(edge[2])))
    return tuple(out)
