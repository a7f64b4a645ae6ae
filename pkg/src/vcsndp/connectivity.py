"""Vertex, element and edge connectivity as unit capacity max flows.

All three share one directed gadget.  Every undirected edge becomes two unit arcs.  A split vertex x becomes
(x, "in") -> (x, "out") with capacity 1, so at most one path passes through it.  Unsplit vertices pass any number of
paths.  The endpoints u and v are never split.
"""
import logging
from typing import AbstractSet, Iterable, Optional

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from .instance import SndpInstance

logger = logging.getLogger(__name__)


def _head(x: int):
    return (x, "in")


def _tail(x: int, split: AbstractSet[int]):
    return (x, "out") if x in split else (x, "in")


def flow_gadget(instance: SndpInstance, edge_subset: Iterable[int], split: AbstractSet[int]) -> nx.DiGraph:
    """The directed unit capacity network for the given edges and split vertices."""
    graph = nx.DiGraph()
    graph.add_nodes_from((x, "in") for x in range(instance.vertex_count))
    for x in split:
        graph.add_edge((x, "in"), (x, "out"), capacity=1)
    for idx in edge_subset:
        edge = instance.edges[idx]
        graph.add_edge(_tail(edge.u, split), _head(edge.v), capacity=1)
        graph.add_edge(_tail(edge.v, split), _head(edge.u), capacity=1)
    return graph


def _check_pair(instance: SndpInstance, u: int, v: int):
    for x in (u, v):
        if not 0 <= x < instance.vertex_count:
            raise ValueError(f"Unknown vertex {x}")
    if u == v:
        raise ValueError(f"Connectivity needs two distinct vertices, got {u} twice")


# pylint: disable=too-many-arguments
def _flow(instance: SndpInstance, edge_subset: Iterable[int], split: AbstractSet[int], u: int, v: int,
          cutoff: Optional[int]) -> int:
    graph = flow_gadget(instance, edge_subset, split)
    value = nx.maximum_flow_value(graph, (u, "in"), (v, "in"), flow_func=edmonds_karp, cutoff=cutoff)
    value = int(value)
    return value if cutoff is None else min(value, cutoff)


def vertex_connectivity(instance: SndpInstance, edge_subset: Iterable[int], u: int, v: int,
                        cutoff: Optional[int] = None) -> int:
    """The number of internally vertex disjoint u-v paths using only edge_subset.

    With cutoff, the search stops once that many paths are found and the result is capped at cutoff.
    """
    _check_pair(instance, u, v)
    split = set(range(instance.vertex_count)) - {u, v}
    return _flow(instance, edge_subset, split, u, v, cutoff)


# pylint: disable=too-many-arguments
def element_connectivity(instance: SndpInstance, edge_subset: Iterable[int], terminal_set: AbstractSet[int], u: int,
                         v: int, cutoff: Optional[int] = None) -> int:
    """The number of u-v paths sharing no edge and no non-terminal vertex.  Terminals may be shared."""
    _check_pair(instance, u, v)
    if u not in terminal_set or v not in terminal_set:
        raise ValueError(f"Element connectivity is defined between terminals; {u} or {v} is not one")
    split = set(range(instance.vertex_count)) - set(terminal_set)
    return _flow(instance, edge_subset, split, u, v, cutoff)


def edge_connectivity(instance: SndpInstance, edge_subset: Iterable[int], u: int, v: int,
                      cutoff: Optional[int] = None) -> int:
    """The number of edge disjoint u-v paths using only edge_subset."""
    _check_pair(instance, u, v)
    return _flow(instance, edge_subset, frozenset(), u, v, cutoff)
