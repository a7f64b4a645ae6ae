"""Subsolvers for element connectivity subinstances, and an exact oracle for whole vertex connectivity instances.

Any subsolver returning a feasible edge set keeps the union feasible.  The exact subsolver and the oracle share one
best-first search over edge subsets; reverse delete is a polynomial heuristic with no cost guarantee.
"""
import heapq
import itertools
import logging
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Optional, Protocol, Sequence, Tuple

from .connectivity import element_connectivity, vertex_connectivity
from .instance import Pair, SndpInstance, Subinstance

logger = logging.getLogger(__name__)

DEFAULT_EDGE_CAP = 22


class InfeasibleError(RuntimeError):
    """Even the whole graph cannot meet a requirement."""

    def __init__(self, requirement: Pair, required: int, achieved: int, subset_index: Optional[Tuple[int, int]] = None):
        where = "" if subset_index is None else f" in subinstance {subset_index}"
        super().__init__(f"Requirement r{requirement}={required} cannot be met{where}: the full graph gives "
                         f"{achieved}")
        self.requirement = requirement
        self.required = required
        self.achieved = achieved
        self.subset_index = subset_index


class ElementSubsolver(Protocol):
    """Returns an edge set of sub.parent meeting every induced element connectivity requirement of sub."""
    name: str

    def __call__(self, sub: Subinstance) -> FrozenSet[int]:
        ...


def _element_check(sub: Subinstance) -> Callable[[FrozenSet[int]], Optional[Tuple[Pair, int, int]]]:
    """A function returning the first unmet (pair, required, achieved) for an edge set, or None."""
    requirements = sub.positive_requirements()

    def first_failure(edges: FrozenSet[int]):
        for (u, v), req in requirements:
            got = element_connectivity(sub.parent, edges, sub.terminal_set, u, v, cutoff=req)
            if got < req:
                return (u, v), req, got
        return None

    return first_failure


def _vertex_check(instance: SndpInstance) -> Callable[[FrozenSet[int]], Optional[Tuple[Pair, int, int]]]:
    requirements = instance.positive_requirements()

    def first_failure(edges: FrozenSet[int]):
        for (u, v), req in requirements:
            got = vertex_connectivity(instance, edges, u, v, cutoff=req)
            if got < req:
                return (u, v), req, got
        return None

    return first_failure


def min_cost_edge_subset(costs: Sequence[Fraction], feasible: Callable[[FrozenSet[int]], bool]
                         ) -> Optional[FrozenSet[int]]:
    """The cheapest edge set accepted by feasible, which must be monotone under adding edges.

    Best-first search over partial decisions.  Edges are decided most expensive first (ties by index).  A node is
    dropped when even taking every undecided edge is infeasible, and the first popped node whose chosen edges are
    feasible is optimal.  Returns None when all edges together are infeasible.
    """
    memo: Dict[FrozenSet[int], bool] = {}

    def check(edges: FrozenSet[int]) -> bool:
        if edges not in memo:
            memo[edges] = feasible(edges)
        return memo[edges]

    order = sorted(range(len(costs)), key=lambda idx: (-costs[idx], idx))
    if not check(frozenset(order)):
        return None

    counter = itertools.count()
    heap = [(Fraction(0), next(counter), 0, frozenset())]
    while heap:
        cost, _, depth, chosen = heapq.heappop(heap)
        if check(chosen):
            logger.debug("Best-first search settled at cost %s after %s feasibility checks", cost, len(memo))
            return chosen
        if depth == len(order):
            continue
        if not check(chosen | frozenset(order[depth:])):
            continue
        edge = order[depth]
        heapq.heappush(heap, (cost + costs[edge], next(counter), depth + 1, chosen | {edge}))
        heapq.heappush(heap, (cost, next(counter), depth + 1, chosen))
    return None


def _check_cap(edge_count: int, edge_cap: int):
    if edge_count > edge_cap:
        raise ValueError(f"The exact search is limited to {edge_cap} edges, the graph has {edge_count}.  "
                         f"Use the reverse-delete subsolver instead.")


def exact_subsolver(sub: Subinstance, edge_cap: int = DEFAULT_EDGE_CAP) -> FrozenSet[int]:
    """A minimum cost edge set meeting every induced element connectivity requirement.

    Raises:
        ValueError: the graph has more than edge_cap edges.
        InfeasibleError: not even the full graph meets some requirement.
    """
    if not sub.positive_requirements():
        return frozenset()
    parent = sub.parent
    _check_cap(len(parent.edges), edge_cap)
    first_failure = _element_check(sub)
    best = min_cost_edge_subset([e.cost for e in parent.edges], lambda edges: first_failure(edges) is None)
    if best is None:
        pair, req, got = first_failure(parent.all_edges())
        raise InfeasibleError(pair, req, got, subset_index=sub.subset_index)
    return best


def reverse_delete_subsolver(sub: Subinstance) -> FrozenSet[int]:
    """Start from every edge and drop edges, most expensive first, while all requirements still hold.

    The result is feasible and inclusion-minimal.

    Raises:
        InfeasibleError: not even the full graph meets some requirement.
    """
    if not sub.positive_requirements():
        return frozenset()
    parent = sub.parent
    first_failure = _element_check(sub)
    kept = set(parent.all_edges())
    failure = first_failure(frozenset(kept))
    if failure is not None:
        raise InfeasibleError(*failure, subset_index=sub.subset_index)

    for idx in sorted(kept, key=lambda i: (-parent.edges[i].cost, i)):
        trial = frozenset(kept - {idx})
        if first_failure(trial) is None:
            kept.discard(idx)
    return frozenset(kept)


class ExactSubsolver:
    """exact_subsolver bound to an edge cap."""
    name = "exact"

    def __init__(self, edge_cap: int = DEFAULT_EDGE_CAP):
        self.edge_cap = edge_cap

    def __call__(self, sub: Subinstance) -> FrozenSet[int]:
        return exact_subsolver(sub, edge_cap=self.edge_cap)


class ReverseDeleteSubsolver:
    """reverse_delete_subsolver as a named subsolver."""
    name = "reverse-delete"

    def __call__(self, sub: Subinstance) -> FrozenSet[int]:
        return reverse_delete_subsolver(sub)


def make_subsolver(name: str, edge_cap: int = DEFAULT_EDGE_CAP) -> ElementSubsolver:
    """Look up a subsolver by its CLI name."""
    if name == "exact":
        return ExactSubsolver(edge_cap=edge_cap)
    if name == "reverse-delete":
        return ReverseDeleteSubsolver()
    raise ValueError(f"Unsupported subsolver '{name}'.  Options are 'exact' or 'reverse-delete'.")


def exact_vcsndp_oracle(instance: SndpInstance, edge_cap: int = DEFAULT_EDGE_CAP) -> Tuple[FrozenSet[int], Fraction]:
    """The optimum edge set and cost of a whole vertex connectivity instance.

    Raises:
        ValueError: the graph has more than edge_cap edges.
        InfeasibleError: not even the full graph meets some requirement.
    """
    if not instance.positive_requirements():
        return frozenset(), Fraction(0)
    _check_cap(len(instance.edges), edge_cap)
    first_failure = _vertex_check(instance)
    best = min_cost_edge_subset([e.cost for e in instance.edges], lambda edges: first_failure(edges) is None)
    if best is None:
        raise InfeasibleError(*first_failure(instance.all_edges()))
    return best, instance.cost_of(best)


def minimality_witnesses(sub: Subinstance, edges: FrozenSet[int]) -> List[int]:
    """Edges of a feasible set that could be dropped without breaking sub.  Empty for an inclusion-minimal set."""
    first_failure = _element_check(sub)
    return [idx for idx in sorted(edges) if first_failure(edges - {idx}) is None]
