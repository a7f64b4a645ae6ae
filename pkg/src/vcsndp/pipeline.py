"""Solve vertex connectivity network design by way of element connectivity subinstances.

Every nonempty subset of a good family picks out a terminal subset T_i.  Each T_i with the requirements it induces is
solved as an element connectivity problem on the whole graph, and the union of the edge sets is returned after its
vertex connectivity has been verified pair by pair.
"""
import logging
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from . import app_config as cfg
from .connectivity import vertex_connectivity
from .instance import Pair, SndpInstance, Subinstance
from .labels import GoodFamily, Variant, subsets_from_labels
from .subsolvers import DEFAULT_EDGE_CAP, ElementSubsolver, InfeasibleError, make_subsolver
from .verifier import verify_strong_goodness

logger = logging.getLogger(__name__)


class VerificationError(RuntimeError):
    """The union of the subinstance solutions misses some vertex connectivity requirement."""

    def __init__(self, failures: List[Tuple[Pair, int, int]]):
        listed = ", ".join(f"r{pair}={req} got {got}" for pair, req, got in failures)
        super().__init__(f"Solution fails {len(failures)} requirement(s): {listed}")
        self.failures = failures


@dataclass(frozen=True)
class PipelineConfig:
    """How subinstances are solved.  Defaults match cfg.yaml."""
    subsolver: str = "exact"
    exact_edge_cap: int = DEFAULT_EDGE_CAP
    workers: int = 1

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_app_config(cls, **overrides) -> "PipelineConfig":
        """Read the 'pipeline' section of the application configuration."""
        section = cfg.get_parameter('pipeline') or {}
        values = {name: section[name] for name in ("subsolver", "exact_edge_cap", "workers")
                  if section.get(name) is not None}
        values.update(overrides)
        return cls(**values)

    def make_subsolver(self) -> ElementSubsolver:
        """The configured subsolver."""
        return make_subsolver(self.subsolver, edge_cap=self.exact_edge_cap)


@dataclass(frozen=True)
class SubinstanceResult:
    """The edges one subsolver call chose."""
    subset_index: Tuple[int, int]
    subset_indices: Tuple[Tuple[int, int], ...]
    terminal_subset: FrozenSet[int]
    edges: FrozenSet[int]
    cost: Fraction


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class SolutionReport:
    """The union of all subinstance solutions and the verified connectivity of every requirement."""
    chosen_edges: FrozenSet[int]
    total_cost: Fraction
    per_subinstance: Tuple[SubinstanceResult, ...]
    feasibility: Dict[Pair, int]
    nonempty_subsets: int
    unique_subinstances: int
    subsolver: str

    def summary(self) -> dict:
        """Plain types only, ready for YAML."""
        return {
            "subsolver": self.subsolver,
            "total_cost": str(self.total_cost),
            "chosen_edges": sorted(self.chosen_edges),
            "nonempty_subsets": self.nonempty_subsets,
            "unique_subinstances": self.unique_subinstances,
            "feasibility": [{"u": u, "v": v, "verified": got} for (u, v), got in sorted(self.feasibility.items())],
            "per_subinstance": [{"subset_index": list(res.subset_index),
                                 "duplicates": len(res.subset_indices) - 1,
                                 "terminals": sorted(res.terminal_subset),
                                 "edges": sorted(res.edges),
                                 "cost": str(res.cost)} for res in self.per_subinstance],
        }


def build_subinstances(instance: SndpInstance, fam: GoodFamily) -> Tuple[List[Subinstance], int]:
    """One subinstance per distinct nonempty terminal subset, in subset order, and the count of nonempty subsets.

    Label i belongs to instance.terminals[i].
    """
    params = fam.params
    if params.variant is not instance.variant:
        raise ValueError(f"A {params.variant.value} family cannot serve a {instance.variant.value} instance")
    if params.n != len(instance.terminals):
        raise ValueError(f"The family has {params.n} labels but the instance has {len(instance.terminals)} terminals")
    if params.k < instance.k:
        raise ValueError(f"The family was built for k={params.k} but the instance needs k={instance.k}")

    positive = instance.positive_requirements()
    first_seen: Dict[FrozenSet[int], int] = {}
    grouped: List[List] = []
    nonempty = 0
    for index, members in subsets_from_labels(fam):
        if not members:
            continue
        nonempty += 1
        subset = frozenset(instance.terminals[i] for i in members)
        if subset in first_seen:
            grouped[first_seen[subset]][1].append(index)
            continue
        first_seen[subset] = len(grouped)
        grouped.append([subset, [index]])

    subinstances = []
    for subset, indices in grouped:
        if instance.variant is Variant.SINGLE_SOURCE:
            terminal_set = subset | {instance.source}
            induced = {pair: req for pair, req in positive if pair[1] in subset}
        else:
            terminal_set = subset
            induced = {pair: req for pair, req in positive if pair[0] in subset and pair[1] in subset}
        subinstances.append(Subinstance(parent=instance, subset_index=indices[0], terminal_subset=subset,
                                        terminal_set=terminal_set, induced_requirements=induced,
                                        subset_indices=tuple(indices)))
    return subinstances, nonempty


class SubsolverThread(threading.Thread):
    """Solves a share of the subinstances.  Errors are recorded, not raised."""

    def __init__(self, *, exit_event: threading.Event, jobs: List[Tuple[int, Subinstance]],
                 subsolver: ElementSubsolver):
        """Create a thread that runs subsolver over jobs.

        Args:
            exit_event: Stop before the next job once this is set
            jobs: (position, subinstance) pairs to solve
            subsolver: Called once per subinstance
        """
        super().__init__()
        self.exit_event = exit_event
        self.jobs = jobs
        self.subsolver = subsolver
        self.results: Dict[int, FrozenSet[int]] = {}
        self.errors: List[Tuple[int, Exception]] = []

    def run(self):
        for position, sub in self.jobs:
            if self.exit_event.is_set():
                logger.info("Subsolver thread exiting early")
                break
            # Any failure is kept and re-raised by the coordinator in subset order.
            # pylint: disable=broad-exception-caught
            try:
                self.results[position] = frozenset(self.subsolver(sub))
            except Exception as exc:
                self.errors.append((position, exc))


def _run_subsolvers(subinstances: List[Subinstance], subsolver: ElementSubsolver, workers: int,
                    exit_event: threading.Event) -> List[FrozenSet[int]]:
    jobs = list(enumerate(subinstances))
    threads = [SubsolverThread(exit_event=exit_event, jobs=jobs[w::workers], subsolver=subsolver)
               for w in range(min(workers, max(len(jobs), 1)))]
    for thread in threads:
        thread.start()
    for thread in threads:
        # Join with a timeout so signal handlers still get a chance to run.
        while thread.is_alive():
            thread.join(timeout=0.1)

    errors = sorted((err for thread in threads for err in thread.errors), key=lambda item: item[0])
    if errors:
        raise errors[0][1]
    results = {}
    for thread in threads:
        results.update(thread.results)
    if len(results) != len(jobs):
        raise RuntimeError(f"Interrupted after {len(results)} of {len(jobs)} subinstances")
    return [results[position] for position in range(len(jobs))]


def _solve(instance: SndpInstance, fam: GoodFamily, subsolver: Optional[ElementSubsolver],
           config: Optional[PipelineConfig], exit_event: Optional[threading.Event]) -> SolutionReport:
    config = PipelineConfig() if config is None else config
    subsolver = config.make_subsolver() if subsolver is None else subsolver
    exit_event = threading.Event() if exit_event is None else exit_event

    params = fam.params
    if verify_strong_goodness(fam) or params.alpha <= instance.k * params.beta:
        logger.warning("Family (gamma=%s) is not certified strongly good for k=%s; the union may be infeasible",
                       params.gamma, instance.k)

    subinstances, nonempty = build_subinstances(instance, fam)
    edge_sets = _run_subsolvers(subinstances, subsolver, config.workers, exit_event)

    per_subinstance = tuple(SubinstanceResult(subset_index=sub.subset_index, subset_indices=sub.subset_indices,
                                              terminal_subset=sub.terminal_subset, edges=edges,
                                              cost=instance.cost_of(edges))
                            for sub, edges in zip(subinstances, edge_sets))
    chosen = frozenset().union(*edge_sets)

    feasibility = {}
    failures = []
    for (u, v), req in instance.positive_requirements():
        got = vertex_connectivity(instance, chosen, u, v)
        feasibility[(u, v)] = got
        if got < req:
            failures.append(((u, v), req, got))
    if failures:
        raise VerificationError(failures)

    report = SolutionReport(chosen_edges=chosen, total_cost=instance.cost_of(chosen),
                            per_subinstance=per_subinstance, feasibility=feasibility, nonempty_subsets=nonempty,
                            unique_subinstances=len(subinstances), subsolver=getattr(subsolver, "name", "custom"))
    logger.info("Solved %s instance: m=%s, %s unique subinstances, %s edges, cost %s", instance.variant.value,
                nonempty, len(subinstances), len(chosen), report.total_cost)
    return report


def solve_vcsndp(instance: SndpInstance, fam: GoodFamily, subsolver: Optional[ElementSubsolver] = None,
                 config: Optional[PipelineConfig] = None,
                 exit_event: Optional[threading.Event] = None) -> SolutionReport:
    """Solve a general vertex connectivity instance with a general good family over its terminals.

    Raises:
        InfeasibleError: some subinstance cannot be satisfied by the whole graph.
        VerificationError: the union misses a requirement, which means the family was not good.
    """
    if instance.variant is not Variant.GENERAL:
        raise ValueError("solve_vcsndp needs a general instance; use solve_single_source")
    return _solve(instance, fam, subsolver, config, exit_event)


def solve_single_source(instance: SndpInstance, fam: GoodFamily, subsolver: Optional[ElementSubsolver] = None,
                        config: Optional[PipelineConfig] = None,
                        exit_event: Optional[threading.Event] = None) -> SolutionReport:
    """Solve a single-source instance.  Each subinstance gets its terminals plus the source.

    Raises:
        InfeasibleError: some subinstance cannot be satisfied by the whole graph.
        VerificationError: the union misses a requirement.
    """
    if instance.variant is not Variant.SINGLE_SOURCE:
        raise ValueError("solve_single_source needs a single-source instance; use solve_vcsndp")
    return _solve(instance, fam, subsolver, config, exit_event)


__all__ = ["InfeasibleError", "PipelineConfig", "SolutionReport", "SubinstanceResult", "Subinstance",
           "SubsolverThread", "VerificationError", "build_subinstances", "solve_single_source", "solve_vcsndp"]
