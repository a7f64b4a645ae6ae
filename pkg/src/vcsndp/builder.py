"""Deterministic local search construction of strongly good families, plus a uniform random baseline.

Labels are appended one at a time.  Each new label starts from a seeded pseudo-random string that every run repeats,
then changes one character per step, always taking the move that lowers the potential the most, until the potential is
zero.  A zero potential means the new label keeps the whole family strongly good.
"""
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import app_config as cfg
from .labels import (FamilyParams, GoodFamily, Label, Variant, derive_params, escalate, seed_pair)
from .verifier import ViolationReport, find_strong_violations

logger = logging.getLogger(__name__)


class Stalled(RuntimeError):
    """No single character change lowers a positive potential."""

    def __init__(self, message: str, potential: "PotentialValue", iteration: Optional[int] = None):
        super().__init__(message)
        self.potential = potential
        self.iteration = iteration


class EscalationExhausted(RuntimeError):
    """Every allowed gamma escalation stalled."""


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class BuilderConfig:
    """Knobs for one construction run.  Defaults match cfg.yaml."""
    c_mult: int = 2
    zeta: float = 1.0
    max_escalations: int = 8
    escalation_factor: float = 1.5
    start_attempts: int = 8
    audit_every: int = 0
    record_trace: bool = False
    random_beta_budget: Optional[int] = None

    def __post_init__(self):
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be non-negative")
        if self.start_attempts < 1:
            raise ValueError("start_attempts must be at least 1")
        if self.escalation_factor <= 1:
            raise ValueError("escalation_factor must be greater than 1")
        if self.audit_every < 0:
            raise ValueError("audit_every must be non-negative")

    @classmethod
    def from_app_config(cls, **overrides) -> "BuilderConfig":
        """Read the 'builder' section of the application configuration.  Missing keys keep their defaults."""
        section = cfg.get_parameter('builder') or {}
        values = {name: section[name] for name in ("c_mult", "zeta", "max_escalations", "escalation_factor",
                                                   "start_attempts", "audit_every", "random_beta_budget")
                  if section.get(name) is not None}
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class PotentialValue:
    """The local search potential of a candidate label.

    For the general variant pairwise_deficit sums max(0, alpha - |s_i . s|) over accepted labels and triple_excess
    sums max(0, |s_i . s_j . s| - beta) over accepted pairs.  For the single-source variant pairwise_deficit is always
    zero and triple_excess holds the only term, max(0, |s_i . s| - beta) summed over accepted labels.
    """
    pairwise_deficit: int
    triple_excess: int

    @property
    def total(self) -> int:
        """The potential itself."""
        return self.pairwise_deficit + self.triple_excess


@dataclass(frozen=True)
class MoveDelta:
    """Set position to new_char; delta is the resulting change of the potential."""
    position: int
    new_char: int
    delta: int


def potential_bound(params: FamilyParams) -> int:
    """n * alpha + C(n, 2) * beta, the step budget for one general iteration."""
    n = params.n
    return n * params.alpha + n * (n - 1) // 2 * params.beta


def _as_matrix(accepted: Union[Sequence[Sequence[int]], np.ndarray], gamma: int) -> np.ndarray:
    if isinstance(accepted, np.ndarray):
        return accepted.reshape(-1, gamma)
    return np.array([tuple(lab) for lab in accepted], dtype=np.int16).reshape(len(accepted), gamma)


def potential(s: Sequence[int], accepted: Union[Sequence[Sequence[int]], np.ndarray],
              params: FamilyParams) -> PotentialValue:
    """Evaluate the potential of s against the accepted labels from scratch."""
    label = np.asarray(tuple(s), dtype=np.int16)
    matrix = _as_matrix(accepted, params.gamma)
    if label.shape[0] != params.gamma:
        raise ValueError(f"Label has length {label.shape[0]}, expected gamma={params.gamma}")
    if matrix.shape[0] == 0:
        return PotentialValue(0, 0)

    equal = matrix == label
    agree = equal.sum(axis=1)
    if params.variant is Variant.SINGLE_SOURCE:
        return PotentialValue(0, int(np.maximum(agree - params.beta, 0).sum()))

    deficit = int(np.maximum(params.alpha - agree, 0).sum())
    as_float = equal.astype(np.float32)
    # Both accepted labels equal s in a column iff all three agree there
    triples = np.rint(as_float @ as_float.T).astype(np.int64)
    upper = np.triu_indices(matrix.shape[0], 1)
    excess = int(np.maximum(triples[upper] - params.beta, 0).sum())
    return PotentialValue(deficit, excess)


class AgreementLedger:
    """Incremental bookkeeping for one working label against a fixed set of accepted labels.

    Tracks the agreement of every accepted label with the working label, the triple agreement of every accepted pair
    with it (general variant), and two (gamma, |A|) tables giving the potential change caused by removing the
    character currently at column j, and by placing character c at column j.  The potential change of any single
    character move is then a table lookup, and applying a move only touches the labels and pairs that share the old
    or new character in that column.
    """

    _PAIR_CHUNK = 4096

    def __init__(self, accepted: Union[Sequence[Sequence[int]], np.ndarray], label: Sequence[int],
                 params: FamilyParams):
        self.params = params
        self._accepted = np.ascontiguousarray(_as_matrix(accepted, params.gamma), dtype=np.int64)
        self._label = np.array(tuple(label), dtype=np.int64)
        if self._label.shape[0] != params.gamma:
            raise ValueError(f"Label has length {self._label.shape[0]}, expected gamma={params.gamma}")
        self._cols = np.arange(params.gamma)
        # Flat (j, c) index of every accepted character
        self._flat = self._cols * params.alphabet.size + self._accepted
        self._general = params.variant is Variant.GENERAL
        self.rebuild()

    @property
    def label(self) -> Label:
        """The working label."""
        return Label(tuple(int(c) for c in self._label))

    @property
    def agreements(self) -> np.ndarray:
        """Agreement of every accepted label with the working label."""
        return self._agree.copy()

    @property
    def value(self) -> PotentialValue:
        """The potential of the working label."""
        return PotentialValue(self._deficit, self._excess)

    def rebuild(self):
        """Recompute every count from scratch."""
        params = self.params
        shape = (params.gamma, params.alphabet.size)
        rows = self._accepted.shape[0]
        equal = self._accepted == self._label
        self._agree = equal.sum(axis=1).astype(np.int64)
        self._remove = np.zeros(shape, dtype=np.int64)
        self._add = np.zeros(shape, dtype=np.int64)

        everyone = np.arange(rows)
        self._scatter_labels(self._add, everyone, self._label_add_weight(self._agree))
        self._scatter_labels(self._remove, everyone, self._label_remove_weight(self._agree))

        if self._general:
            self._deficit = int(np.maximum(params.alpha - self._agree, 0).sum())
            as_float = equal.astype(np.float32)
            self._triples = np.rint(as_float @ as_float.T).astype(np.int64)
            first, second = np.triu_indices(rows, 1)
            counts = self._triples[first, second]
            self._excess = int(np.maximum(counts - params.beta, 0).sum())
            self._scatter_pairs(self._add, first, second, self._pair_add_weight(counts))
            self._scatter_pairs(self._remove, first, second, self._pair_remove_weight(counts))
        else:
            self._deficit = 0
            self._excess = int(np.maximum(self._agree - params.beta, 0).sum())

    # Potential contributions.  A label or pair "gains" when the move puts the working character on its character.
    def _label_add_weight(self, agree: np.ndarray) -> np.ndarray:
        if self._general:
            return -(agree < self.params.alpha).astype(np.int64)
        return (agree >= self.params.beta).astype(np.int64)

    def _label_remove_weight(self, agree: np.ndarray) -> np.ndarray:
        if self._general:
            return (agree <= self.params.alpha).astype(np.int64)
        return -(agree > self.params.beta).astype(np.int64)

    def _pair_add_weight(self, counts: np.ndarray) -> np.ndarray:
        return (counts >= self.params.beta).astype(np.int64)

    def _pair_remove_weight(self, counts: np.ndarray) -> np.ndarray:
        return -(counts > self.params.beta).astype(np.int64)

    def _accumulate(self, target: np.ndarray, flat: np.ndarray, weights: np.ndarray):
        if flat.size == 0:
            return
        size = target.size
        target += np.rint(np.bincount(flat, weights=weights, minlength=size)).astype(np.int64).reshape(target.shape)

    def _scatter_labels(self, target: np.ndarray, rows: np.ndarray, weights: np.ndarray):
        """Add weights[t] at (j, accepted[rows[t], j]) for every column j."""
        keep = weights != 0
        rows, weights = rows[keep], weights[keep]
        if rows.size == 0:
            return
        flat = self._flat[rows].ravel()
        self._accumulate(target, flat, np.repeat(weights.astype(np.float64), self.params.gamma))

    def _scatter_pairs(self, target: np.ndarray, first: np.ndarray, second: np.ndarray, weights: np.ndarray):
        """Add weights[t] at (j, c) for every column j where both labels of pair t carry c."""
        keep = weights != 0
        first, second, weights = first[keep], second[keep], weights[keep]
        for start in range(0, first.size, self._PAIR_CHUNK):
            stop = start + self._PAIR_CHUNK
            p, q, w = first[start:stop], second[start:stop], weights[start:stop]
            same = self._accepted[p] == self._accepted[q]
            flat = self._flat[p][same]
            spread = np.broadcast_to(w.astype(np.float64)[:, None], same.shape)[same]
            self._accumulate(target, flat, spread)

    def move_deltas(self) -> np.ndarray:
        """(gamma, |A|) potential changes of every single character move.  Entries for the current characters are 0."""
        current = self._label
        deltas = self._remove[self._cols, current][:, None] + self._add
        deltas[self._cols, current] = 0
        return deltas

    def best_move(self) -> Optional[MoveDelta]:
        """The most improving move, ties going to the smallest (position, new_char).  None if nothing improves."""
        deltas = self.move_deltas()
        deltas[self._cols, self._label] = np.iinfo(np.int64).max
        flat = int(np.argmin(deltas))
        position, new_char = divmod(flat, self.params.alphabet.size)
        delta = int(deltas[position, new_char])
        if delta >= 0:
            return None
        return MoveDelta(position=position, new_char=new_char, delta=delta)

    def apply(self, move: MoveDelta):
        """Change the working label and update every count touched by the change."""
        column = move.position
        old, new = int(self._label[column]), int(move.new_char)
        if old == new:
            raise ValueError(f"Move at position {column} does not change the character")
        params = self.params
        losing = np.flatnonzero(self._accepted[:, column] == old)
        gaining = np.flatnonzero(self._accepted[:, column] == new)

        for rows, step in ((losing, -1), (gaining, 1)):
            if rows.size == 0:
                continue
            before = self._agree[rows]
            after = before + step
            self._agree[rows] = after
            if self._general:
                self._deficit += int(np.maximum(params.alpha - after, 0).sum()
                                     - np.maximum(params.alpha - before, 0).sum())
            else:
                self._excess += int(np.maximum(after - params.beta, 0).sum()
                                    - np.maximum(before - params.beta, 0).sum())
            self._scatter_labels(self._add, rows,
                                 self._label_add_weight(after) - self._label_add_weight(before))
            self._scatter_labels(self._remove, rows,
                                 self._label_remove_weight(after) - self._label_remove_weight(before))

            if self._general and rows.size > 1:
                i, j = np.triu_indices(rows.size, 1)
                first, second = rows[i], rows[j]
                before = self._triples[first, second]
                after = before + step
                self._triples[first, second] = after
                self._triples[second, first] = after
                self._excess += int(np.maximum(after - params.beta, 0).sum()
                                    - np.maximum(before - params.beta, 0).sum())
                self._scatter_pairs(self._add, first, second,
                                    self._pair_add_weight(after) - self._pair_add_weight(before))
                self._scatter_pairs(self._remove, first, second,
                                    self._pair_remove_weight(after) - self._pair_remove_weight(before))

        self._label[column] = new

    def consistent(self) -> bool:
        """Compare every count against a fresh rebuild."""
        fresh = AgreementLedger(self._accepted, self._label, self.params)
        same = (self.value == fresh.value
                and np.array_equal(self._agree, fresh._agree)
                and np.array_equal(self._add, fresh._add)
                and np.array_equal(self._remove, fresh._remove))
        if self._general and same:
            upper = np.triu_indices(self._accepted.shape[0], 1)
            same = np.array_equal(self._triples[upper], fresh._triples[upper])
        return bool(same)


def best_single_char_move(s: Sequence[int], ledger: AgreementLedger, params: FamilyParams) -> Optional[MoveDelta]:
    """The steepest single character move from s, or None if no move lowers the potential."""
    if tuple(s) != ledger.label.chars:
        raise ValueError("The ledger does not track the given label")
    if ledger.params != params:
        raise ValueError("The ledger was built for different parameters")
    return ledger.best_move()


@dataclass
class IterationStats:
    """What one appended label cost."""
    index: int
    steps: int
    initial_potential: int
    start_attempt: int = 0
    trace: List[int] = field(default_factory=list)


# pylint: disable=too-many-arguments
def _search(accepted: np.ndarray, params: FamilyParams, start: Sequence[int], audit_every: int = 0,
            record_trace: bool = False, index: Optional[int] = None) -> Tuple[Label, IterationStats]:
    """Steepest descent from start until the potential is zero."""
    ledger = AgreementLedger(accepted, start, params)
    stats = IterationStats(index=-1 if index is None else index, steps=0, initial_potential=ledger.value.total)
    if record_trace:
        stats.trace.append(ledger.value.total)

    while ledger.value.total > 0:
        move = ledger.best_move()
        if move is None:
            raise Stalled(f"No improving move at potential {ledger.value.total} after {stats.steps} steps",
                          potential=ledger.value, iteration=index)
        before = ledger.value.total
        ledger.apply(move)
        stats.steps += 1
        if ledger.value.total != before + move.delta:
            raise RuntimeError(f"Potential moved by {ledger.value.total - before}, expected {move.delta}")
        if record_trace:
            stats.trace.append(ledger.value.total)
        if audit_every and stats.steps % audit_every == 0:
            if not ledger.consistent():
                raise RuntimeError(f"Agreement ledger drifted from a fresh rebuild at step {stats.steps}")
            logger.debug("Ledger audit passed at step %s of iteration %s", stats.steps, index)

    return ledger.label, stats


def build_next_label(accepted: Union[Sequence[Sequence[int]], np.ndarray], params: FamilyParams,
                     start: Sequence[int], audit_every: int = 0) -> Label:
    """Run the local search from start and return a label whose potential against accepted is zero.

    Raises:
        Stalled: no single character change improves a positive potential.
    """
    label, _ = _search(_as_matrix(accepted, params.gamma), params, start, audit_every=audit_every)
    return label


def start_label(params: FamilyParams, iteration: int, attempt: int = 0) -> Label:
    """The deterministic starting point for one iteration and attempt.

    Characters come from a generator seeded with (|A|, gamma, iteration, attempt).  Starts differ between iterations,
    attempts and escalation levels, and every run repeats them exactly.
    """
    rng = np.random.default_rng([params.alphabet.size, params.gamma, iteration, attempt])
    return Label(tuple(int(c) for c in rng.integers(0, params.alphabet.size, size=params.gamma)))


@dataclass
class ConstructionResult:
    """A finished family and how it was reached."""
    family: GoodFamily
    iterations: List[IterationStats]
    wall_ms: float

    @property
    def steps(self) -> List[int]:
        """Local search steps for every appended label."""
        return [it.steps for it in self.iterations]

    @property
    def max_steps(self) -> int:
        """The longest local search of the run."""
        return max(self.steps, default=0)


def _initial_labels(params: FamilyParams) -> List[Label]:
    if params.variant is Variant.SINGLE_SOURCE:
        return [Label((0,) * params.gamma)]
    mu, nu = seed_pair(params)
    return [mu, nu][:params.n]


def _construct(params: FamilyParams, config: BuilderConfig) -> Tuple[List[Label], List[IterationStats]]:
    labels = _initial_labels(params)
    accepted = np.zeros((params.n, params.gamma), dtype=np.int64)
    for r, lab in enumerate(labels):
        accepted[r] = lab.chars

    iterations = []
    for r in range(len(labels), params.n):
        stall = None
        for attempt in range(config.start_attempts):
            try:
                label, stats = _search(accepted[:r], params, start_label(params, r, attempt),
                                       audit_every=config.audit_every, record_trace=config.record_trace, index=r)
            except Stalled as exc:
                logger.debug("Iteration %s stalled from start %s at potential %s", r, attempt, exc.potential.total)
                stall = exc
                continue
            stats.start_attempt = attempt
            break
        else:
            raise stall

        logger.debug("Iteration %s accepted after %s steps (initial potential %s)", r, stats.steps,
                     stats.initial_potential)
        accepted[r] = label.chars
        labels.append(label)
        iterations.append(stats)

    return labels, iterations


def construct_family(n: int, k: int, variant: Union[str, Variant] = Variant.GENERAL,
                     config: Optional[BuilderConfig] = None) -> ConstructionResult:
    """Build a strongly good family, escalating gamma whenever the local search stalls.

    Raises:
        EscalationExhausted: every one of config.max_escalations escalations stalled.
    """
    config = BuilderConfig() if config is None else config
    variant = Variant.parse(variant)
    params = derive_params(n, k, variant, c_mult=config.c_mult, zeta=config.zeta)
    factor = Fraction(config.escalation_factor).limit_denominator(1000)
    start = time.perf_counter()

    while True:
        try:
            labels, iterations = _construct(params, config)
        except Stalled as exc:
            if params.escalations >= config.max_escalations:
                raise EscalationExhausted(f"Construction for n={n}, k={k} ({variant.value}) stalled after "
                                          f"{params.escalations} escalations at gamma={params.gamma}") from exc
            logger.info("Iteration %s stalled at gamma=%s (potential %s).  Escalating.", exc.iteration, params.gamma,
                        exc.potential.total)
            params = escalate(params, factor)
            continue

        family = GoodFamily(params=params, labels=tuple(labels))
        violations = find_strong_violations(family.matrix, params.variant, params.alpha, params.beta)
        if violations:
            raise RuntimeError(f"Constructed family is not strongly good: {violations[0]}")
        result = ConstructionResult(family=family, iterations=iterations,
                                    wall_ms=(time.perf_counter() - start) * 1000.0)
        logger.info("Built %s family for n=%s, k=%s: gamma=%s, |R|=%s, escalations=%s, max steps=%s",
                    variant.value, n, k, params.gamma, params.subset_count, params.escalations, result.max_steps)
        return result


def build_family(n: int, k: int, variant: Union[str, Variant] = Variant.GENERAL,
                 config: Optional[BuilderConfig] = None) -> GoodFamily:
    """Build a strongly good family of n labels for requirements up to k."""
    return construct_family(n, k, variant, config).family


@dataclass(frozen=True)
class FailureReport:
    """Why a random draw is not a (relaxed) strongly good family."""
    params: FamilyParams
    rng_seed: int
    alpha: int
    beta: int
    violations: Tuple[ViolationReport, ...]
    duplicates: Tuple[Tuple[int, int], ...] = ()


def draw_uniform_labels(n: int, params: FamilyParams, rng_seed: int) -> np.ndarray:
    """n labels with every character drawn independently and uniformly.  Deterministic given rng_seed."""
    rng = np.random.default_rng(rng_seed)
    return rng.integers(0, params.alphabet.size, size=(n, params.gamma), dtype=np.int16)


def relaxed_thresholds(params: FamilyParams, beta_budget: Optional[int] = None) -> Tuple[int, int]:
    """The (alpha', beta') the random baseline is held to.

    alpha' = floor(gamma / (2|A|)) and beta' = min(beta_budget, 2 * beta).  Single-source families have no pairwise
    lower bound, so their alpha' is reported but unused.
    """
    alpha = params.gamma // (2 * params.alphabet.size)
    beta = 2 * params.beta
    if beta_budget is not None:
        beta = min(beta_budget, beta)
    return alpha, beta


# pylint: disable=too-many-arguments
def build_family_randomized(n: int, k: int, variant: Union[str, Variant] = Variant.GENERAL,
                            config: Optional[BuilderConfig] = None, rng_seed: int = 0,
                            gamma_multiplier: int = 1) -> Union[GoodFamily, FailureReport]:
    """Draw n uniform labels and keep them if they meet the relaxed thresholds.

    The returned family carries the usual parameters; it is only certified against the relaxed thresholds.
    """
    config = BuilderConfig() if config is None else config
    params = derive_params(n, k, variant, c_mult=config.c_mult, zeta=config.zeta)
    if gamma_multiplier != 1:
        params = FamilyParams.for_gamma(n=n, k=k, alphabet_size=params.alphabet.size,
                                        gamma=params.gamma * gamma_multiplier, variant=params.variant)
    alpha, beta = relaxed_thresholds(params, config.random_beta_budget)
    matrix = draw_uniform_labels(n, params, rng_seed)

    violations = tuple(find_strong_violations(matrix, params.variant, alpha, beta))
    _, first, second = np.unique(matrix, axis=0, return_index=True, return_inverse=True)
    second = second.ravel()
    duplicates = tuple((int(first[second[j]]), j) for j in range(n) if first[second[j]] != j)
    if violations or duplicates:
        return FailureReport(params=params, rng_seed=rng_seed, alpha=alpha, beta=beta, violations=violations,
                             duplicates=duplicates)
    return GoodFamily.from_matrix(params, matrix)
