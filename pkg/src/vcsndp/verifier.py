"""Certificates for label families.

Strong goodness is checked in polynomial time from agreement counts.  Weak goodness has exponentially many
constraints and is only checked by brute force on small families, under a work budget.  Terminal indices are 0-based
and every list of findings comes back in lexicographic order.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import List, Optional, Tuple, Union

import numpy as np

from . import app_config as cfg
from .labels import GoodFamily, Variant

logger = logging.getLogger(__name__)

DEFAULT_WEAK_BUDGET = 10 ** 8


class BudgetExceeded(RuntimeError):
    """The brute-force enumeration would exceed the configured work budget."""

    def __init__(self, work: int, budget: int):
        super().__init__(f"Brute-force check needs {work} (pair, X) combinations, budget is {budget}")
        self.work = work
        self.budget = budget


class ViolationKind(str, Enum):
    """Which strong goodness condition failed."""
    PAIRWISE_LOW = "pairwise_low"
    TRIPLE_HIGH = "triple_high"
    PAIRWISE_HIGH_SS = "pairwise_high_ss"
    DEGREE_SS = "degree_ss"


@dataclass(frozen=True)
class ViolationReport:
    """One failed condition.  observed breaks bound for the labels in witnesses."""
    kind: ViolationKind
    witnesses: Tuple[int, ...]
    observed: int
    bound: int

    def __str__(self) -> str:
        relation = ">=" if self.kind in (ViolationKind.PAIRWISE_LOW, ViolationKind.DEGREE_SS) else "<="
        return (f"{self.kind.value}: labels {self.witnesses} have {self.observed}, required {relation} "
                f"{self.bound}")


@dataclass(frozen=True)
class Counterexample:
    """A witness against weak goodness.

    witnesses is a pair (i, j) whose shared subsets are all covered by the labels in excluded (general variant), or a
    single label (i,) whose subsets are all covered (single-source variant).
    """
    witnesses: Tuple[int, ...]
    excluded: Tuple[int, ...]


def agreement_matrix(matrix: np.ndarray) -> np.ndarray:
    """(n, n) matrix of pairwise agreements.  The diagonal holds gamma."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    if n == 0:
        return out
    for c in np.unique(matrix):
        hits = (matrix == c).astype(np.float32)
        out += np.rint(hits @ hits.T).astype(np.int64)
    return out


def _triple_violations(matrix: np.ndarray, agree: np.ndarray, beta: int) -> List[ViolationReport]:
    n = matrix.shape[0]
    found = []
    for p in range(n):
        # A triple can only exceed beta if every pair inside it does
        later = np.arange(p + 1, n)
        candidates = later[agree[p, later] > beta]
        if candidates.size < 2:
            continue
        hits = (matrix[candidates] == matrix[p]).astype(np.float32)
        triples = np.rint(hits @ hits.T).astype(np.int64)
        first, second = np.triu_indices(candidates.size, 1)
        bad = np.flatnonzero(triples[first, second] > beta)
        for t in bad:
            q, r = int(candidates[first[t]]), int(candidates[second[t]])
            found.append(ViolationReport(ViolationKind.TRIPLE_HIGH, (p, q, r),
                                         int(triples[first[t], second[t]]), beta))
    return found


def find_strong_violations(matrix: np.ndarray, variant: Union[str, Variant], alpha: int,
                           beta: int) -> List[ViolationReport]:
    """Check strong goodness of an (n, gamma) label matrix against explicit thresholds.

    Works on matrices that cannot form a GoodFamily, duplicates included.
    """
    matrix = np.asarray(matrix)
    variant = Variant.parse(variant)
    n, gamma = matrix.shape
    agree = agreement_matrix(matrix)
    first, second = np.triu_indices(n, 1)
    pairs = agree[first, second]
    found = []

    if variant is Variant.GENERAL:
        for t in np.flatnonzero(pairs < alpha):
            found.append(ViolationReport(ViolationKind.PAIRWISE_LOW, (int(first[t]), int(second[t])),
                                         int(pairs[t]), alpha))
        found.extend(_triple_violations(matrix, agree, beta))
    else:
        # Every label lies in exactly gamma subsets
        if gamma < alpha:
            found.extend(ViolationReport(ViolationKind.DEGREE_SS, (i,), gamma, alpha) for i in range(n))
        for t in np.flatnonzero(pairs > beta):
            found.append(ViolationReport(ViolationKind.PAIRWISE_HIGH_SS, (int(first[t]), int(second[t])),
                                         int(pairs[t]), beta))

    found.sort(key=lambda v: (v.witnesses, v.kind.value))
    return found


def verify_strong_goodness(fam: GoodFamily, alpha: Optional[int] = None,
                           beta: Optional[int] = None) -> List[ViolationReport]:
    """All strong goodness violations of fam.  Empty means strongly good.

    alpha and beta default to the family's own thresholds.
    """
    params = fam.params
    alpha = params.alpha if alpha is None else alpha
    beta = params.beta if beta is None else beta
    violations = find_strong_violations(fam.matrix, params.variant, alpha, beta)
    if violations:
        logger.debug("Family (n=%s, gamma=%s) has %s strong goodness violations", params.n, params.gamma,
                     len(violations))
    return violations


def _neighborhood_masks(matrix: np.ndarray) -> List[int]:
    """N(l_i) for every label as a bitmask over subset indices j * |A| + c."""
    width = int(matrix.max()) + 1 if matrix.size else 1
    masks = []
    for row in matrix:
        mask = 0
        for j, c in enumerate(row):
            mask |= 1 << (j * width + int(c))
        masks.append(mask)
    return masks


def _sizes(k: int, pool: int, exhaustive: bool) -> List[int]:
    top = max(0, min(k - 1, pool))
    return list(range(top + 1)) if exhaustive else [top]


def _resolve_budget(budget: Optional[int]) -> int:
    if budget is not None:
        return budget
    configured = cfg.get_parameter(['verifier', 'weak_budget'])
    return DEFAULT_WEAK_BUDGET if configured is None else configured


# pylint: disable=too-many-arguments,too-many-locals
def find_weak_counterexample(matrix: np.ndarray, k: int, variant: Union[str, Variant] = Variant.GENERAL,
                             budget: Optional[int] = None, exhaustive: bool = False) -> Optional[Counterexample]:
    """The first weak goodness counterexample of an (n, gamma) label matrix, or None.

    Only excluded sets of the largest allowed size are tried unless exhaustive is set.  Covering is monotone in the
    excluded set, so a failure at a smaller size is also a failure at the largest.

    Raises:
        BudgetExceeded: the enumeration needs more (pair, X) combinations than budget.
    """
    matrix = np.asarray(matrix)
    variant = Variant.parse(variant)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    budget = _resolve_budget(budget)
    n = matrix.shape[0]
    masks = _neighborhood_masks(matrix)

    if variant is Variant.GENERAL:
        anchors = list(combinations(range(n), 2))
        pool = n - 2
    else:
        anchors = [(i,) for i in range(n)]
        pool = n - 1
    sizes = _sizes(k, pool, exhaustive)
    work = len(anchors) * sum(math.comb(max(pool, 0), size) for size in sizes)
    if work > budget:
        raise BudgetExceeded(work, budget)

    for anchor in anchors:
        target = masks[anchor[0]]
        for i in anchor[1:]:
            target &= masks[i]
        others = [i for i in range(n) if i not in anchor]
        for size in sizes:
            for excluded in combinations(others, size):
                covered = 0
                for x in excluded:
                    covered |= masks[x]
                if target & ~covered == 0:
                    return Counterexample(witnesses=anchor, excluded=excluded)
    return None


def verify_weak_goodness_bruteforce(fam: GoodFamily, k: int, budget: Optional[int] = None,
                                    exhaustive: bool = False) -> Optional[Counterexample]:
    """Check that every pair of labels shares a subset avoiding any k-1 other labels."""
    return find_weak_counterexample(fam.matrix, k, Variant.GENERAL, budget=budget, exhaustive=exhaustive)


def verify_weak_goodness_ss_bruteforce(fam: GoodFamily, k: int, budget: Optional[int] = None,
                                       exhaustive: bool = False) -> Optional[Counterexample]:
    """Check that every label has a subset avoiding any k-1 other labels."""
    return find_weak_counterexample(fam.matrix, k, Variant.SINGLE_SOURCE, budget=budget, exhaustive=exhaustive)


def cross_check_observation(fam: GoodFamily, k: int, budget: Optional[int] = None) -> bool:
    """Check that strong goodness with alpha/beta > k implies weak goodness for fam.

    Returns True when the implication holds, vacuously included.

    Raises:
        BudgetExceeded: from the brute-force oracle.
    """
    params = fam.params
    if verify_strong_goodness(fam) or params.alpha <= k * params.beta:
        return True
    if params.variant is Variant.GENERAL:
        found = verify_weak_goodness_bruteforce(fam, k, budget=budget)
    else:
        found = verify_weak_goodness_ss_bruteforce(fam, k, budget=budget)
    if found is not None:
        logger.warning("Strongly good family fails weak goodness for k=%s: %s", k, found)
    return found is None
