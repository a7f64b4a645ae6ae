"""Labels over a finite alphabet and the arithmetic that good families are built from.

A family of n labels of length gamma over an alphabet A describes a bipartite graph.  The left side holds one vertex
per terminal, the right side one vertex (j, c) per column j and character c, and terminal i is joined to (j, c) iff
labels[i][j] == c.  Each right vertex is one subset T_(j,c) of the terminals.  Terminals are 0-based indices into the
family.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from fractions import Fraction
from typing import FrozenSet, List, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)


class ParameterError(ValueError):
    """Raised when a parameter set cannot describe a good family."""


class Variant(str, Enum):
    """Which goodness property a family is built for."""
    GENERAL = "general"
    SINGLE_SOURCE = "single-source"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        """Accept the enum, its value, or the short CLI alias 'ss'."""
        if isinstance(value, Variant):
            return value
        if value == "ss":
            return cls.SINGLE_SOURCE
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"Unknown variant '{value}'.  Options are 'general', 'single-source' or 'ss'.") from None


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Alphabet:
    """Characters are the integers 0 .. size-1."""
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ParameterError(f"Alphabet size must be at least 2, got {self.size}")

    def __contains__(self, char) -> bool:
        return 0 <= char < self.size


@dataclass(frozen=True)
class Label:
    """An immutable string of characters."""
    chars: Tuple[int, ...]

    def __post_init__(self):
        chars = tuple(int(c) for c in self.chars)
        if any(c < 0 for c in chars):
            raise ValueError(f"Label characters must be non-negative: {chars}")
        object.__setattr__(self, "chars", chars)

    @classmethod
    def parse(cls, text: str) -> "Label":
        """Build a label from a digit string such as '0120'.  Only useful for alphabets of size <= 10."""
        return cls(tuple(int(ch) for ch in text))

    def __len__(self) -> int:
        return len(self.chars)

    def __getitem__(self, j):
        return self.chars[j]

    def __iter__(self):
        return iter(self.chars)

    def __str__(self) -> str:
        if all(c < 10 for c in self.chars):
            return "".join(str(c) for c in self.chars)
        return " ".join(str(c) for c in self.chars)


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class FamilyParams:
    """Everything that governs one construction run.

    Raises ParameterError unless alpha and beta follow from gamma, the alphabet and the variant, and alpha/beta > k.
    The escalations counter is provenance: it is not compared and not written to family files.
    """
    n: int
    k: int
    alphabet: Alphabet
    gamma: int
    alpha: int
    beta: int
    variant: Variant = Variant.GENERAL
    escalations: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.n < 1:
            raise ParameterError(f"A family needs at least one terminal, got n={self.n}")
        if self.k < 1:
            raise ParameterError(f"Connectivity requirement k must be at least 1, got k={self.k}")
        if self.gamma < self.alphabet.size:
            raise ParameterError(f"gamma={self.gamma} is shorter than the alphabet ({self.alphabet.size})")
        if self.escalations < 0:
            raise ParameterError(f"escalations must be non-negative, got {self.escalations}")

        alpha, beta = self.thresholds_for(self.gamma, self.alphabet.size, self.variant)
        if (self.alpha, self.beta) != (alpha, beta):
            raise ParameterError(f"alpha={self.alpha}, beta={self.beta} are inconsistent with gamma={self.gamma}, "
                                 f"|A|={self.alphabet.size} and variant {self.variant.value}; expected alpha={alpha}, "
                                 f"beta={beta}")
        if self.alpha <= self.k * self.beta:
            raise ParameterError(f"alpha/beta = {self.alpha}/{self.beta} must exceed k={self.k}.  Use a larger "
                                 f"c_mult (alphabet) or a larger gamma.")

    @staticmethod
    def thresholds_for(gamma: int, alphabet_size: int, variant: Variant) -> Tuple[int, int]:
        """The (alpha, beta) pair implied by gamma, |A| and the variant."""
        if Variant.parse(variant) is Variant.GENERAL:
            return _ceil_div(gamma, alphabet_size), _ceil_div(gamma, alphabet_size ** 2)
        return gamma, _ceil_div(gamma, alphabet_size)

    @classmethod
    def for_gamma(cls, n: int, k: int, alphabet_size: int, gamma: int, variant: Union[str, Variant] = Variant.GENERAL,
                  escalations: int = 0) -> "FamilyParams":
        """Build parameters for a chosen gamma, deriving alpha and beta."""
        variant = Variant.parse(variant)
        alpha, beta = cls.thresholds_for(gamma, alphabet_size, variant)
        return cls(n=n, k=k, alphabet=Alphabet(alphabet_size), gamma=gamma, alpha=alpha, beta=beta,
                   variant=variant, escalations=escalations)

    @property
    def subset_count(self) -> int:
        """|R| = gamma * |A|, the number of subsets the family describes."""
        return self.gamma * self.alphabet.size

    @property
    def ratio(self) -> Fraction:
        """alpha / beta as an exact fraction."""
        return Fraction(self.alpha, self.beta)

    def as_dict(self) -> dict:
        """A plain dictionary suitable for reports."""
        return {"n": self.n, "k": self.k, "A": self.alphabet.size, "gamma": self.gamma, "alpha": self.alpha,
                "beta": self.beta, "variant": self.variant.value, "escalations": self.escalations}


@dataclass(frozen=True)
class GoodFamily:
    """An ordered family of n distinct labels, label i belonging to terminal i."""
    params: FamilyParams
    labels: Tuple[Label, ...]

    def __post_init__(self):
        labels = tuple(lab if isinstance(lab, Label) else Label(tuple(lab)) for lab in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) != self.params.n:
            raise ValueError(f"Expected {self.params.n} labels, got {len(labels)}")
        for i, lab in enumerate(labels):
            if len(lab) != self.params.gamma:
                raise ValueError(f"Label {i} has length {len(lab)}, expected gamma={self.params.gamma}")
            if any(c not in self.params.alphabet for c in lab):
                raise ValueError(f"Label {i} uses a character outside 0..{self.params.alphabet.size - 1}")
        if len(set(labels)) != len(labels):
            raise ValueError("Labels in a family must be pairwise distinct")

    @classmethod
    def from_matrix(cls, params: FamilyParams, matrix: np.ndarray) -> "GoodFamily":
        """Build a family from an (n, gamma) integer array."""
        return cls(params=params, labels=tuple(Label(tuple(int(c) for c in row)) for row in matrix))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Read-only (n, gamma) array view of the labels."""
        out = np.array([lab.chars for lab in self.labels], dtype=np.int16).reshape(self.params.n, self.params.gamma)
        out.flags.writeable = False
        return out

    def __len__(self) -> int:
        return len(self.labels)


def _check_lengths(*labels: Sequence[int]):
    lengths = {len(lab) for lab in labels}
    if len(lengths) > 1:
        raise ValueError(f"Labels must have equal lengths, got {sorted(len(lab) for lab in labels)}")


def agreement(s1: Sequence[int], s2: Sequence[int]) -> int:
    """|s1 . s2|, the number of positions where the two labels carry the same character."""
    _check_lengths(s1, s2)
    return sum(1 for a, b in zip(s1, s2) if a == b)


def triple_agreement(s1: Sequence[int], s2: Sequence[int], s3: Sequence[int]) -> int:
    """The number of positions where all three labels carry the same character."""
    _check_lengths(s1, s2, s3)
    return sum(1 for a, b, c in zip(s1, s2, s3) if a == b == c)


def seed_pair(params: FamilyParams) -> Tuple[Label, Label]:
    """The two labels every general construction starts from.

    mu is all zeros, nu cycles 0, 1, ..., |A|-1 and is truncated to gamma characters.
    """
    size = params.alphabet.size
    if params.gamma < size:
        raise ParameterError(f"gamma={params.gamma} must be at least |A|={size} to seed a family")
    mu = Label((0,) * params.gamma)
    nu = Label(tuple(j % size for j in range(params.gamma)))
    return mu, nu


def _round_up(value: int, multiple: int) -> int:
    return _ceil_div(value, multiple) * multiple


def derive_params(n: int, k: int, variant: Union[str, Variant] = Variant.GENERAL, c_mult: int = 2,
                  zeta: Union[float, Fraction] = 1) -> FamilyParams:
    """Pick the alphabet and label length for n terminals and requirements up to k.

    |A| = c_mult * k.  gamma = ceil(zeta * |A|^2 * ln n) for the general variant and ceil(zeta * |A| * ln n) for the
    single-source variant, rounded up to a multiple of |A| and never shorter than |A|.

    Raises:
        ParameterError: the resulting alpha/beta does not exceed k.  A larger c_mult fixes this.
    """
    variant = Variant.parse(variant)
    if n < 1:
        raise ParameterError(f"Need at least one terminal, got n={n}")
    if k < 1:
        raise ParameterError(f"k must be at least 1, got k={k}")
    size = c_mult * k
    if size < 2:
        raise ParameterError(f"c_mult * k must be at least 2, got {size}")

    power = 2 if variant is Variant.GENERAL else 1
    gamma = math.ceil(float(zeta) * size ** power * math.log(n))
    gamma = max(_round_up(gamma, size), size)
    return FamilyParams.for_gamma(n=n, k=k, alphabet_size=size, gamma=gamma, variant=variant)


def escalate(params: FamilyParams, factor: Union[float, Fraction] = Fraction(3, 2)) -> FamilyParams:
    """Lengthen the labels: gamma <- ceil(factor * gamma), rounded up to a multiple of |A|."""
    factor = Fraction(factor).limit_denominator(1000)
    size = params.alphabet.size
    gamma = math.ceil(factor * params.gamma)
    gamma = max(_round_up(gamma, size), params.gamma + size)
    return FamilyParams.for_gamma(n=params.n, k=params.k, alphabet_size=size, gamma=gamma, variant=params.variant,
                                  escalations=params.escalations + 1)


def infer_escalations(params: FamilyParams, c_mult: int, zeta: Union[float, Fraction],
                      factor: Union[float, Fraction] = Fraction(3, 2), limit: int = 64) -> Union[int, None]:
    """Recover how many escalations produced params.gamma, or None if no escalation count does."""
    current = derive_params(params.n, params.k, params.variant, c_mult=c_mult, zeta=zeta)
    count = 0
    while current.gamma < params.gamma and count < limit:
        current = escalate(current, factor)
        count += 1
    return count if current.gamma == params.gamma else None


def subsets_from_matrix(matrix: np.ndarray, alphabet_size: int) -> List[Tuple[Tuple[int, int], FrozenSet[int]]]:
    """All gamma * |A| subsets T_(j,c) = {i : matrix[i, j] == c} of an (n, gamma) label matrix, ordered by (j, c)."""
    matrix = np.asarray(matrix)
    out = []
    for j in range(matrix.shape[1]):
        column = matrix[:, j]
        for c in range(alphabet_size):
            members = frozenset(int(i) for i in np.flatnonzero(column == c))
            out.append(((j, c), members))
    return out


def subsets_from_labels(fam: GoodFamily) -> List[Tuple[Tuple[int, int], FrozenSet[int]]]:
    """All gamma * |A| subsets T_(j,c) = {i : labels[i][j] == c}, ordered by (j, c)."""
    return subsets_from_matrix(fam.matrix, fam.params.alphabet.size)


def neighborhood(fam: GoodFamily, i: int) -> FrozenSet[Tuple[int, int]]:
    """N(l_i): the subset indices (j, c) that contain terminal i."""
    return frozenset((j, c) for j, c in enumerate(fam.labels[i]))
