"""Line oriented text formats for families and instances.

Family file::

    goodfam v1 general n=3 k=1 A=2 gamma=4 alpha=2 beta=1
    0 0 0 0
    0 1 0 1
    ...

Instance file (blank lines and '#' comments allowed)::

    sndp v1 general nv=4 k=2
    t 0
    t 1
    e 0 1 1
    e 1 2 3/2
    r 0 1 2

Single-source instances add an 's <vertex>' line and write requirements as 'r <terminal> <req>'.
"""
import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .instance import Edge, SndpInstance
from .labels import Alphabet, FamilyParams, GoodFamily, Label, ParameterError, Variant

logger = logging.getLogger(__name__)

FAMILY_MAGIC = "goodfam"
INSTANCE_MAGIC = "sndp"
VERSION = "v1"

_FAMILY_KEYS = ("n", "k", "A", "gamma", "alpha", "beta")


class FormatError(ValueError):
    """A malformed file.  line and column are 1-based when known."""

    def __init__(self, message: str, path: Union[str, Path] = "<string>", line: Optional[int] = None,
                 column: Optional[int] = None):
        where = str(path)
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line
        self.column = column


def _tokens(text: str) -> List[Tuple[str, int]]:
    """Whitespace separated tokens with their 1-based columns."""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", text)]


def _int(token: str, column: int, path, line: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"Expected an integer {what}, got '{token}'", path, line, column) from None


def family_to_text(fam: GoodFamily) -> str:
    """The canonical text form of a family."""
    p = fam.params
    lines = [f"{FAMILY_MAGIC} {VERSION} {p.variant.value} n={p.n} k={p.k} A={p.alphabet.size} gamma={p.gamma} "
             f"alpha={p.alpha} beta={p.beta}"]
    lines.extend(" ".join(str(c) for c in lab) for lab in fam.labels)
    return "\n".join(lines) + "\n"


def write_family(fam: GoodFamily, path: Union[str, Path]):
    """Write a family file."""
    Path(path).write_text(family_to_text(fam), encoding="utf-8")


def _parse_family_header(text: str, path) -> FamilyParams:
    tokens = _tokens(text)
    if len(tokens) != 3 + len(_FAMILY_KEYS):
        raise FormatError(f"Header needs {3 + len(_FAMILY_KEYS)} fields, found {len(tokens)}", path, 1)
    if tokens[0][0] != FAMILY_MAGIC:
        raise FormatError(f"Not a family file, expected '{FAMILY_MAGIC}'", path, 1, tokens[0][1])
    if tokens[1][0] != VERSION:
        raise FormatError(f"Unsupported version '{tokens[1][0]}'", path, 1, tokens[1][1])
    try:
        variant = Variant.parse(tokens[2][0])
    except ValueError as exc:
        raise FormatError(str(exc), path, 1, tokens[2][1]) from None

    values = {}
    for key, (token, column) in zip(_FAMILY_KEYS, tokens[3:]):
        name, sep, value = token.partition("=")
        if name != key or not sep:
            raise FormatError(f"Expected '{key}=<int>', got '{token}'", path, 1, column)
        values[key] = _int(value, column + len(key) + 1, path, 1, key)

    try:
        Alphabet(values["A"])
    except ParameterError as exc:
        raise FormatError(str(exc), path, 1) from None
    alpha, beta = FamilyParams.thresholds_for(values["gamma"], values["A"], variant)
    if (values["alpha"], values["beta"]) != (alpha, beta):
        raise FormatError(f"alpha={values['alpha']}, beta={values['beta']} are inconsistent with "
                          f"gamma={values['gamma']}, A={values['A']} and variant {variant.value}; expected "
                          f"alpha={alpha}, beta={beta}", path, 1)
    try:
        return FamilyParams.for_gamma(n=values["n"], k=values["k"], alphabet_size=values["A"], gamma=values["gamma"],
                                      variant=variant)
    except ParameterError as exc:
        raise FormatError(str(exc), path, 1) from None


def parse_family(text: str, path: Union[str, Path] = "<string>") -> GoodFamily:
    """Parse the text of a family file.

    Raises:
        FormatError: with the line, and column where it helps, of the first problem.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FormatError("Empty family file", path)
    params = _parse_family_header(lines[0], path)

    body = lines[1:]
    if len(body) != params.n:
        raise FormatError(f"Expected {params.n} labels, found {len(body)}", path, len(lines))

    labels = []
    seen: Dict[Label, int] = {}
    for offset, line in enumerate(body):
        lineno = offset + 2
        tokens = _tokens(line)
        if len(tokens) != params.gamma:
            raise FormatError(f"Label has {len(tokens)} characters, expected gamma={params.gamma}", path, lineno)
        chars = []
        for token, column in tokens:
            char = _int(token, column, path, lineno, "character")
            if char not in params.alphabet:
                raise FormatError(f"Character {char} is outside 0..{params.alphabet.size - 1}", path, lineno, column)
            chars.append(char)
        label = Label(tuple(chars))
        if label in seen:
            raise FormatError(f"Label repeats the label on line {seen[label]}", path, lineno)
        seen[label] = lineno
        labels.append(label)
    return GoodFamily(params=params, labels=tuple(labels))


def read_family(path: Union[str, Path]) -> GoodFamily:
    """Read a family file."""
    return parse_family(Path(path).read_text(encoding="utf-8"), path)


def instance_to_text(instance: SndpInstance) -> str:
    """The canonical text form of an instance."""
    lines = [f"{INSTANCE_MAGIC} {VERSION} {instance.variant.value} nv={instance.vertex_count} k={instance.k}"]
    lines.extend(f"t {t}" for t in instance.terminals)
    if instance.source is not None:
        lines.append(f"s {instance.source}")
    lines.extend(f"e {e.u} {e.v} {e.cost}" for e in instance.edges)
    for (u, v), req in sorted(instance.requirements.items()):
        if instance.variant is Variant.SINGLE_SOURCE:
            lines.append(f"r {v} {req}")
        else:
            lines.append(f"r {u} {v} {req}")
    return "\n".join(lines) + "\n"


def write_instance(instance: SndpInstance, path: Union[str, Path]):
    """Write an instance file."""
    Path(path).write_text(instance_to_text(instance), encoding="utf-8")


def _parse_instance_header(tokens: List[Tuple[str, int]], path, lineno: int) -> Tuple[Variant, int, int]:
    if len(tokens) != 5:
        raise FormatError(f"Header needs 5 fields, found {len(tokens)}", path, lineno)
    if tokens[0][0] != INSTANCE_MAGIC:
        raise FormatError(f"Not an instance file, expected '{INSTANCE_MAGIC}'", path, lineno, tokens[0][1])
    if tokens[1][0] != VERSION:
        raise FormatError(f"Unsupported version '{tokens[1][0]}'", path, lineno, tokens[1][1])
    try:
        variant = Variant.parse(tokens[2][0])
    except ValueError as exc:
        raise FormatError(str(exc), path, lineno, tokens[2][1]) from None
    values = []
    for key, (token, column) in zip(("nv", "k"), tokens[3:]):
        name, sep, value = token.partition("=")
        if name != key or not sep:
            raise FormatError(f"Expected '{key}=<int>', got '{token}'", path, lineno, column)
        values.append(_int(value, column + len(key) + 1, path, lineno, key))
    return variant, values[0], values[1]


def _check_vertex(value: int, vertex_count: int, path, line: int, column: int):
    if not 0 <= value < vertex_count:
        raise FormatError(f"Vertex {value} is outside 0..{vertex_count - 1}", path, line, column)


# pylint: disable=too-many-locals,too-many-branches,too-many-statements
def parse_instance(text: str, path: Union[str, Path] = "<string>") -> SndpInstance:
    """Parse the text of an instance file and validate the instance.

    Raises:
        FormatError: with the line, and column where it helps, of the first problem.
    """
    header = None
    terminals: List[int] = []
    source: Optional[int] = None
    source_line = None
    edges: List[Edge] = []
    edge_lines: Dict[Tuple[int, int], int] = {}
    requirements: List[Tuple[Tuple[int, int], int, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokens(line)
        if not tokens:
            continue
        if header is None:
            header = _parse_instance_header(tokens, path, lineno)
            variant, vertex_count, k = header
            continue

        kind, column = tokens[0]
        args = tokens[1:]
        ints = [_int(tok, col, path, lineno, "value") for tok, col in args] if kind in ("t", "s", "r") else None
        if ints:
            for value, (_, col) in zip(ints, args if kind != "r" else args[:-1]):
                _check_vertex(value, vertex_count, path, lineno, col)

        if kind == "t":
            if len(args) != 1:
                raise FormatError("Expected 't <vertex>'", path, lineno)
            if ints[0] in terminals:
                raise FormatError(f"Terminal {ints[0]} is listed twice", path, lineno)
            terminals.append(ints[0])
        elif kind == "s":
            if len(args) != 1:
                raise FormatError("Expected 's <vertex>'", path, lineno)
            if variant is not Variant.SINGLE_SOURCE:
                raise FormatError("Only single-source instances have a source line", path, lineno, column)
            if source is not None:
                raise FormatError(f"Source already given on line {source_line}", path, lineno)
            source, source_line = ints[0], lineno
        elif kind == "e":
            if len(args) != 3:
                raise FormatError("Expected 'e <u> <v> <cost>'", path, lineno)
            u, v = (_int(tok, col, path, lineno, "vertex") for tok, col in args[:2])
            for value, (_, col) in zip((u, v), args[:2]):
                _check_vertex(value, vertex_count, path, lineno, col)
            try:
                cost = Fraction(args[2][0])
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"Invalid cost '{args[2][0]}'", path, lineno, args[2][1]) from None
            key = (min(u, v), max(u, v))
            if u == v:
                raise FormatError(f"Self loop at vertex {u}", path, lineno)
            if key in edge_lines:
                raise FormatError(f"Duplicate edge {key}, first given on line {edge_lines[key]}", path, lineno)
            if cost < 0:
                raise FormatError(f"Negative cost {cost}", path, lineno, args[2][1])
            edge_lines[key] = lineno
            edges.append(Edge(u, v, cost))
        elif kind == "r":
            if variant is Variant.SINGLE_SOURCE:
                if len(args) != 2:
                    raise FormatError("Expected 'r <terminal> <req>'", path, lineno)
                requirements.append(((None, ints[0]), ints[1], lineno))
            else:
                if len(args) != 3:
                    raise FormatError("Expected 'r <u> <v> <req>'", path, lineno)
                requirements.append(((ints[0], ints[1]), ints[2], lineno))
        else:
            raise FormatError(f"Unknown line type '{kind}'", path, lineno, column)

    if header is None:
        raise FormatError("Empty instance file", path)
    if variant is Variant.SINGLE_SOURCE and source is None:
        raise FormatError("Single-source instance has no 's <vertex>' line", path)

    terminal_set = set(terminals)
    reqs = {}
    for (u, v), req, lineno in requirements:
        if u is None:
            u = source
        if variant is Variant.GENERAL and (u not in terminal_set or v not in terminal_set):
            raise FormatError(f"Requirement between {u} and {v} involves a non-terminal", path, lineno)
        if variant is Variant.SINGLE_SOURCE and v not in terminal_set:
            raise FormatError(f"Requirement for {v}, which is not a terminal", path, lineno)
        if not 0 <= req <= k:
            raise FormatError(f"Requirement {req} is outside 0..{k}", path, lineno)
        key = (u, v) if variant is Variant.SINGLE_SOURCE else (min(u, v), max(u, v))
        if key in reqs:
            raise FormatError(f"Requirement {key} is given twice", path, lineno)
        reqs[key] = req

    try:
        return SndpInstance(vertex_count=vertex_count, edges=tuple(edges), terminals=tuple(terminals),
                            requirements=reqs, k=k, variant=variant, source=source)
    except ValueError as exc:
        raise FormatError(str(exc), path) from None


def read_instance(path: Union[str, Path]) -> SndpInstance:
    """Read an instance file."""
    return parse_instance(Path(path).read_text(encoding="utf-8"), path)
