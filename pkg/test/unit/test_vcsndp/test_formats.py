"""Unit tests for the family and instance text formats"""
import os
import tempfile
from fractions import Fraction
from unittest import TestCase

from vcsndp.formats import (FormatError, family_to_text, instance_to_text, parse_family, parse_instance, read_family,
                            read_instance, write_family, write_instance)
from vcsndp.instance import SndpInstance, as_instance_edges
from vcsndp.labels import FamilyParams, GoodFamily, Label, Variant, seed_pair

FAMILY = """goodfam v1 general n=2 k=1 A=3 gamma=6 alpha=2 beta=1
0 0 0 0 0 0
0 1 2 0 1 2
"""

INSTANCE = """# A small general instance
sndp v1 general nv=4 k=2
t 0
t 1

t 3
e 0 1 1
e 1 2 3/2   # fractional cost
e 2 3 2
e 0 3 1
r 0 1 2
r 1 3 1
"""

SS_INSTANCE = """sndp v1 ss nv=3 k=1
s 0
t 1
t 2
e 0 1 1
e 1 2 1
r 2 1
"""


class TestFamilyFormat(TestCase):
    """Tests for reading and writing family files"""

    def test_parse(self):
        """The seed pair with its parameters"""
        fam = parse_family(FAMILY)
        params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=3, gamma=6)
        self.assertEqual(GoodFamily(params, seed_pair(params)), fam)

    def test_canonical_text(self):
        """Writing a parsed file gives the same text back"""
        self.assertEqual(FAMILY, family_to_text(parse_family(FAMILY)))

    def test_file_round_trip(self):
        """A single source family survives a trip through a file"""
        params = FamilyParams.for_gamma(n=2, k=2, alphabet_size=3, gamma=6, variant=Variant.SINGLE_SOURCE)
        fam = GoodFamily(params, (Label.parse("000000"), Label.parse("012012")))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "fam.txt")
            write_family(fam, path)
            self.assertEqual(fam, read_family(path))

    def assert_format_error(self, text, line, column=None):
        with self.assertRaises(FormatError) as ctx:
            parse_family(text, "fam.txt")
        self.assertEqual(line, ctx.exception.line)
        if column is not None:
            self.assertEqual(column, ctx.exception.column)
        self.assertTrue(str(ctx.exception).startswith(f"fam.txt:{line}"))

    def test_bad_magic(self):
        """Only family files are accepted"""
        self.assert_format_error(FAMILY.replace("goodfam", "family"), 1, 1)

    def test_bad_version(self):
        """Only v1 is known"""
        self.assert_format_error(FAMILY.replace("v1", "v2"), 1, 9)

    def test_inconsistent_thresholds(self):
        """alpha must follow from gamma and A"""
        self.assert_format_error(FAMILY.replace("alpha=2", "alpha=3"), 1)

    def test_bad_alphabet(self):
        """A one character alphabet is refused"""
        self.assert_format_error(FAMILY.replace("A=3", "A=1"), 1)

    def test_character_out_of_range(self):
        """Character 3 does not exist for A=3"""
        self.assert_format_error(FAMILY.replace("0 1 2 0 1 2", "0 1 2 0 3 2"), 3, 9)

    def test_not_an_integer(self):
        """Characters are integers"""
        self.assert_format_error(FAMILY.replace("0 1 2 0 1 2", "0 1 x 0 1 2"), 3, 5)

    def test_wrong_length(self):
        """Labels have gamma characters"""
        self.assert_format_error(FAMILY.replace("0 1 2 0 1 2", "0 1 2 0 1"), 3)

    def test_wrong_count(self):
        """n labels follow the header"""
        self.assert_format_error(FAMILY.replace("n=2", "n=3"), 3)

    def test_duplicate_label(self):
        """Labels are distinct"""
        self.assert_format_error(FAMILY.replace("0 1 2 0 1 2", "0 0 0 0 0 0"), 3)

    def test_empty(self):
        """An empty file has no header"""
        with self.assertRaises(FormatError):
            parse_family("\n\n")


class TestInstanceFormat(TestCase):
    """Tests for reading and writing instance files"""

    def test_parse(self):
        """Comments and blank lines are skipped and costs may be fractions"""
        instance = parse_instance(INSTANCE)
        self.assertEqual(4, instance.vertex_count)
        self.assertEqual((0, 1, 3), instance.terminals)
        self.assertEqual(Fraction(3, 2), instance.edges[1].cost)
        self.assertEqual({(0, 1): 2, (1, 3): 1}, instance.requirements)
        self.assertEqual(2, instance.requirement(1, 0))
        self.assertEqual(0, instance.requirement(0, 3))

    def test_single_source(self):
        """The source line and one vertex requirements"""
        instance = parse_instance(SS_INSTANCE)
        self.assertEqual(Variant.SINGLE_SOURCE, instance.variant)
        self.assertEqual(0, instance.source)
        self.assertEqual({(0, 2): 1}, instance.requirements)

    def test_file_round_trip(self):
        """Both variants survive a trip through a file"""
        with tempfile.TemporaryDirectory() as tmp:
            for text in (INSTANCE, SS_INSTANCE):
                instance = parse_instance(text)
                path = os.path.join(tmp, "instance.txt")
                write_instance(instance, path)
                self.assertEqual(instance, read_instance(path))

    def test_canonical_text(self):
        """The written form parses to the same instance"""
        instance = SndpInstance(vertex_count=3, edges=as_instance_edges([(0, 1, "1/3"), (1, 2, 2)]),
                                terminals=(0, 2), requirements={(2, 0): 1}, k=1)
        self.assertIn("e 0 1 1/3", instance_to_text(instance))
        self.assertIn("r 0 2 1", instance_to_text(instance))
        self.assertEqual(instance, parse_instance(instance_to_text(instance)))

    def assert_format_error(self, text, line):
        with self.assertRaises(FormatError) as ctx:
            parse_instance(text, "g.txt")
        self.assertEqual(line, ctx.exception.line)

    def test_duplicate_edge(self):
        """The same endpoints twice, in either order"""
        self.assert_format_error(INSTANCE.replace("e 0 3 1", "e 1 0 4"), 10)

    def test_vertex_out_of_range(self):
        """Vertices are below nv"""
        self.assert_format_error(INSTANCE.replace("e 2 3 2", "e 2 4 2"), 9)

    def test_requirement_on_non_terminal(self):
        """Vertex 2 is not a terminal"""
        self.assert_format_error(INSTANCE.replace("r 1 3 1", "r 1 2 1"), 12)

    def test_requirement_above_k(self):
        """Requirements are at most k"""
        self.assert_format_error(INSTANCE.replace("r 0 1 2", "r 0 1 3"), 11)

    def test_negative_cost(self):
        """Costs are non-negative"""
        self.assert_format_error(INSTANCE.replace("e 2 3 2", "e 2 3 -1"), 9)

    def test_unknown_line(self):
        """Only t, s, e and r lines exist"""
        self.assert_format_error(INSTANCE.replace("t 3", "x 3"), 6)

    def test_source_in_general_instance(self):
        """Only single-source instances have a source"""
        self.assert_format_error(INSTANCE.replace("t 3", "s 3"), 6)

    def test_missing_source(self):
        """A single-source file must name its source"""
        with self.assertRaises(FormatError):
            parse_instance(SS_INSTANCE.replace("s 0\n", ""))

    def test_empty(self):
        """Comments alone are not an instance"""
        with self.assertRaises(FormatError):
            parse_instance("# nothing here\n")
