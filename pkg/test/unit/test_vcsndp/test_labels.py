"""Unit tests for label arithmetic and parameter derivation"""
import math
from unittest import TestCase

import numpy as np
from hypothesis import given, settings, strategies as st

from vcsndp.labels import (Alphabet, FamilyParams, GoodFamily, Label, ParameterError, Variant, agreement,
                           derive_params, escalate, infer_escalations, neighborhood, seed_pair, subsets_from_labels,
                           subsets_from_matrix, triple_agreement)


class TestAgreement(TestCase):
    """Tests for agreement and triple_agreement"""

    def test_agreement_identity(self):
        """A label agrees with itself everywhere"""
        self.assertEqual(3, agreement(Label.parse("000"), Label.parse("000")))

    def test_agreement_seed_pair(self):
        """mu and nu agree once per block"""
        self.assertEqual(2, agreement(Label.parse("000000"), Label.parse("012012")))

    def test_agreement_cyclic_shift(self):
        """A cyclic shift of 012 has no fixed column"""
        self.assertEqual(0, agreement(Label.parse("012"), Label.parse("120")))

    def test_agreement_length_mismatch(self):
        """Labels of different lengths are rejected"""
        with self.assertRaises(ValueError):
            agreement((0, 1), (0, 1, 2))

    def test_triple_agreement(self):
        """Only column 0 carries the same character in all three"""
        self.assertEqual(1, triple_agreement(Label.parse("000000"), Label.parse("012012"), Label.parse("010212")))
        self.assertEqual(3, triple_agreement((0, 0, 0), (0, 0, 0), (0, 0, 0)))

    def test_triple_agreement_dominated(self):
        """No pairwise agreement means no triple agreement"""
        self.assertEqual(0, triple_agreement(Label.parse("012"), Label.parse("120"), Label.parse("012")))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), gamma=st.integers(1, 30), size=st.integers(2, 6))
    def test_agreement_properties(self, seed, gamma, size):
        """Agreement is symmetric, maximal on the diagonal, and bounds triple agreement"""
        rng = np.random.default_rng(seed)
        s1, s2, s3 = (tuple(int(c) for c in rng.integers(0, size, gamma)) for _ in range(3))
        self.assertEqual(agreement(s1, s2), agreement(s2, s1))
        self.assertEqual(gamma, agreement(s1, s1))
        self.assertLessEqual(triple_agreement(s1, s2, s3),
                             min(agreement(s1, s2), agreement(s1, s3), agreement(s2, s3)))


class TestParams(TestCase):
    """Tests for FamilyParams, seed_pair and derive_params"""

    def test_alphabet_too_small(self):
        """A one character alphabet is rejected"""
        with self.assertRaises(ParameterError):
            Alphabet(1)

    def test_params_inconsistent_thresholds(self):
        """alpha and beta must follow from gamma"""
        with self.assertRaises(ParameterError):
            FamilyParams(n=2, k=1, alphabet=Alphabet(2), gamma=4, alpha=3, beta=1)

    def test_params_ratio_too_small(self):
        """alpha/beta must exceed k"""
        with self.assertRaises(ParameterError):
            FamilyParams.for_gamma(n=2, k=2, alphabet_size=2, gamma=4)

    def test_escalations_not_compared(self):
        """Escalation count is provenance only"""
        a = FamilyParams.for_gamma(n=4, k=1, alphabet_size=2, gamma=8)
        b = FamilyParams.for_gamma(n=4, k=1, alphabet_size=2, gamma=8, escalations=3)
        self.assertEqual(a, b)

    def test_seed_pair(self):
        """The seed labels for a few alphabets"""
        params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=3, gamma=6)
        self.assertEqual((Label.parse("000000"), Label.parse("012012")), seed_pair(params))
        params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=2, gamma=4)
        self.assertEqual((Label.parse("0000"), Label.parse("0101")), seed_pair(params))
        params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=3, gamma=7)
        self.assertEqual((Label.parse("0000000"), Label.parse("0120120")), seed_pair(params))

    def test_derive_params_general(self):
        """n=64, k=2 gives |A|=4 and gamma=68"""
        params = derive_params(64, 2, Variant.GENERAL, c_mult=2, zeta=1)
        self.assertEqual(4, params.alphabet.size)
        self.assertEqual(68, params.gamma)
        self.assertEqual((17, 5), (params.alpha, params.beta))
        self.assertGreater(params.ratio, 2)

    def test_derive_params_single_source(self):
        """n=64, k=3 single-source gives |A|=6 and gamma=30"""
        params = derive_params(64, 3, "ss", c_mult=2, zeta=1)
        self.assertEqual(Variant.SINGLE_SOURCE, params.variant)
        self.assertEqual((6, 30, 30, 5), (params.alphabet.size, params.gamma, params.alpha, params.beta))

    def test_derive_params_smallest(self):
        """n=2, k=1 rounds gamma up to a multiple of |A|"""
        params = derive_params(2, 1)
        self.assertEqual(4, params.gamma)
        self.assertEqual(0, params.gamma % params.alphabet.size)
        self.assertGreaterEqual(params.gamma, params.alphabet.size)

    def test_derive_params_grid(self):
        """gamma matches an independent recomputation and alpha/beta > k on a grid"""
        for n in (2, 16, 64, 128, 256):
            for k in (1, 2, 3, 4, 5):
                params = derive_params(n, k)
                size = 2 * k
                raw = math.ceil(size ** 2 * math.log(n))
                self.assertEqual(max(size, -(-raw // size) * size), params.gamma)
                self.assertGreater(params.alpha, k * params.beta)

    def test_derive_params_bad_c_mult(self):
        """c_mult=1 with k=1 leaves a one character alphabet"""
        with self.assertRaises(ParameterError):
            derive_params(16, 1, c_mult=1)

    def test_escalate(self):
        """gamma grows by half and stays a multiple of |A|"""
        params = derive_params(16, 2)
        bigger = escalate(params)
        self.assertEqual(1, bigger.escalations)
        self.assertGreaterEqual(bigger.gamma, math.ceil(1.5 * params.gamma))
        self.assertEqual(0, bigger.gamma % bigger.alphabet.size)
        self.assertEqual(FamilyParams.thresholds_for(bigger.gamma, 4, Variant.GENERAL), (bigger.alpha, bigger.beta))

    def test_infer_escalations(self):
        """The escalation count is recovered from gamma"""
        params = escalate(escalate(derive_params(16, 2)))
        self.assertEqual(2, infer_escalations(params, c_mult=2, zeta=1))
        odd = FamilyParams.for_gamma(n=16, k=2, alphabet_size=4, gamma=params.gamma + 4)
        self.assertIsNone(infer_escalations(odd, c_mult=2, zeta=1))


class TestFamily(TestCase):
    """Tests for GoodFamily and the subset view"""

    def setUp(self):
        self.params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=2, gamma=4)

    def test_family_rejects_duplicates(self):
        """Labels must be distinct"""
        with self.assertRaises(ValueError):
            GoodFamily(self.params, (Label.parse("0000"), Label.parse("0000")))

    def test_family_rejects_bad_character(self):
        """Characters must be in the alphabet"""
        with self.assertRaises(ValueError):
            GoodFamily(self.params, (Label.parse("0000"), Label.parse("0200")))

    def test_family_rejects_wrong_length(self):
        """Labels must have length gamma"""
        with self.assertRaises(ValueError):
            GoodFamily(self.params, (Label.parse("0000"), Label.parse("011")))

    def test_subsets_tiny(self):
        """The four subsets of {00, 01}"""
        subsets = dict(subsets_from_matrix(np.array([[0, 0], [0, 1]]), 2))
        self.assertEqual({(0, 0): {0, 1}, (0, 1): set(), (1, 0): {0}, (1, 1): {1}}, subsets)

    def test_subsets_seed_pair(self):
        """Only nu has character 1 at position 1"""
        params = FamilyParams.for_gamma(n=2, k=1, alphabet_size=3, gamma=6)
        fam = GoodFamily(params, seed_pair(params))
        self.assertEqual(frozenset({1}), dict(subsets_from_labels(fam))[(1, 1)])

    def test_matrix_read_only(self):
        """The cached matrix cannot be written"""
        fam = GoodFamily(self.params, (Label.parse("0000"), Label.parse("0101")))
        with self.assertRaises(ValueError):
            fam.matrix[0, 0] = 1

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 8))
    def test_subsets_partition_and_neighborhoods(self, seed, n):
        """Each column partitions the terminals, and agreement counts shared subsets"""
        params = FamilyParams.for_gamma(n=n, k=1, alphabet_size=3, gamma=9)
        rng = np.random.default_rng(seed)
        rows = set()
        while len(rows) < n:
            rows.add(tuple(int(c) for c in rng.integers(0, 3, 9)))
        fam = GoodFamily(params, tuple(Label(row) for row in sorted(rows)))

        subsets = subsets_from_labels(fam)
        self.assertEqual(n * params.gamma, sum(len(members) for _, members in subsets))
        for j in range(params.gamma):
            column = [members for (col, _), members in subsets if col == j]
            self.assertEqual(set(range(n)), set().union(*column))
            self.assertEqual(n, sum(len(members) for members in column))
        for i in range(n):
            self.assertEqual(params.gamma, len(neighborhood(fam, i)))
            for j in range(n):
                self.assertEqual(agreement(fam.labels[i], fam.labels[j]),
                                 len(neighborhood(fam, i) & neighborhood(fam, j)))
