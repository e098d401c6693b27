import math
from unittest import TestCase

import numpy as np

from test import testing_common  # noqa: F401

from orliczlab.lib.exceptions import BudgetExceeded, ConfigurationError, RankMismatch
from orliczlab.lib.exponents import ExtExp
from orliczlab.lib.opnorm import VectorValuedOp, lift_vector_valued, operator_norm, opnorm_ascent
from orliczlab.lib.tensor import MixedNormSpec, flat_norm, mixed_norm
from orliczlab.lib.witness import (
    WitnessFamily,
    WitnessKind,
    diagonal_witness,
    hadamard_witness,
    pinned_diagonal_witness,
    random_sign_tensor,
)


class TestDiagonalWitness(TestCase):
    def test_scalar(self):
        np.testing.assert_array_equal(np.eye(3), diagonal_witness(2, 3).array)
        tensor = diagonal_witness(3, 2, c=[1.0, 2.0])
        self.assertEqual(1.0, tensor.array[0, 0, 0])
        self.assertEqual(2.0, tensor.array[1, 1, 1])
        self.assertEqual(3.0, np.abs(tensor.array).sum())
        with self.assertRaises(RankMismatch):
            diagonal_witness(2, 3, c=[1.0, 2.0])

    def test_vector_valued(self):
        op = diagonal_witness(2, 4, codomain_r='2')
        self.assertIsInstance(op, VectorValuedOp)
        self.assertEqual((4, 4, 4), op.tensor.dims)
        self.assertEqual(4, op.d)
        for q1 in ['1', '2', '3', 'inf']:
            expected = 1.0 if q1 == 'inf' else 4 ** (1 / ExtExp.of(q1).to_float())
            self.assertAlmostEqual(expected, op.mixed_norm([q1, '2']), places=12)

    def test_mixed_norm_identity_for_any_inner_exponents(self):
        c = np.array([3.0, -1.0, 0.5, 2.0])
        tensor = diagonal_witness(3, 4, c=c)
        for q in ['1', '4/3', '2', 'inf']:
            expected = mixed_norm(diagonal_witness(1, 4, c=c), MixedNormSpec.natural([q]))
            for inner in [('1', '1'), ('3', 'inf'), ('inf', '2')]:
                value = mixed_norm(tensor, MixedNormSpec.natural((q,) + inner))
                self.assertAlmostEqual(expected, value, places=12)

    def test_vector_norm_law(self):
        """Lifted norm n^max(0, 1/r - sum 1/p_k), also found by the ascent."""
        for p, r in [(['inf', 'inf'], '2'), (['4', '4'], '2'), (['4', 'inf'], '2'),
                     (['inf', 'inf'], '3'), (['6', '6'], '4'), (['3', '4'], '2')]:
            for n in [2, 3, 5]:
                op = diagonal_witness(2, n, codomain_r=r, p=p)
                tensor, lifted_p = lift_vector_valued(op)
                exponent = max(
                    0.0, ExtExp.of(r).recip - sum(ExtExp.of(x).recip for x in p))
                expected = n ** float(exponent)
                closed = operator_norm(tensor, lifted_p).value
                self.assertAlmostEqual(expected, closed, delta=1e-9 * expected)
                ascent = opnorm_ascent(tensor, lifted_p, starts=32, seed=n).value
                self.assertAlmostEqual(expected, ascent, delta=1e-6 * expected)

    def test_regime_with_unit_norm(self):
        # sum 1/p_k >= 1/r
        op = diagonal_witness(3, 4, codomain_r='2', p=['4', '4', 'inf'])
        tensor, p = lift_vector_valued(op)
        self.assertAlmostEqual(1.0, operator_norm(tensor, p).value, places=12)


class TestPinnedDiagonalWitness(TestCase):
    def test_single_pin(self):
        tensor = pinned_diagonal_witness(3, 2, 1)
        expected = np.zeros((2, 2, 2))
        expected[0, 0, 0] = expected[0, 1, 1] = 1.0
        np.testing.assert_array_equal(expected, tensor.array)

    def test_row(self):
        tensor = pinned_diagonal_witness(2, 5, 1)
        expected = np.zeros((5, 5))
        expected[0, :] = 1.0
        np.testing.assert_array_equal(expected, tensor.array)

    def test_maximal_pins(self):
        tensor = pinned_diagonal_witness(4, 3, 3)
        np.testing.assert_array_equal(np.ones(3), tensor.array[0, 0, 0, :])
        self.assertEqual(3.0, tensor.array.sum())

    def test_pin_range(self):
        with self.assertRaises(RankMismatch):
            pinned_diagonal_witness(3, 2, 0)
        with self.assertRaises(RankMismatch):
            pinned_diagonal_witness(3, 2, 3)


class TestHadamardWitness(TestCase):
    def test_orders(self):
        np.testing.assert_array_equal([[1.0]], hadamard_witness(0).array)
        np.testing.assert_array_equal([[1, 1], [1, -1]], hadamard_witness(1).array)
        h2 = hadamard_witness(2).array
        np.testing.assert_array_equal(h2, np.block([[h2[:2, :2], h2[:2, :2]],
                                                    [h2[:2, :2], -h2[:2, :2]]]))

    def test_ratios(self):
        outer_two = MixedNormSpec((1, 2), ('2', '1'))
        h1 = hadamard_witness(1)
        self.assertAlmostEqual(
            math.sqrt(2), mixed_norm(h1, outer_two) / operator_norm(h1, ['inf', 'inf']).value,
            places=12)
        h2 = hadamard_witness(2)
        self.assertEqual(8.0, operator_norm(h2, ['inf', 'inf']).value)
        self.assertAlmostEqual(8.0, mixed_norm(h2, outer_two), places=12)

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            hadamard_witness(40)


class TestRandomSignTensor(TestCase):
    def test_determinism(self):
        first = random_sign_tensor((2, 2), 7)
        self.assertEqual(first, random_sign_tensor((2, 2), 7))
        self.assertEqual({-1.0, 1.0} | set(first.array.ravel()), {-1.0, 1.0})
        self.assertEqual(first, random_sign_tensor((2, 2), [7]))

    def test_streams_differ(self):
        self.assertNotEqual(random_sign_tensor((8, 8), (1, 8)),
                            random_sign_tensor((8, 8), (1, 9)))

    def test_norm_identities(self):
        for n in [3, 6, 10]:
            tensor = random_sign_tensor((n, n), n)
            for q in ['1', '2', '5/2']:
                expected = n ** (1 + 1 / ExtExp.of(q).to_float())
                value = mixed_norm(tensor, MixedNormSpec((1, 2), (q, '1')))
                self.assertAlmostEqual(expected, value, delta=1e-12 * expected)
            self.assertAlmostEqual(n, flat_norm(tensor, '2'), places=12)


class TestWitnessFamily(TestCase):
    def test_emit(self):
        family = WitnessFamily(kind='random-sign', m=3, seed=5)
        self.assertEqual(random_sign_tensor((4, 4, 4), (5, 4)), family.emit(4))
        self.assertEqual(random_sign_tensor((4, 4, 4), (6, 4)), family.emit(4, seed=6))
        hadamard = WitnessFamily(kind=WitnessKind.HADAMARD)
        self.assertEqual(hadamard_witness(3), hadamard.emit(8))
        with self.assertRaises(ConfigurationError):
            hadamard.emit(6)
        pinned = WitnessFamily(kind='pinned-diagonal', m=3, pins=1)
        self.assertEqual(pinned_diagonal_witness(3, 4, 1), pinned.emit(4))
        vector = WitnessFamily(kind='diagonal', codomain_r='2')
        op = vector.emit(3, p=['4', '4'])
        self.assertEqual(ExtExp.of(4), op.p[0])

    def test_invalid_descriptors(self):
        with self.assertRaises(ConfigurationError):
            WitnessFamily(kind='gaussian')
        with self.assertRaises(ConfigurationError):
            WitnessFamily(kind='random-sign', codomain_r='2')
        with self.assertRaises(ConfigurationError):
            WitnessFamily(kind='pinned-diagonal', m=3)
        with self.assertRaises(ConfigurationError):
            WitnessFamily.from_json({'m': 2})
        with self.assertRaises(ConfigurationError):
            WitnessFamily(kind='diagonal').emit()

    def test_json_round_trip(self):
        family = WitnessFamily(kind='diagonal', m=2, n=4, seed=3, codomain_r='2')
        data = family.to_json()
        self.assertEqual({'kind': 'diagonal', 'm': 2, 'n': 4, 'seed': 3,
                          'codomain_r': '2'}, data)
        self.assertEqual(family, WitnessFamily.from_json(data))
