import unittest

import numpy as np

from src.continuous import (
    bump_counterexample_pair,
    bump_train,
    check_multiple_ordering_cont,
    check_norm_laws_cont,
    check_partition_inequality_cont,
    check_reverse_counterexample,
    check_two_scale_bound_cont,
    integrate_power,
    interval_pnorm,
    is_factor,
    single_bump,
)
from src.errors import (
    BadOrderError,
    EmptySupportError,
    InvalidEpsilonError,
    InvalidExponentError,
    InvalidLengthError,
    InvalidPartitionError,
    InvalidStepFunctionError,
    NonFiniteInputError,
    NotACounterexampleCaseError,
)
from src.models import StepFunction


class TestStepFunction(unittest.TestCase):

    def setUp(self):
        self.f = StepFunction([0.0, 1.0, 2.0], [1.0, 2.0])

    def test_equal_neighbours_are_merged(self):
        f = StepFunction([0, 1, 2, 3], [1, 1, 2])
        np.testing.assert_array_equal(f.breakpoints, [0, 2, 3])
        np.testing.assert_array_equal(f.values, [1, 2])
        self.assertEqual(f.n_pieces, 2)

    def test_evaluate(self):
        np.testing.assert_array_equal(self.f.evaluate([-1, 0, 0.5, 1, 1.5, 2, 3]), [0, 1, 1, 2, 2, 0, 0])

    def test_add_uses_union_grid(self):
        total = StepFunction([0, 1], [1]).add(StepFunction([0.5, 2], [2]))
        np.testing.assert_array_equal(total.breakpoints, [0, 0.5, 1, 2])
        np.testing.assert_array_equal(total.values, [1, 3, 2])

    def test_scaled_and_shifted(self):
        np.testing.assert_array_equal(self.f.scaled(-2).values, [-2, -4])
        np.testing.assert_array_equal(self.f.shifted(0.5).breakpoints, [0.5, 1.5, 2.5])
        self.assertEqual(self.f.support_length, 2.0)
        self.assertEqual(self.f.max_abs(), 2.0)

    def test_frame_has_trailing_empty_value(self):
        frame = self.f.to_frame()
        self.assertEqual(list(frame['breakpoint']), [0.0, 1.0, 2.0])
        self.assertTrue(np.isnan(frame['value'].iloc[-1]))

    def test_errors(self):
        with self.assertRaises(EmptySupportError):
            StepFunction([0.0], [])
        with self.assertRaises(InvalidStepFunctionError):
            StepFunction([1.0, 0.0], [1.0])
        with self.assertRaises(InvalidStepFunctionError):
            StepFunction([0.0, 1.0, 2.0], [1.0])
        with self.assertRaises(NonFiniteInputError):
            StepFunction([0.0, float('inf')], [1.0])
        with self.assertRaises(NonFiniteInputError):
            StepFunction([0.0, 1.0], [float('nan')])


class TestIntervalPnorm(unittest.TestCase):

    def test_zero_function(self):
        result = interval_pnorm(StepFunction([0, 1], [0]), 2, 0.5)
        self.assertEqual(result.value, 0.0)

    def test_single_bump_is_covered(self):
        result = interval_pnorm(single_bump(0.5, 1), 1, 1)
        self.assertAlmostEqual(result.value_pow_p, 1.0, places=14)
        self.assertEqual(result.arg_left, -0.5)

    def test_interior_interval(self):
        result = interval_pnorm(StepFunction([0, 1], [3]), 2, 0.5)
        self.assertAlmostEqual(result.value_pow_p, 9.0, places=12)
        self.assertAlmostEqual(result.value, 3.0, places=12)
        self.assertEqual(result.arg_left, 0.0)

    def test_power_overflow_keeps_value(self):
        result = interval_pnorm(StepFunction([0, 1], [10]), 400, 0.5)
        self.assertAlmostEqual(result.value, 10.0, places=12)
        self.assertEqual(result.value_pow_p, float('inf'))
        self.assertEqual(result.arg_left, 0.0)
        result = interval_pnorm(StepFunction([0, 2, 3], [1e200, -1e100]), 2, 1)
        self.assertEqual(result.value, 1e200)
        self.assertEqual(result.value_pow_p, float('inf'))
        self.assertEqual(result.arg_left, 0.0)

    def test_interval_longer_than_support(self):
        f = StepFunction([0, 1, 3], [2, -1])
        result = interval_pnorm(f, 1, 10)
        self.assertAlmostEqual(result.value_pow_p, 0.4, places=14)

    def test_integrate_power(self):
        f = StepFunction([0, 1, 3], [2, -1])
        self.assertAlmostEqual(integrate_power(f, 2, 0.5, 2), 3.0, places=14)
        self.assertEqual(integrate_power(f, 2, 2, 2), 0.0)
        self.assertAlmostEqual(integrate_power(f, 1, -5, 5), 4.0, places=14)

    def test_sweep_dominates_random_positions(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            breakpoints = np.unique(rng.uniform(0, 10, 12))
            f = StepFunction(breakpoints, rng.uniform(-5, 5, breakpoints.size - 1))
            p = float(rng.choice([1.0, 2.0, 3.0]))
            T = float(rng.uniform(0.1, 4))
            best = interval_pnorm(f, p, T).value_pow_p
            for t in rng.uniform(breakpoints[0] - T - 1, breakpoints[-1] + 1, 1000):
                self.assertLessEqual(integrate_power(f, p, t, t + T) / T, best * (1 + 1e-12))

    def test_objective_is_linear_between_candidates(self):
        f = StepFunction([0, 0.7, 1.3, 2.9, 4.0], [1, -2, 0.5, 3])
        T = 1.1
        candidates = np.unique(np.concatenate((f.breakpoints, f.breakpoints - T)))
        for left, right in zip(candidates[:-1], candidates[1:]):
            g_left = integrate_power(f, 2, left, left + T)
            g_right = integrate_power(f, 2, right, right + T)
            mid = 0.5 * (left + right)
            average = 0.5 * (g_left + g_right)
            at_mid = integrate_power(f, 2, mid, mid + T)
            self.assertLessEqual(abs(at_mid - average), 1e-12 * max(abs(average), np.finfo(float).tiny))

    def test_translation_invariance_exact(self):
        f = StepFunction([0, 0.5, 1.25, 2, 3.5], [1, -3, 2, 0.25])
        base = interval_pnorm(f, 2, 0.75)
        for delta in (0.375, -17.5, 1024.125):
            moved = interval_pnorm(f.shifted(delta), 2, 0.75)
            self.assertLessEqual(abs(moved.value_pow_p - base.value_pow_p), 1e-12 * base.value_pow_p)
            self.assertEqual(moved.arg_left, base.arg_left + delta)

    def test_translation_invariance_arbitrary_shift(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            breakpoints = np.unique(rng.uniform(0, 10, 8))
            f = StepFunction(breakpoints, rng.uniform(-5, 5, breakpoints.size - 1))
            T = float(rng.uniform(0.1, 5))
            base = interval_pnorm(f, 1.5, T).value_pow_p
            moved = interval_pnorm(f.shifted(float(rng.uniform(-100, 100))), 1.5, T).value_pow_p
            self.assertLessEqual(abs(moved - base), 1e-12 * base)

    def test_errors(self):
        f = single_bump(1, 1)
        with self.assertRaises(InvalidLengthError):
            interval_pnorm(f, 1, 0)
        with self.assertRaises(InvalidLengthError):
            interval_pnorm(f, 1, float('inf'))
        with self.assertRaises(InvalidExponentError):
            interval_pnorm(f, 0, 1)


class TestBumps(unittest.TestCase):

    def test_single_bump_heights(self):
        self.assertEqual(single_bump(1, 1).values[0], 1.0)
        self.assertEqual(single_bump(0.25, 1).values[0], 4.0)
        self.assertAlmostEqual(single_bump(0.25, 2).values[0], 2.0, places=14)
        np.testing.assert_array_equal(single_bump(0.25, 2).breakpoints, [0, 0.25])
        with self.assertRaises(InvalidEpsilonError):
            single_bump(0, 1)

    def test_bump_train_shape(self):
        train = bump_train(1, 2.5, 1)
        self.assertEqual(train.d, 2)
        self.assertAlmostEqual(train.eps, 1 / 12, places=15)
        self.assertEqual(train.f.n_pieces, 5)

    def test_bump_train_pairs(self):
        check = bump_counterexample_pair(1, 2.5, 1)
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 1.0, places=12)
        self.assertAlmostEqual(check.rhs, 1.2, places=12)

        check = bump_counterexample_pair(2, 3, 2)
        self.assertTrue(check.passed)
        self.assertEqual(check.details['d'], 1)
        self.assertAlmostEqual(check.details['eps'], 0.25)
        self.assertAlmostEqual(check.lhs, 0.5, places=12)
        self.assertAlmostEqual(check.rhs, 2 / 3, places=12)

    def test_bump_train_rejects_multiples(self):
        with self.assertRaises(NotACounterexampleCaseError):
            bump_train(1, 2, 1)
        with self.assertRaises(NotACounterexampleCaseError):
            bump_train(0.1, 0.3, 1)
        with self.assertRaises(NotACounterexampleCaseError):
            bump_train(2, 1, 1)

    def test_is_factor(self):
        self.assertTrue(is_factor(0.1, 0.3))
        self.assertFalse(is_factor(1, 2.5))

    def test_bump_train_exactness_random_pairs(self):
        rng = np.random.default_rng(50)
        for _ in range(50):
            T = float(rng.uniform(0.1, 5))
            S = T * (int(rng.integers(1, 8)) + float(rng.uniform(0.05, 0.95)))
            for p in (1.0, 2.0):
                train = bump_train(T, S, p)
                at_T = interval_pnorm(train.f, p, T).value_pow_p
                at_S = interval_pnorm(train.f, p, S).value_pow_p
                self.assertLessEqual(abs(T * at_T - 1), 1e-12)
                self.assertLessEqual(abs(S * at_S - (train.d + 1)) / (train.d + 1), 1e-12)
                self.assertLess(1 / T, (train.d + 1) / S)
                self.assertTrue(bump_counterexample_pair(T, S, p).passed)

    def test_reverse_counterexample(self):
        for T, S, p, lhs, rhs in ((1, 2, 1, 0.5, 1.0), (1, 2.5, 2, 0.4, 1.0), (0.5, 1, 1, 1.0, 2.0)):
            check = check_reverse_counterexample(T, S, p)
            self.assertTrue(check.passed)
            self.assertAlmostEqual(check.lhs, lhs, places=12)
            self.assertAlmostEqual(check.rhs, rhs, places=12)
        with self.assertRaises(BadOrderError):
            check_reverse_counterexample(2, 1, 1)


class TestContinuousBounds(unittest.TestCase):

    def setUp(self):
        self.train = bump_train(1, 2.5, 1).f
        self.f = StepFunction([0, 0.3, 1.1, 2.0, 4.4], [2, -1, 0, 3])

    def test_partition_identity(self):
        check = check_partition_inequality_cont(self.f, 2, [1.5])
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, check.rhs, places=12)

    def test_partition_examples(self):
        check = check_partition_inequality_cont(self.train, 1, [1, 1])
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 1.0, places=12)
        self.assertAlmostEqual(check.rhs, 1.0, places=12)

        check = check_partition_inequality_cont(single_bump(0.5, 1), 1, [0.5, 0.5])
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 1.0, places=12)
        self.assertAlmostEqual(check.rhs, 2.0, places=12)

        with self.assertRaises(InvalidPartitionError):
            check_partition_inequality_cont(self.f, 1, [])
        with self.assertRaises(InvalidPartitionError):
            check_partition_inequality_cont(self.f, 1, [1, -1])

    def test_multiple_ordering(self):
        check = check_multiple_ordering_cont(self.f, 1, 0.7, 1)
        self.assertTrue(check.passed)
        self.assertEqual(check.lhs, check.rhs)

        check = check_multiple_ordering_cont(single_bump(0.1, 1), 1, 0.5, 3)
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 1 / 1.5, places=12)
        self.assertAlmostEqual(check.rhs, 2.0, places=12)

        check = check_multiple_ordering_cont(self.train, 1, 1, 2)
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.rhs, 1.0, places=12)

        with self.assertRaises(InvalidPartitionError):
            check_multiple_ordering_cont(self.f, 1, 1, 0)

    def test_two_scale_bound(self):
        check = check_two_scale_bound_cont(self.train, 1, 1, 2.5)
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.details['factor'], 1.2)
        self.assertAlmostEqual(check.lhs, 1.2, places=12)
        self.assertAlmostEqual(check.rhs, 1.2, places=12)

        check = check_two_scale_bound_cont(single_bump(0.1, 1), 1, 1, 1.5)
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 1 / 1.5, places=12)
        self.assertAlmostEqual(check.rhs, 2 / 1.5, places=12)

        with self.assertRaises(BadOrderError):
            check_two_scale_bound_cont(self.f, 1, 2, 2)

    def test_norm_laws(self):
        g = StepFunction([-1, 0.5, 3], [1.5, -4])
        for p in (1, 2, 3):
            checks = check_norm_laws_cont(self.f, g, p, 0.8, -2.5)
            self.assertEqual([c.name for c in checks],
                             ['homogeneity_cont', 'triangle_inequality_cont', 'definiteness_cont'])
            self.assertTrue(all(c.passed for c in checks))
        zero = check_norm_laws_cont(StepFunction([0, 1], [0]), g, 1, 0.5, 3.0)
        self.assertTrue(all(c.passed for c in zero))

    def test_bounds_need_norm_exponent(self):
        with self.assertRaises(InvalidExponentError):
            check_two_scale_bound_cont(self.f, 0.5, 1, 2.5)


if __name__ == '__main__':
    unittest.main()
