import math
import unittest

import numpy as np
import pytest

from src.dimspec.betashift import delta_bound, perturbation_bound
from src.dimspec.conformal import (
    ContinuedFractionFamily,
    SystemSpec,
    affine_system,
    continued_fraction_system,
)
from src.dimspec.exceptions import (
    InputError,
    PreconditionError,
    ResourceError,
)
from src.dimspec.pressure import (
    METHOD_BETA,
    METHOD_CODED,
    METHOD_FULL,
    METHOD_MARKOV,
    MODE_POINT,
    MODE_SUP,
    DimensionEnclosure,
    PressureEngine,
    bowen_root,
    partition_log,
    pressure_enclosure,
)
from src.dimspec.symbolic import BetaShift, CodedShift, FullShift, MarkovShift


GOLDEN = (1 + math.sqrt(5)) / 2
E2_DIMENSION = 0.5312805062772051


def golden_mean_shift():
    return MarkovShift(2, frozenset({(0, 0), (0, 1), (1, 0)}))


class TestPartitionFunction(unittest.TestCase):
    """Test partition sums over a language level"""

    def setUp(self):
        self.cantor = affine_system([1 / 3, 1 / 3])
        self.dyadic = affine_system([0.5, 0.5])

    def test_cantor(self):
        value = partition_log(FullShift(2), self.cantor, 3, 1.0)

        self.assertAlmostEqual(value, math.log(8 / 27), places=10)

    def test_zero_parameter_counts_words(self):
        """Test t = 0 gives the log of the language size"""
        value = partition_log(golden_mean_shift(), self.dyadic, 6, 0.0)

        self.assertAlmostEqual(value, math.log(21), places=10)

    def test_base_point_mode(self):
        """Test both modes agree when derivatives are constant"""
        sup = partition_log(FullShift(2), self.cantor, 4, 0.7, MODE_SUP)
        point = partition_log(FullShift(2), self.cantor, 4, 0.7, MODE_POINT)

        self.assertAlmostEqual(sup, point, places=10)

    def test_unrefined_continued_fractions(self):
        system = SystemSpec(ContinuedFractionFamily((1, 2)))

        value = partition_log(FullShift(2), system, 1, 1.0)

        self.assertAlmostEqual(value, math.log(1.25), places=10)

    def test_convex_and_decreasing(self):
        """Test log Z(n, t) is convex and decreasing for a contraction"""
        system = continued_fraction_system([1, 2])
        ts = np.linspace(0.0, 1.0, 9)
        values = [partition_log(FullShift(2), system, 6, t) for t in ts]

        for left, right in zip(values, values[1:]):
            self.assertGreater(left, right)
        for a, b, c in zip(values, values[1:], values[2:]):
            self.assertLessEqual(b, (a + c) / 2 + 1e-12)

    def test_invalid_arguments(self):
        with pytest.raises(InputError):
            partition_log(FullShift(2), self.dyadic, 0, 1.0)
        with pytest.raises(InputError):
            partition_log(FullShift(2), self.dyadic, 2, -0.5)
        with pytest.raises(InputError):
            partition_log(FullShift(2), self.dyadic, 2, 1.0, "midpoint")

    def test_word_budget(self):
        with pytest.raises(ResourceError):
            partition_log(FullShift(2), self.dyadic, 12, 1.0, max_words=1000)


class TestPressureEnclosure(unittest.TestCase):
    """Test certified pressure enclosures"""

    def setUp(self):
        self.dyadic = affine_system([0.5, 0.5])

    def test_full_shift_is_exact_for_similarities(self):
        cantor = affine_system([1 / 3, 1 / 3])

        enclosure = pressure_enclosure(FullShift(2), cantor, 5, 0.5)

        expected = math.log(2) - 0.5 * math.log(3)
        self.assertEqual(enclosure.method, METHOD_FULL)
        self.assertLessEqual(enclosure.lower, expected)
        self.assertGreaterEqual(enclosure.upper, expected)
        self.assertLess(enclosure.width, 1e-9)

    def test_golden_mean_markov(self):
        """Test the spectral bracket around log(golden) - t log 2"""
        engine = PressureEngine(golden_mean_shift(), self.dyadic)

        for t in (0.0, 0.5, 1.0):
            enclosure = engine.enclosure(8, t)
            expected = math.log(GOLDEN) - t * math.log(2)
            self.assertEqual(enclosure.method, METHOD_MARKOV)
            self.assertLessEqual(enclosure.lower, expected + 1e-12)
            self.assertGreaterEqual(enclosure.upper, expected - 1e-12)
            self.assertLess(enclosure.width, 1e-6)

    def test_beta_shift(self):
        """Test the inner approximation stays below the true pressure"""
        engine = PressureEngine(BetaShift(GOLDEN), self.dyadic)

        enclosure = engine.enclosure(10, 0.5)

        expected = math.log(GOLDEN) - 0.5 * math.log(2)
        self.assertEqual(enclosure.method, METHOD_BETA)
        self.assertLessEqual(enclosure.lower, expected)
        self.assertGreaterEqual(enclosure.upper, expected)
        self.assertGreater(enclosure.lower, -math.inf)

    def test_junction_window(self):
        engine = PressureEngine(BetaShift(1.5), self.dyadic, max_states=20)

        r = engine.junction_window(12)

        self.assertGreaterEqual(r, 1)
        self.assertLessEqual(r, 12)
        self.assertEqual(
            PressureEngine(golden_mean_shift(), self.dyadic)
            .junction_window(12), 1
        )

    def test_monotone_in_t(self):
        engine = PressureEngine(BetaShift(1.5), self.dyadic)

        uppers = [engine.upper(8, t) for t in (0.0, 0.25, 0.5, 0.75, 1.0)]

        for left, right in zip(uppers, uppers[1:]):
            self.assertGreater(left, right)

    def test_coded_is_upper_only(self):
        shift = CodedShift(((0, ), (1, 0)), 2.0)

        enclosure = pressure_enclosure(shift, self.dyadic, 6, 1.0)

        self.assertEqual(enclosure.method, METHOD_CODED)
        self.assertEqual(enclosure.lower, -math.inf)

    def test_reducible_markov(self):
        shift = MarkovShift(2, frozenset({(0, 0), (0, 1), (1, 1)}))

        with pytest.raises(PreconditionError):
            pressure_enclosure(shift, self.dyadic, 4, 1.0)

        engine = PressureEngine(shift, self.dyadic, upper_only=True)
        self.assertLess(engine.upper(6, 1.0), 0.0)

    def test_alphabet_larger_than_system(self):
        with pytest.raises(InputError):
            PressureEngine(FullShift(3), self.dyadic)

    def test_invalid_arguments(self):
        engine = PressureEngine(FullShift(2), self.dyadic)

        with pytest.raises(InputError):
            engine.enclosure(0, 1.0)
        with pytest.raises(InputError):
            engine.enclosure(3, -1.0)


class TestPressureProperties(unittest.TestCase):
    """Test enclosures against deep partition sums and each other"""

    DEEP = 18

    def setUp(self):
        self.dyadic = affine_system([0.5, 0.5])
        self.e2 = continued_fraction_system([1, 2])
        self.fixtures = [
            (FullShift(2), self.e2),
            (golden_mean_shift(), self.e2),
            (BetaShift(1.5), self.dyadic),
            (BetaShift(1.5), self.e2),
        ]
        self.ts = (0.0, 0.5, 1.0)

    def deep_estimate(self, shift, system, t):
        """Growth rate of Z between the two deepest levels"""
        return (partition_log(shift, system, self.DEEP, t)
                - partition_log(shift, system, self.DEEP - 1, t))

    def test_lower_below_deep_partition(self):
        """Test lower(n, t) <= (1/18) log Z(18, t) for n <= 6"""
        for shift, system in self.fixtures:
            engine = PressureEngine(shift, system)
            for t in self.ts:
                deep = partition_log(shift, system, self.DEEP, t) / self.DEEP
                for n in range(1, 7):
                    self.assertLessEqual(
                        engine.enclosure(n, t).lower, deep + 1e-12,
                        msg=f"{shift.kind} n={n} t={t}"
                    )

    def test_upper_above_deep_estimate(self):
        """Test upper(n, t) stays above the converged growth rate"""
        for shift, system in self.fixtures:
            engine = PressureEngine(shift, system)
            for t in self.ts:
                if isinstance(shift, BetaShift):
                    # entropy log(beta); exact for similarities or t = 0
                    if system is not self.dyadic and t > 0:
                        continue
                    expected = math.log(1.5) - t * math.log(2)
                else:
                    expected = self.deep_estimate(shift, system, t) - 1e-3
                for n in range(1, 7):
                    self.assertGreaterEqual(
                        engine.enclosure(n, t).upper, expected,
                        msg=f"{shift.kind} n={n} t={t}"
                    )

    def test_nested_in_depth(self):
        for shift, system in self.fixtures:
            engine = PressureEngine(shift, system)
            for t in self.ts:
                previous = engine.enclosure(1, t)
                for n in range(2, 9):
                    current = engine.enclosure(n, t)
                    self.assertGreaterEqual(current.lower, previous.lower)
                    self.assertLessEqual(current.upper, previous.upper)
                    previous = current

    def test_slope_bound(self):
        """Test upper(t2) <= upper(t1) + (t2 - t1) log s"""
        pairs = [(0.0, 0.4), (0.2, 0.6), (0.5, 0.9), (0.1, 1.0)]
        for shift, system in self.fixtures:
            engine = PressureEngine(shift, system)
            log_s = math.log(system.s)
            for t1, t2 in pairs:
                low = engine.enclosure(6, t1).upper
                high = engine.enclosure(6, t2).upper
                self.assertLessEqual(
                    high, low + (t2 - t1) * log_s + 1e-6,
                    msg=f"{shift.kind} t1={t1} t2={t2}"
                )

    def test_perturbation_bound(self):
        """Test a base inside delta_bound raises pressure by at most the
        coarse perturbation bound"""
        for system in (self.dyadic, self.e2):
            for beta in (1.3, 1.5, 1.8):
                for k in (2, 3):
                    beta_prime = beta + 0.9 * delta_bound(beta, k)
                    low = PressureEngine(BetaShift(beta), system)
                    high = PressureEngine(BetaShift(beta_prime), system)
                    for t in (0.25, 0.5, 0.75):
                        allowed = perturbation_bound(1, system.K, t, k)
                        self.assertLessEqual(
                            high.enclosure(8, t).upper,
                            low.enclosure(8, t).upper + allowed + 1e-9,
                            msg=f"beta={beta} k={k} t={t}"
                        )


class TestBowenRoot(unittest.TestCase):
    """Test dimension enclosures from pressure zeros"""

    def test_cantor_set(self):
        cantor = affine_system([1 / 3, 1 / 3])

        enclosure = bowen_root(FullShift(2), cantor, 4, 1e-6)

        self.assertTrue(enclosure.contains(math.log(2) / math.log(3)))
        self.assertLessEqual(enclosure.width, 1e-6)

    def test_singleton_shift(self):
        """Test a single point has dimension zero"""
        dyadic = affine_system([0.5, 0.5])

        enclosure = bowen_root(BetaShift(0.5), dyadic, 4, 1e-4)

        self.assertEqual(enclosure.h_lo, 0.0)
        self.assertLessEqual(enclosure.h_hi, 1e-4)

    def test_full_interval(self):
        """Test the dyadic full shift fills the unit interval"""
        dyadic = affine_system([0.5, 0.5])

        enclosure = bowen_root(FullShift(2), dyadic, 3, 1e-6)

        self.assertEqual(enclosure.h_hi, 1.0)
        self.assertGreater(enclosure.h_lo, 1.0 - 1e-6)

    def test_continued_fractions(self):
        system = continued_fraction_system([1, 2])

        enclosure = bowen_root(FullShift(2), system, 12, 1e-4)

        self.assertTrue(enclosure.contains(E2_DIMENSION))
        self.assertLess(enclosure.width, 0.2)

    def test_invalid_tolerance(self):
        with pytest.raises(InputError):
            bowen_root(FullShift(2), affine_system([0.5, 0.5]), 3, 0.0)


class TestDimensionEnclosure(unittest.TestCase):

    def test_intersect(self):
        first = DimensionEnclosure(0.2, 0.6, 4, guard_hits=1)
        second = DimensionEnclosure(0.3, 0.7, 6)

        both = first.intersect(second)

        self.assertEqual((both.h_lo, both.h_hi), (0.3, 0.6))
        self.assertEqual(both.depth, 6)
        self.assertEqual(both.guard_hits, 1)
        self.assertAlmostEqual(both.width, 0.3)
        self.assertFalse(both.budget_exhausted)

    def test_intersect_keeps_budget_flag(self):
        first = DimensionEnclosure(0.2, 0.6, 4)
        second = DimensionEnclosure(0.3, 0.7, 6, budget_exhausted=True)

        self.assertTrue(first.intersect(second).budget_exhausted)
        self.assertTrue(second.intersect(first).budget_exhausted)

    def test_contains(self):
        enclosure = DimensionEnclosure(0.5, 0.5, 1)

        self.assertTrue(enclosure.contains(0.5))
        self.assertFalse(enclosure.contains(0.51))


if __name__ == "__main__":
    unittest.main()
