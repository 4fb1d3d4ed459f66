import math
import unittest

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.dimspec.betashift import (
    continuity_step,
    delta_bound,
    fiber_bound,
    fiber_sizes,
    greedy_expansion,
    inner_sft,
    perturbation_bound,
    replace_word,
    sparse_zero_replacement,
    window_chain_bound,
)
from src.dimspec.exceptions import InputError, PreconditionError
from src.dimspec.symbolic import (
    BetaShift,
    count_language,
    is_word_admissible,
    language,
    parse_word,
)


GOLDEN = (1 + math.sqrt(5)) / 2


class TestGreedyExpansion(unittest.TestCase):
    """Test greedy beta-expansions with the strict digit rule"""

    def test_half_in_base_two(self):
        """Test the strict rule yields the non-terminating expansion"""
        self.assertEqual(greedy_expansion(0.5, 2.0, 4), (0, 1, 1, 1))

    def test_golden_ratio(self):
        self.assertEqual(greedy_expansion(1 / GOLDEN, GOLDEN, 4), (0, 1, 0, 1))

    def test_zero(self):
        self.assertEqual(greedy_expansion(0.0, 1.7, 6), (0, ) * 6)

    def test_expansion_is_admissible(self):
        for t in (0.1, 0.35, 0.72, 0.99):
            word = greedy_expansion(t, 1.5, 10)
            self.assertTrue(is_word_admissible(BetaShift(1.5), word))

    def test_invalid_arguments(self):
        with pytest.raises(InputError):
            greedy_expansion(1.0, 2.0, 3)
        with pytest.raises(InputError):
            greedy_expansion(0.5, 1.0, 3)
        with pytest.raises(InputError):
            greedy_expansion(0.5, 2.0, 0)


class TestDeltaBound(unittest.TestCase):
    """Test the admissible perturbation of the base"""

    def test_values(self):
        self.assertAlmostEqual(delta_bound(1.5, 1), 0.302776, places=6)
        self.assertAlmostEqual(delta_bound(2.0, 1), 0.236068, places=6)

    def test_closed_form(self):
        for beta in (1.2, 1.9, 3.0):
            for k in (1, 2, 5):
                expected = (1 + beta**(2 * k))**(1 / (2 * k)) - beta
                self.assertAlmostEqual(delta_bound(beta, k), expected)

    def test_decreasing_in_k(self):
        for beta in (1.1, 1.5, GOLDEN, 2.5, 4.0):
            bounds = [delta_bound(beta, k) for k in range(1, 9)]
            for smaller, larger in zip(bounds[1:], bounds):
                self.assertLess(smaller, larger)

    def test_window_chain_threshold(self):
        """Test the chain bound crosses 1 at the perturbation bound"""
        for beta, k in [(1.5, 1), (GOLDEN, 2), (2.5, 3)]:
            bound = delta_bound(beta, k)
            self.assertLess(window_chain_bound(beta, 0.9 * bound, k), 1.0)
            self.assertGreater(window_chain_bound(beta, 1.1 * bound, k), 1.0)

    def test_continuity_step(self):
        """Test one radius serves replacement across an interval of bases"""
        radius = continuity_step(1.4, 1.9, 2)

        self.assertEqual(radius, delta_bound(1.9, 2))
        for beta in (1.4, 1.5, 1.65, 1.8, 1.9):
            self.assertLessEqual(radius, delta_bound(beta, 2))
            beta_prime = beta + 0.99 * radius
            for word in language(BetaShift(beta_prime), 8):
                result = replace_word(word, beta, beta_prime, 2)
                self.assertTrue(is_word_admissible(BetaShift(beta), result))

    def test_continuity_step_invalid(self):
        with pytest.raises(InputError):
            continuity_step(1.0, 1.5, 1)
        with pytest.raises(InputError):
            continuity_step(1.6, 1.5, 1)
        with pytest.raises(InputError):
            continuity_step(1.5, 1.6, 0)

    def test_invalid(self):
        with pytest.raises(InputError):
            delta_bound(1.0, 1)
        with pytest.raises(InputError):
            delta_bound(1.5, 0)


class TestSparseZeroReplacement(unittest.TestCase):
    """Test zeroing a sparse set of letters"""

    def test_zero_word(self):
        plan = sparse_zero_replacement((0, ) * 8, 1.5, 1, 1.8)

        self.assertEqual(plan.positions, ())
        self.assertEqual(plan.result, (0, ) * 8)

    def test_adjacent_ones(self):
        """Test a single run keeps its first letter"""
        plan = sparse_zero_replacement(parse_word("11000000"), 1.5, 1, 1.8)

        self.assertEqual(plan.positions, (2, ))
        self.assertEqual(plan.result, parse_word("10000000"))
        self.assertEqual(plan.gap, 1)
        self.assertTrue(is_word_admissible(BetaShift(1.5), plan.result))

    def test_separated_ones(self):
        """Test every isolated letter is its own stretch"""
        plan = sparse_zero_replacement(parse_word("10101010"), 1.5, 1, 1.8)

        self.assertEqual(plan.positions, (1, 3, 5, 7))
        self.assertEqual(plan.result, (0, ) * 8)

    def test_replace_word(self):
        self.assertEqual(replace_word((1, 1), 1.5, 1.8, 1), (1, 0))
        self.assertEqual(replace_word((0, ) * 5, 1.5, 1.8, 1), (0, ) * 5)

    def test_beta_prime_too_large(self):
        with pytest.raises(PreconditionError):
            sparse_zero_replacement((1, 0), 1.5, 1, 1.9)

    def test_source_not_admissible(self):
        """Test the source word must come from the declared base"""
        with pytest.raises(PreconditionError):
            sparse_zero_replacement((1, 1, 1), 1.5, 1, 1.8)

    @settings(max_examples=60, deadline=None)
    @given(
        beta=st.floats(min_value=1.1, max_value=3.5),
        k=st.integers(min_value=1, max_value=3),
        fraction=st.floats(min_value=0.0, max_value=0.95),
        t=st.floats(min_value=0.0, max_value=0.999),
        n=st.integers(min_value=1, max_value=12),
    )
    def test_plan_properties(self, beta, k, fraction, t, n):
        """Test sorted sparse positions and an admissible result"""
        beta_prime = beta + fraction * delta_bound(beta, k)
        word = greedy_expansion(t, beta_prime, n)
        assume(is_word_admissible(BetaShift(beta_prime), word))

        plan = sparse_zero_replacement(word, beta, k, beta_prime)

        self.assertEqual(list(plan.positions), sorted(plan.positions))
        for left, right in zip(plan.positions, plan.positions[1:]):
            self.assertGreater(right - left, k)
        for position in plan.positions:
            self.assertGreater(word[position - 1], 0)
        for before, after in zip(word, plan.result):
            self.assertLessEqual(after, before)
        self.assertTrue(BetaShift(beta).admits(plan.result))


def window_sums(word, beta, start, length=None):
    """Sum of word[start + s - 1] * beta^-s over s = 1..length."""
    stop = len(word) if length is None else min(len(word), start + length)
    return sum(
        word[position] * beta**(start - position - 1)
        for position in range(start, stop)
    )


def admits(word, beta, band=0.0):
    return all(
        window_sums(word, beta, start) < 1.0 - band
        for start in range(len(word))
    )


class TestRandomReplacement(unittest.TestCase):
    """Test replacement on seeded random walks through beta-shift words"""

    TRIALS = 10_000
    MAX_LENGTH = 24

    def random_word(self, rng, beta_prime, n):
        """
        Walk letter by letter, keeping every tail sum clear of 1 so the
        word is admissible for beta_prime with room to spare.
        """
        powers = [beta_prime**-s for s in range(1, n + 1)]
        tails = []
        word = []
        for _ in range(n):
            choices = [
                letter for letter in range(math.ceil(beta_prime))
                if all(tail + letter * powers[len(word) - start] < 1 - 1e-9
                       for start, tail in enumerate(tails))
                and letter * powers[0] < 1 - 1e-9
            ]
            letter = int(rng.choice(choices))
            tails = [tail + letter * powers[len(word) - start]
                     for start, tail in enumerate(tails)]
            tails.append(letter * powers[0])
            word.append(letter)
        return tuple(word)

    def test_random_walks(self):
        """Test plans and the window bound on 10^4 seeded trials"""
        rng = np.random.default_rng(20240611)
        for _ in range(self.TRIALS):
            beta = 2.0 - rng.uniform(0.0, 1.0)
            k = int(rng.integers(1, 4))
            delta = rng.uniform(0.0, 0.99) * delta_bound(beta, k)
            beta_prime = beta + delta
            n = int(rng.integers(1, self.MAX_LENGTH + 1))
            word = self.random_word(rng, beta_prime, n)

            plan = sparse_zero_replacement(word, beta, k, beta_prime)
            result = plan.result

            for left, right in zip(plan.positions, plan.positions[1:]):
                self.assertGreater(right - left, k)
            for position in plan.positions:
                self.assertGreater(word[position - 1], 0)
            for before, after in zip(word, result):
                self.assertLessEqual(after, before)
            self.assertTrue(admits(result, beta), (word, beta, k))

            bound = window_chain_bound(beta, delta, k)
            for i in range(n - 2 * k + 1):
                if result[i] > 0:
                    self.assertLess(
                        window_sums(result, beta, i, 2 * k), bound + 1e-12,
                        (word, beta, k, i)
                    )

    def test_walks_are_admissible(self):
        rng = np.random.default_rng(7)
        for beta_prime in (1.2, GOLDEN, 2.1):
            for _ in range(50):
                word = self.random_word(rng, beta_prime, 16)
                self.assertTrue(
                    is_word_admissible(BetaShift(beta_prime), word)
                )
                self.assertTrue(admits(word, beta_prime))


class TestFibers(unittest.TestCase):
    """Test preimage counts of the word map"""

    def test_fiber_bound_values(self):
        self.assertEqual(fiber_bound(4, 2, 1), 4 * 6)
        self.assertEqual(fiber_bound(5, 2, 1), 4 * 10)
        self.assertEqual(fiber_bound(6, 3, 2), 4 * 4 * 15)

    def test_exhaustive_fibers(self):
        """Test brute-force fibers stay under the combinatorial bound"""
        beta, k = 1.5, 2
        beta_prime = beta + 0.9 * delta_bound(beta, k)
        for n in (4, 6, 8):
            sizes = fiber_sizes(n, beta, beta_prime, k)

            self.assertLessEqual(max(sizes.values()), fiber_bound(n, k, 1))
            self.assertEqual(
                sum(sizes.values()), count_language(BetaShift(beta_prime), n)
            )
            for image in sizes:
                self.assertTrue(is_word_admissible(BetaShift(beta), image))


class TestPerturbationBound(unittest.TestCase):

    def test_sharp_never_larger(self):
        for k in range(2, 12):
            for t in (0.0, 0.5, 1.0):
                sharp = perturbation_bound(1, 2.0, t, k, sharp=True)
                coarse = perturbation_bound(1, 2.0, t, k)
                self.assertLessEqual(sharp, coarse + 1e-12)

    def test_coarse_value(self):
        expected = (math.log(2) + 0.5 * math.log(4.0) + 2 * math.log(3)) / 3

        self.assertAlmostEqual(perturbation_bound(2, 4.0, 0.5, 3), expected)

    def test_vanishes_with_k(self):
        self.assertLess(perturbation_bound(1, 1.0, 1.0, 1000), 0.02)

    def test_invalid(self):
        with pytest.raises(InputError):
            perturbation_bound(0, 1.0, 1.0, 2)


class TestInnerSft(unittest.TestCase):
    """Test the finite-type inner approximation"""

    def test_short_window_is_degenerate(self):
        spec = inner_sft(GOLDEN, 2)

        self.assertAlmostEqual(spec.margin, 1 / GOLDEN)
        self.assertEqual(count_language(spec, 4), 1)

    def test_containment(self):
        spec = inner_sft(GOLDEN, 8)
        outer = BetaShift(GOLDEN)

        for n in (8, 12):
            for word in language(spec, n):
                self.assertTrue(is_word_admissible(outer, word))

    def test_grows_with_window(self):
        for beta in (1.3, GOLDEN, 1.9):
            counts = [count_language(inner_sft(beta, m), 10)
                      for m in (4, 6, 8, 10)]
            self.assertEqual(counts, sorted(counts))

    def test_invalid(self):
        with pytest.raises(InputError):
            inner_sft(1.0, 4)


if __name__ == "__main__":
    unittest.main()
