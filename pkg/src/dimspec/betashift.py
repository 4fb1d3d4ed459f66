"""
Beta-expansion arithmetic and sparse zero replacement.

The replacement takes a word admissible for a slightly larger base and
zeroes a sparse set of its nonzero letters so that the result becomes
admissible for the smaller base. This gives the word map f_n from
L_n(X_beta') to L_n(X_beta) and the fiber and pressure estimates built on it.
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Tuple

from ._internal_utils import GUARD_BAND
from ._logging import get_logger
from .exceptions import InputError, InternalError, PreconditionError
from .symbolic import (
    DEFAULT_MAX_WORDS,
    BetaShift,
    InnerSftSpec,
    Word,
    count_language,
    format_word,
    is_word_admissible,
    language,
)


logger = get_logger(__name__)


@dataclass(frozen=True)
class ReplacementPlan:
    """
    Result of a sparse zero replacement.

    ``positions`` are 1-indexed, sorted and pairwise more than ``gap``
    apart; ``source`` is nonzero on each of them and ``result`` is
    ``source`` with those letters zeroed.
    """
    positions: Tuple[int, ...]
    source: Word
    result: Word
    gap: int


def greedy_expansion(t: float, beta: float, n: int) -> Word:
    """
    First n digits of the greedy expansion of t in base beta.

    Each digit is the largest integer a with a * beta^-k strictly below the
    current remainder, floored at 0. A scaled remainder within the guard
    band of an integer counts as equal to it.

    Args:
        t: Value in [0, 1)
        beta: Base, greater than 1
        n: Number of digits

    Returns:
        The digit word a_1 ... a_n

    Raises:
        InputError: If t is outside [0, 1), beta <= 1 or n < 1
    """
    if not 0.0 <= t < 1.0:
        raise InputError(f"t must lie in [0, 1): {t}")
    if beta <= 1.0:
        raise InputError(f"beta must exceed 1: {beta}")
    if n < 1:
        raise InputError(f"n must be positive: {n}")

    digits = []
    scaled = t * beta
    for _ in range(n):
        digit = max(0, math.ceil(scaled - GUARD_BAND) - 1)
        digits.append(digit)
        scaled = (scaled - digit) * beta
    return tuple(digits)


def delta_bound(beta: float, k: int) -> float:
    """
    Supremum of the perturbations delta admitted by zero replacement with
    gap k: (1 + beta^{2k})^{1/2k} - beta.
    """
    if beta <= 1.0:
        raise InputError(f"beta must exceed 1: {beta}")
    if k < 1:
        raise InputError(f"k must be positive: {k}")
    # beta * ((1 + beta^-2k)^{1/2k} - 1), stable for large beta^2k
    return beta * math.expm1(math.log1p(beta**(-2 * k)) / (2 * k))


def window_chain_bound(beta: float, delta: float, k: int) -> float:
    """
    Bound on every 2k-window sum of a replacement result that starts at a
    nonzero letter: ((beta + delta)^{2k} - 1) / beta^{2k}.
    """
    return ((beta + delta)**(2 * k) - 1.0) / beta**(2 * k)


def continuity_step(beta_lo: float, beta_hi: float, k: int) -> float:
    """
    One radius delta that serves every base of [beta_lo, beta_hi]: for each
    beta in the interval, words of X_beta' with beta' < beta + delta replace
    down to X_beta with gap k.

    delta_bound is decreasing in beta, so the right end decides.

    Raises:
        InputError: If beta_lo <= 1, the interval is empty or k < 1
    """
    if beta_lo <= 1.0:
        raise InputError(f"beta_lo must exceed 1: {beta_lo}")
    if beta_hi < beta_lo:
        raise InputError(
            f"Empty interval of bases: [{beta_lo}, {beta_hi}]"
        )
    return delta_bound(beta_hi, k)


def _segments(word: Word, k: int) -> List[Tuple[int, int]]:
    """
    Split a word, extended by zeros, into the stretches between maximal
    zero runs of length >= k.

    Returns (a, b) pairs of 1-indexed positions: a is where the stretch
    starts (leading zeros included) and b is its last nonzero letter.
    """
    segments = []
    start = None
    zeros = 0
    last_nonzero = None
    for position, letter in enumerate(word, start=1):
        if letter == 0:
            zeros += 1
            continue
        if start is None:
            start = 1 if zeros < k else position
        elif zeros >= k:
            segments.append((start, last_nonzero))
            start = position
        zeros = 0
        last_nonzero = position
    if start is not None:
        segments.append((start, last_nonzero))
    return segments


def _check_perturbation(beta: float, beta_prime: float, k: int) -> None:
    if beta <= 1.0:
        raise InputError(f"beta must exceed 1: {beta}")
    if k < 1:
        raise InputError(f"k must be positive: {k}")
    bound = delta_bound(beta, k)
    if beta_prime >= beta + bound:
        raise PreconditionError(
            f"beta'={beta_prime} is not below beta + delta_bound = "
            f"{beta + bound} (beta={beta}, k={k})"
        )


def sparse_zero_replacement(
    y: Word, beta: float, k: int, beta_prime: float
) -> ReplacementPlan:
    """
    Zero a sparse set of letters of y so that the result lies in X_beta.

    Inside every stretch [a, b] the selection starts at b and repeatedly
    steps to the rightmost nonzero position more than k to the left,
    stopping once it falls below a + k or no candidate remains.

    Args:
        y: Word admissible in X_beta_prime, read as y 0^inf
        beta: Target base, greater than 1
        k: Gap parameter
        beta_prime: Base that y was drawn from

    Returns:
        The replacement plan

    Raises:
        InputError: If a letter of y is out of range for beta_prime
        PreconditionError: If beta_prime is too far above beta or y is not
            admissible in X_beta_prime
        InternalError: If the result is not admissible in X_beta
    """
    y = tuple(int(a) for a in y)
    _check_perturbation(beta, beta_prime, k)
    if not is_word_admissible(BetaShift(beta_prime), y):
        raise PreconditionError(
            f"{format_word(y)} is not admissible for beta'={beta_prime}"
        )

    chosen = []
    for a_i, b_i in _segments(y, k):
        picks = [b_i]
        current = b_i
        while current >= a_i + k:
            candidates = [
                j for j in range(a_i, current - k) if y[j - 1] > 0
            ]
            if not candidates:
                break
            current = max(candidates)
            picks.append(current)
        chosen.extend(picks)

    positions = tuple(sorted(chosen))
    result = list(y)
    for position in positions:
        result[position - 1] = 0
    result = tuple(result)

    if not BetaShift(beta).admits(result):
        raise InternalError(
            f"replacement of {format_word(y)} is not admissible for "
            f"beta={beta}: {format_word(result)}"
        )
    logger.debug(
        "Replaced %s -> %s at %s (beta=%s, beta'=%s, k=%d)", format_word(y),
        format_word(result), positions, beta, beta_prime, k
    )
    return ReplacementPlan(positions, y, result, k)


def replace_word(v: Word, beta: float, beta_prime: float, k: int) -> Word:
    """
    The word map f_n: L_n(X_beta') -> L_n(X_beta).

    v is extended by zeros (which keeps it admissible), replaced, and cut
    back to its own length; zero extension adds no nonzero letters, so the
    plan on v itself is the plan on the extension.
    """
    return sparse_zero_replacement(v, beta, k, beta_prime).result


def inner_sft(
    beta: float, m: int, max_words: int = DEFAULT_MAX_WORDS
) -> InnerSftSpec:
    """
    The inner approximation W_m of X_beta.

    Raises:
        InputError: If beta <= 1 or m < 2
        ResourceError: If L_{m-1}(X_beta) exceeds ``max_words``
    """
    spec = InnerSftSpec(beta, m)
    vertices = count_language(BetaShift(beta), m - 1, max_words)
    logger.debug(
        "Inner SFT beta=%s m=%d: %d vertices, margin %.3g", beta, m, vertices,
        spec.margin
    )
    return spec


def fiber_bound(n: int, k: int, j: int) -> int:
    """
    Upper bound on |f_n^{-1}(x)|: j^{n/k} (2n/k) C(n, n/k) when k divides
    n, otherwise j^{c} (c + 1) C(n, c) with c = ceil(n/k).
    """
    if n % k == 0:
        q = n // k
        return j**q * (2 * q) * math.comb(n, q)
    c = -(-n // k)
    return j**c * (c + 1) * math.comb(n, c)


def fiber_sizes(
    n: int,
    beta: float,
    beta_prime: float,
    k: int,
    max_words: int = DEFAULT_MAX_WORDS
) -> Dict[Word, int]:
    """Exhaustive preimage counts of f_n over L_n(X_beta')."""
    counts = Counter(
        replace_word(v, beta, beta_prime, k)
        for v in language(BetaShift(beta_prime), n, max_words)
    )
    return dict(counts)


def _xlogx(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log(x)


def perturbation_bound(
    j: int, K: float, t: float, k: int, sharp: bool = False
) -> float:
    """
    Increase of pressure allowed when the base grows within delta_bound.

    The coarse form is (ln j + t ln K + 2 ln k)/k. The sharp form replaces
    2 ln k / k by the binary entropy of 1/k and is never larger for k > 1.

    Args:
        j: Largest letter of the alphabet {0..j}
        K: Bounded distortion constant
        t: Pressure parameter
        k: Gap parameter
        sharp: Use the entropy form

    Returns:
        The additive pressure bound
    """
    if k < 1 or j < 1:
        raise InputError(f"need j >= 1 and k >= 1, got j={j}, k={k}")
    base = (math.log(j) + t * math.log(K)) / k
    if sharp:
        inverse = 1.0 / k
        return base - _xlogx(inverse) - _xlogx(1.0 - inverse)
    return base + 2.0 * math.log(k) / k
