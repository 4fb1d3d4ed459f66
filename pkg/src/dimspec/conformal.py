"""
One-dimensional conformal map families.

Every letter map is a real Moebius transformation x -> (a x + b)/(c x + d)
with no pole on the domain, so a word map is the product of the letter
matrices and |phi_w'(x)| = |det| / (c x + d)^2. Affine maps have c = 0,
d = 1; continued-fraction maps x -> 1/(k + x) have matrix [[0, 1], [1, k]].
"""

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from ._internal_utils import outward, round_down, round_up
from ._logging import get_logger
from .exceptions import (
    ConfigurationError,
    InputError,
    InternalError,
    PreconditionError,
)
from .symbolic import ShiftSpec, Word, format_word, is_word_admissible


logger = get_logger(__name__)

DEFAULT_REFINE_ITERATIONS = 20
AUDIT_MAX_WORDS = 4096
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class AffineFamily:
    """Letter e maps x to ratios[e] * x + offsets[e]."""
    ratios: Tuple[float, ...]
    offsets: Tuple[float, ...]

    @property
    def name(self) -> str:
        return "affine"

    @property
    def size(self) -> int:
        return len(self.ratios)

    @property
    def matrices(self) -> np.ndarray:
        return np.array([[[r, b], [0.0, 1.0]]
                         for r, b in zip(self.ratios, self.offsets)])

    @property
    def log_dets(self) -> np.ndarray:
        return np.log(np.array(self.ratios, dtype=float))


@dataclass(frozen=True)
class ContinuedFractionFamily:
    """Letter e maps x to 1/(digits[e] + x)."""
    digits: Tuple[int, ...]

    @property
    def name(self) -> str:
        return "continued-fraction"

    @property
    def size(self) -> int:
        return len(self.digits)

    @property
    def matrices(self) -> np.ndarray:
        return np.array([[[0.0, 1.0], [1.0, float(k)]] for k in self.digits])

    @property
    def log_dets(self) -> np.ndarray:
        return np.zeros(len(self.digits))


@dataclass(frozen=True)
class InducedFamily:
    """Letter e maps by the composite of the base maps along blocks[e]."""
    base: object
    blocks: Tuple[Word, ...]

    @property
    def name(self) -> str:
        return "induced"

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def matrices(self) -> np.ndarray:
        base = self.base.matrices
        products = []
        for block in self.blocks:
            product = np.eye(2)
            for letter in block:
                product = product @ base[letter]
            products.append(product)
        return np.array(products)

    @property
    def log_dets(self) -> np.ndarray:
        base = self.base.log_dets
        return np.array([float(sum(base[letter] for letter in block))
                         for block in self.blocks])


@dataclass(frozen=True)
class SystemSpec:
    """
    A conformal construction: map family, domain Y = [lo, hi] shared by all
    letters, distortion constant K, contraction bound s and derivative
    floor gamma_min.
    """
    family: object
    domain: Tuple[float, float] = (0.0, 1.0)
    K: float = 1.0
    s: float = 1.0
    gamma_min: float = 0.0

    @property
    def size(self) -> int:
        return self.family.size

    @property
    def anchor(self) -> float:
        """Base point used for point-evaluated partition functions."""
        lo, hi = self.domain
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CylinderInterval:
    """phi_w(Y), rounded outward."""
    word: Word
    lo: float
    hi: float

    @property
    def diameter(self) -> float:
        return self.hi - self.lo


def _check_word(sys: SystemSpec, word: Word) -> Word:
    word = tuple(int(a) for a in word)
    for letter in word:
        if not 0 <= letter < sys.size:
            raise InputError(
                f"Letter {letter} outside system alphabet of size {sys.size}"
            )
    return word


def _apply(matrix: np.ndarray, x: float) -> float:
    (a, b), (c, d) = matrix
    return (a * x + b) / (c * x + d)


def _image(matrix: np.ndarray, lo: float, hi: float) -> Tuple[float, float]:
    ends = (_apply(matrix, lo), _apply(matrix, hi))
    return outward(min(ends), max(ends))


def word_matrix(sys: SystemSpec, word: Word) -> Tuple[np.ndarray, float]:
    """Product matrix of a word and log|det| of its map."""
    word = _check_word(sys, word)
    matrices = sys.family.matrices
    log_dets = sys.family.log_dets
    product = np.eye(2)
    for letter in word:
        product = product @ matrices[letter]
    return product, float(sum(log_dets[letter] for letter in word))


def word_log_norms(
    sys: SystemSpec, words: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorised log derivative data for every row of ``words``.

    Returns:
        (log sup_Y |phi_w'|, log inf_Y |phi_w'|, log |phi_w'(anchor)|), each
        widened outward by a rounding allowance proportional to the word
        length
    """
    words = np.asarray(words)
    count, length = words.shape
    matrices = sys.family.matrices
    log_dets = sys.family.log_dets
    product = np.broadcast_to(np.eye(2), (count, 2, 2)).copy()
    log_scale = np.zeros(count)
    log_det = np.zeros(count)
    for column in range(length):
        letters = words[:, column]
        product = np.einsum("kij,kjl->kil", product, matrices[letters])
        log_det += log_dets[letters]
        peak = np.abs(product).reshape(count, 4).max(axis=1)
        product /= peak[:, None, None]
        log_scale += np.log(peak)

    lo, hi = sys.domain
    c = product[:, 1, 0]
    d = product[:, 1, 1]
    at_lo = np.log(np.abs(c * lo + d)) + log_scale
    at_hi = np.log(np.abs(c * hi + d)) + log_scale
    at_anchor = np.log(np.abs(c * sys.anchor + d)) + log_scale

    log_sup = log_det - 2.0 * np.minimum(at_lo, at_hi)
    log_inf = log_det - 2.0 * np.maximum(at_lo, at_hi)
    log_point = log_det - 2.0 * at_anchor
    slack = 16.0 * (length + 1) * _EPS * (1.0 + np.abs(log_sup))
    return log_sup + slack, log_inf - slack, log_point


def word_derivative_norm(sys: SystemSpec, word: Word) -> float:
    """
    sup over Y of |phi_w'|.

    Raises:
        InputError: For the empty word or out-of-range letters
    """
    word = _check_word(sys, word)
    if not word:
        raise InputError("Derivative norm of the empty word is not defined")
    log_sup, _, _ = word_log_norms(sys, np.array([word]))
    return round_up(math.exp(float(log_sup[0])))


def word_derivative_inf(sys: SystemSpec, word: Word) -> float:
    """inf over Y of |phi_w'|."""
    word = _check_word(sys, word)
    if not word:
        raise InputError("Derivative of the empty word is not defined")
    _, log_inf, _ = word_log_norms(sys, np.array([word]))
    return round_down(math.exp(float(log_inf[0])))


def word_derivative_at(sys: SystemSpec, word: Word, x: float) -> float:
    """|phi_w'(x)| by the chain rule along the orbit of x."""
    word = _check_word(sys, word)
    if not word:
        raise InputError("Derivative of the empty word is not defined")
    matrices = sys.family.matrices
    log_dets = sys.family.log_dets
    value = 1.0
    point = float(x)
    for letter in reversed(word):
        (_, _), (c, d) = matrices[letter]
        value *= math.exp(log_dets[letter]) / (c * point + d)**2
        point = _apply(matrices[letter], point)
    return value


def cylinder_interval(sys: SystemSpec, word: Word) -> CylinderInterval:
    """phi_w(Y) with outward rounding; the empty word gives Y."""
    word = _check_word(sys, word)
    lo, hi = sys.domain
    matrices = sys.family.matrices
    for letter in reversed(word):
        lo, hi = _image(matrices[letter], lo, hi)
    return CylinderInterval(word, lo, hi)


def _letter_images(sys: SystemSpec,
                   domain: Tuple[float, float]) -> list:
    return [_image(matrix, *domain) for matrix in sys.family.matrices]


def _hull(images: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    return min(lo for lo, _ in images), max(hi for _, hi in images)


def _letter_derivative_bounds(sys: SystemSpec) -> Tuple[float, float]:
    words = np.arange(sys.size).reshape(-1, 1)
    log_sup, log_inf, _ = word_log_norms(sys, words)
    return (
        round_up(math.exp(float(log_sup.max()))),
        round_down(math.exp(float(log_inf.min())))
    )


def _distortion(sys: SystemSpec) -> float:
    family = sys.family
    if isinstance(family, AffineFamily):
        return 1.0
    if isinstance(family, ContinuedFractionFamily):
        lo, hi = sys.domain
        # continuants satisfy c <= d, so the ratio is worst at c = d
        return round_up(((1.0 + hi) / (1.0 + lo))**2)
    if isinstance(family, InducedFamily):
        return sys.K
    raise InternalError(f"Unknown map family {type(family).__name__}")


def system_constants(sys: SystemSpec) -> Tuple[float, float, float]:
    """
    (K, s, gamma_min) for a refined system.

    Raises:
        InternalError: If K < 1 or s >= 1
    """
    K = _distortion(sys)
    s, gamma_min = _letter_derivative_bounds(sys)
    if K < 1.0:
        raise InternalError(f"Distortion constant below 1: {K}")
    if s >= 1.0:
        raise InternalError(f"Contraction bound not below 1: {s}")
    return K, s, gamma_min


def refine_domain(
    sys: SystemSpec, iterations: int = DEFAULT_REFINE_ITERATIONS
) -> SystemSpec:
    """
    Shrink Y to the interval hull of the letter images, repeatedly.

    Each step intersects with the previous domain so the domains stay
    nested and keep containing the limit set.

    Raises:
        ConfigurationError: If the maps do not send Y into itself, or the
            refined system still has sup |phi_e'| >= 1
    """
    lo, hi = sys.domain
    first = _hull(_letter_images(sys, (lo, hi)))
    if first[0] < lo - 1e-12 or first[1] > hi + 1e-12:
        raise ConfigurationError(
            f"Maps send the domain [{lo}, {hi}] outside itself: {first}"
        )
    for _ in range(iterations):
        new_lo, new_hi = _hull(_letter_images(sys, (lo, hi)))
        lo, hi = max(lo, new_lo), min(hi, new_hi)
        if lo > hi:
            lo = hi = 0.5 * (lo + hi)

    refined = replace(sys, domain=(lo, hi))
    s, gamma_min = _letter_derivative_bounds(refined)
    if s >= 1.0:
        raise ConfigurationError(
            f"Contraction bound {s} is not below 1 after {iterations} hull "
            "refinements; choose a digit set without parabolic maps or "
            "raise the iteration count"
        )
    refined = replace(refined, K=_distortion(refined), s=s,
                      gamma_min=gamma_min)
    logger.debug(
        "Refined domain to [%.17g, %.17g]: K=%s s=%s gamma_min=%s", lo, hi,
        refined.K, s, gamma_min
    )
    return refined


def bdp_audit(sys: SystemSpec, max_len: int = 6) -> float:
    """Largest observed sup/inf derivative ratio over words up to max_len."""
    worst = 1.0
    for length in range(1, max_len + 1):
        if sys.size**length > AUDIT_MAX_WORDS:
            break
        grids = np.meshgrid(*[np.arange(sys.size)] * length, indexing="ij")
        words = np.stack([grid.ravel() for grid in grids], axis=1)
        log_sup, log_inf, _ = word_log_norms(sys, words)
        worst = max(worst, float(np.exp(np.max(log_sup - log_inf))))
    return worst


def check_osc(sys: SystemSpec, tol: float = 1e-12) -> bool:
    """True when the letter images of Y have pairwise disjoint interiors."""
    images = sorted(_letter_images(sys, sys.domain))
    return all(
        images[i][1] <= images[i + 1][0] + tol
        for i in range(len(images) - 1)
    )


def _apply_override(sys: SystemSpec, k_override: Optional[float]) -> SystemSpec:
    if k_override is None:
        return sys
    evidence = bdp_audit(sys)
    if k_override < evidence or k_override < 1.0:
        raise ConfigurationError(
            f"K override {k_override} is below the observed distortion "
            f"{evidence}"
        )
    return replace(sys, K=float(k_override))


def affine_system(
    ratios: Sequence[float],
    offsets: Optional[Sequence[float]] = None,
    domain: Tuple[float, float] = (0.0, 1.0),
    k_override: Optional[float] = None,
    iterations: int = DEFAULT_REFINE_ITERATIONS
) -> SystemSpec:
    """
    Build and refine an affine system.

    Without offsets the images are laid out left to right with equal gaps
    across the domain.

    Raises:
        InputError: If ratios are outside (0, 1) or lengths disagree
        ConfigurationError: If images overlap or leave the domain
    """
    ratios = tuple(float(r) for r in ratios)
    if not ratios or any(not 0.0 < r < 1.0 for r in ratios):
        raise InputError(f"Affine ratios must lie in (0, 1): {ratios}")
    lo, hi = float(domain[0]), float(domain[1])
    if offsets is None:
        width = hi - lo
        gap = 0.0 if len(ratios) == 1 else (
            (width - width * sum(ratios)) / (len(ratios) - 1)
        )
        if gap < 0.0:
            raise ConfigurationError(
                "Ratios sum above 1; offsets must be given explicitly"
            )
        position = lo
        placed = []
        for r in ratios:
            placed.append(position - r * lo)
            position += r * width + gap
        offsets = placed
    offsets = tuple(float(b) for b in offsets)
    if len(offsets) != len(ratios):
        raise InputError("Affine ratios and offsets differ in length")

    sys = SystemSpec(AffineFamily(ratios, offsets), (lo, hi))
    if not check_osc(sys):
        raise ConfigurationError("Affine images overlap (open set condition)")
    return _apply_override(refine_domain(sys, iterations), k_override)


def continued_fraction_system(
    digits: Iterable[int],
    k_override: Optional[float] = None,
    iterations: int = DEFAULT_REFINE_ITERATIONS
) -> SystemSpec:
    """
    Build and refine the continued-fraction system for a digit set.

    Raises:
        InputError: If digits are not distinct positive integers
    """
    digits = tuple(sorted(int(k) for k in digits))
    if not digits or digits[0] < 1 or len(set(digits)) != len(digits):
        raise InputError(
            f"Digits must be distinct positive integers: {digits}"
        )
    sys = SystemSpec(ContinuedFractionFamily(digits), (0.0, 1.0))
    return _apply_override(refine_domain(sys, iterations), k_override)


def induced_block_system(
    sys: SystemSpec,
    blocks: Sequence[Word],
    shift: Optional[ShiftSpec] = None
) -> SystemSpec:
    """
    The system whose letter e is the composite map along blocks[e].

    Raises:
        InputError: For empty blocks or out-of-range letters
        PreconditionError: If ``shift`` is given and a block or a pairwise
            concatenation of blocks is not admissible in it
    """
    blocks = tuple(_check_word(sys, block) for block in blocks)
    if not blocks or any(not block for block in blocks):
        raise InputError("Induced systems need nonempty blocks")
    if shift is not None:
        for first in blocks:
            for second in blocks:
                if not is_word_admissible(shift, first + second):
                    raise PreconditionError(
                        f"Blocks {format_word(first)} and "
                        f"{format_word(second)} do not compose"
                    )
    induced = SystemSpec(
        InducedFamily(sys.family, blocks), sys.domain, K=sys.K
    )
    s, gamma_min = _letter_derivative_bounds(induced)
    return replace(induced, s=s, gamma_min=gamma_min)
