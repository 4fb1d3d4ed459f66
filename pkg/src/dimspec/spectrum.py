"""
Dimension evaluation, beta sweeps and inversion of the dimension spectrum.

Everything here sits on :mod:`dimspec.pressure`: a dimension is the
intersection of Bowen-root enclosures over increasing depths, and the
inversions bisect on beta using the nesting of beta-shift languages.
"""

import concurrent.futures
import math
import os
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from ._logging import get_logger
from .conformal import (
    SystemSpec,
    continued_fraction_system,
    induced_block_system,
    word_derivative_norm,
)
from .exceptions import (
    ConfigurationError,
    InputError,
    PreconditionError,
    ResourceError,
    SpectrumRangeError,
)
from .pressure import (
    DEFAULT_MAX_JUNCTION_WORDS,
    DEFAULT_MAX_STATES,
    DimensionEnclosure,
    PressureEngine,
)
from .symbolic import (
    DEFAULT_MAX_WORDS,
    BetaShift,
    CodedShift,
    ConnectorTable,
    FullShift,
    MarkovShift,
    ShiftSpec,
    Word,
    connecting_words,
    count_language,
    is_irreducible,
    language,
    scc_decomposition,
)


logger = get_logger(__name__)

THREADS_ENV = "DIMSPEC_THREADS"
DEFAULT_TARGET_WIDTH = 0.05
DEFAULT_EPSILON = 0.01
DEFAULT_MAX_BISECTIONS = 60
DEFAULT_MAX_BLOCK_LENGTH = 8


@dataclass(frozen=True)
class Budget:
    """Resource limits shared by every dimension computation."""
    max_depth: int = 20
    max_words: int = DEFAULT_MAX_WORDS
    max_states: int = DEFAULT_MAX_STATES
    max_junction_words: int = DEFAULT_MAX_JUNCTION_WORDS

    def engine(self, shift: ShiftSpec, sys: SystemSpec,
               upper_only: bool = False) -> PressureEngine:
        return PressureEngine(
            shift,
            sys,
            max_words=self.max_words,
            max_states=self.max_states,
            max_junction_words=self.max_junction_words,
            upper_only=upper_only
        )


@dataclass(frozen=True)
class Inversion:
    """A base beta whose dimension enclosure meets the requested target."""
    beta: float
    enclosure: DimensionEnclosure
    converged: bool


@dataclass(frozen=True)
class MarkovInversion:
    """
    Inversion inside a Markov chain Z. ``terminal`` marks the case X = Z,
    where no block construction is needed and m and beta are None.
    """
    m: Optional[int]
    beta: Optional[float]
    enclosure: DimensionEnclosure
    terminal: bool
    converged: bool


@dataclass(frozen=True)
class ExhaustionRung:
    """One finite truncation of a countable family."""
    size: int
    enclosure: Optional[DimensionEnclosure]
    raw: Optional[DimensionEnclosure]
    error: Optional[str] = None
    budget_exhausted: bool = False


@dataclass(frozen=True)
class BlockConstruction:
    """
    Blocks t_v = a u_v v u'_v over v in L_m(Z) with u_v = w(a, v_1) and
    u'_v = w(v_m, a). Block i is selected by digit i of X_beta.
    """
    shift: MarkovShift
    system: SystemSpec
    anchor: int
    m: int
    beta: float
    blocks: Tuple[Word, ...]
    connectors: ConnectorTable
    induced: SystemSpec

    @property
    def index_size(self) -> int:
        return len(self.blocks)

    @property
    def index_shift(self) -> BetaShift:
        return BetaShift(self.beta)

    @property
    def coded_shift(self) -> CodedShift:
        return CodedShift(self.blocks, self.beta, base=self.shift)


def worker_count() -> int:
    """
    Worker threads for independent dimension calls.

    Raises:
        ConfigurationError: If DIMSPEC_THREADS is not a positive integer
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError as error:
        raise ConfigurationError(
            f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        ) from error
    if value < 1:
        raise ConfigurationError(
            f"{THREADS_ENV} must be a positive integer, got {raw!r}"
        )
    return value


def _map_ordered(func: Callable, items: Sequence) -> list:
    """Apply func across a thread pool, keeping input order."""
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _adaptive(
    step: Callable[[int], DimensionEnclosure],
    target_width: float,
    max_depth: int,
    label: str
) -> DimensionEnclosure:
    best = None
    for n in range(1, max_depth + 1):
        try:
            current = step(n)
        except ResourceError as error:
            if best is None:
                logger.warning(
                    "%s: budget exhausted at depth 1 (%s); returning [0, 1]",
                    label, error
                )
                return DimensionEnclosure(
                    h_lo=0.0,
                    h_hi=1.0,
                    depth=0,
                    converged=False,
                    budget_exhausted=True
                )
            logger.warning(
                "%s: budget exhausted at depth %d (%s); returning width %.3g",
                label, n, error, best.width
            )
            return replace(best, converged=False, budget_exhausted=True)
        best = current if best is None else best.intersect(current)
        logger.debug(
            "%s: depth %d gives [%.12g, %.12g]", label, n, best.h_lo,
            best.h_hi
        )
        if best.width <= target_width:
            return replace(best, converged=True)
    logger.warning(
        "%s: width %.3g above target %.3g after depth %d", label, best.width,
        target_width, max_depth
    )
    return replace(best, converged=False)


def _reducible_dimension(
    shift: MarkovShift, sys: SystemSpec, target_width: float, budget: Budget
) -> DimensionEnclosure:
    whole = budget.engine(shift, sys, upper_only=True)
    parts = [
        budget.engine(shift.restrict(component), sys)
        for component in scc_decomposition(shift).components
    ]

    def step(n: int) -> DimensionEnclosure:
        upper = whole.bowen_root(n, target_width)
        lowers = [part.bowen_root(n, target_width).h_lo for part in parts]
        h_lo = min(max(lowers, default=0.0), upper.h_hi)
        return replace(upper, h_lo=h_lo)

    return _adaptive(step, target_width, budget.max_depth, "reducible chain")


def dimension(
    shift: ShiftSpec,
    sys: SystemSpec,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget()
) -> DimensionEnclosure:
    """
    Enclose HD(J(shift)), deepening until the width reaches target_width.

    Depths are tried from 1 up to budget.max_depth and their enclosures
    intersected. Running out of depth returns the best enclosure so far
    with converged=False. Hitting a word or state budget does the same and
    also sets budget_exhausted; if depth 1 is already over budget the
    enclosure is the trivial [0, 1].

    Args:
        shift: Subshift coding the construction
        sys: Refined conformal system
        target_width: Requested width of [h_lo, h_hi]
        budget: Resource limits

    Returns:
        The dimension enclosure

    Raises:
        InputError: If target_width is not positive
    """
    if target_width <= 0:
        raise InputError(f"target_width must be positive: {target_width}")
    if isinstance(shift, CodedShift):
        induced = induced_block_system(sys, shift.blocks, shift.base)
        return dimension(shift.index_shift, induced, target_width, budget)
    if isinstance(shift, MarkovShift) and not is_irreducible(shift):
        return _reducible_dimension(shift, sys, target_width, budget)

    engine = budget.engine(shift, sys)
    result = _adaptive(
        lambda n: engine.bowen_root(n, target_width), target_width,
        budget.max_depth, f"{shift.kind} shift"
    )
    logger.info(
        "Dimension of %s shift in [%.12g, %.12g] at depth %d", shift.kind,
        result.h_lo, result.h_hi, result.depth
    )
    return result


def beta_grid(beta_lo: float, beta_hi: float, step: float) -> List[float]:
    """beta_lo + i * step up to beta_hi, rounded to 12 digits."""
    if step <= 0:
        raise InputError(f"step must be positive: {step}")
    if beta_hi < beta_lo:
        raise InputError(f"empty beta range [{beta_lo}, {beta_hi}]")
    count = int(math.floor((beta_hi - beta_lo) / step + 1e-9)) + 1
    return [round(beta_lo + i * step, 12) for i in range(count)]


def beta_curve(
    sys: SystemSpec,
    beta_lo: float,
    beta_hi: float,
    step: float,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget()
) -> List[Tuple[float, DimensionEnclosure]]:
    """
    Dimension enclosures of X_beta on an even grid of bases, computed in
    parallel and returned in grid order.

    Raises:
        InputError: If the range leaves [0, alphabet size] or step <= 0
    """
    if beta_lo < 0 or beta_hi > sys.size:
        raise InputError(
            f"beta range [{beta_lo}, {beta_hi}] must lie in [0, {sys.size}]"
        )
    grid = beta_grid(beta_lo, beta_hi, step)
    logger.info("Sweeping %d bases on [%s, %s]", len(grid), beta_lo, beta_hi)
    enclosures = _map_ordered(
        lambda beta: dimension(BetaShift(beta), sys, target_width, budget),
        grid
    )
    return list(zip(grid, enclosures))


def _meets(enclosure: DimensionEnclosure, d_target: float,
           epsilon: float) -> bool:
    return (enclosure.h_lo >= d_target - epsilon
            and enclosure.h_hi <= d_target + epsilon)


def _zero_enclosure() -> DimensionEnclosure:
    return DimensionEnclosure(h_lo=0.0, h_hi=0.0, depth=1, converged=True)


def _bisect_beta(
    sys: SystemSpec,
    top: float,
    d_target: float,
    epsilon: float,
    width: float,
    budget: Budget,
    max_bisections: int
) -> Inversion:
    """
    Bisect beta on [1, top] for a dimension enclosure inside
    [d_target - epsilon, d_target + epsilon]. Undecided steps compare the
    enclosure centre with the target and move towards the smaller base on
    ties.
    """
    lo, hi = 1.0, top
    last = None
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        enclosure = dimension(BetaShift(mid), sys, width, budget)
        logger.debug(
            "beta=%.12g: [%.9g, %.9g] against target %.9g", mid,
            enclosure.h_lo, enclosure.h_hi, d_target
        )
        if _meets(enclosure, d_target, epsilon):
            return Inversion(mid, enclosure, True)
        if enclosure.h_lo > d_target + epsilon:
            hi = mid
        elif enclosure.h_hi < d_target - epsilon:
            lo = mid
        elif 0.5 * (enclosure.h_lo + enclosure.h_hi) >= d_target:
            hi = mid
        else:
            lo = mid
        last = Inversion(mid, enclosure, False)
        if hi - lo <= 1e-12:
            break
    logger.warning(
        "Inversion for d=%s stalled at beta=%s with width %.3g", d_target,
        last.beta, last.enclosure.width
    )
    return last


def _check_target(d_target: float, epsilon: float,
                  max_bisections: int) -> None:
    if not 0.0 <= d_target <= 1.0:
        raise InputError(f"Target dimension must lie in [0, 1]: {d_target}")
    if epsilon <= 0:
        raise InputError(f"epsilon must be positive: {epsilon}")
    if max_bisections < 1:
        raise InputError(
            f"max_bisections must be at least 1: {max_bisections}"
        )


def invert_dimension(
    sys: SystemSpec,
    d_target: float,
    epsilon: float = DEFAULT_EPSILON,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget(),
    max_bisections: int = DEFAULT_MAX_BISECTIONS
) -> Inversion:
    """
    Find beta with HD(J(X_beta)) within epsilon of d_target.

    The returned enclosure, not a point estimate, lies inside
    [d_target - epsilon, d_target + epsilon] whenever ``converged`` holds.

    Raises:
        InputError: If d_target is outside [0, 1], epsilon <= 0 or
            max_bisections < 1
        SpectrumRangeError: If d_target exceeds the full-shift dimension
    """
    _check_target(d_target, epsilon, max_bisections)
    if d_target == 0.0:
        return Inversion(1.0, _zero_enclosure(), True)

    width = min(target_width, epsilon)
    top = float(sys.size)
    full = dimension(FullShift(sys.size), sys, width, budget)
    if d_target > full.h_hi:
        raise SpectrumRangeError(
            f"Target {d_target} exceeds the full-shift dimension enclosure "
            f"[{full.h_lo}, {full.h_hi}]",
            enclosure=full
        )
    if _meets(full, d_target, epsilon):
        return Inversion(top, full, True)
    result = _bisect_beta(
        sys, top, d_target, epsilon, width, budget, max_bisections
    )
    logger.info("Inverted d=%s to beta=%.12g", d_target, result.beta)
    return result


def markov_block_construction(
    shift: MarkovShift,
    sys: SystemSpec,
    anchor: int,
    m: int,
    beta: float,
    max_words: int = DEFAULT_MAX_WORDS
) -> BlockConstruction:
    """
    Build the blocks t_v over L_m(Z) and their induced system.

    Raises:
        PreconditionError: If Z is not irreducible
        InputError: If the anchor is inactive, m < 1 or beta is outside
            (1, |L_m(Z)|]
    """
    if not isinstance(shift, MarkovShift) or not is_irreducible(shift):
        raise PreconditionError(
            "Block constructions need an irreducible Markov chain; select a "
            "component with scc_decomposition"
        )
    if anchor not in shift.active_letters:
        raise InputError(f"Anchor letter {anchor} is not active in the chain")
    if m < 1:
        raise InputError(f"Block length m must be positive: {m}")

    connectors = connecting_words(shift)
    blocks = tuple(
        (anchor, ) + connectors[(anchor, v[0])] + v + connectors[(v[-1],
                                                                  anchor)]
        for v in language(shift, m, max_words)
    )
    if not 1.0 < beta <= len(blocks):
        raise InputError(
            f"beta must lie in (1, {len(blocks)}] for m={m}: {beta}"
        )
    induced = induced_block_system(sys, blocks, shift)
    logger.debug(
        "Built %d blocks for m=%d, lengths %d..%d", len(blocks), m,
        min(map(len, blocks)), max(map(len, blocks))
    )
    return BlockConstruction(
        shift, sys, anchor, m, float(beta), blocks, connectors, induced
    )


def block_constant(construction: BlockConstruction) -> float:
    """
    C = -ln(K^-3 L^2 W) with L the smallest connector derivative norm (1 for
    the empty connector) and W the norm of the anchor map.
    """
    sys = construction.system
    norms = [
        word_derivative_norm(sys, word) if word else 1.0
        for word in construction.connectors.words.values()
    ]
    smallest = min(norms, default=1.0)
    anchor_norm = word_derivative_norm(sys, (construction.anchor, ))
    return (3.0 * math.log(sys.K) - 2.0 * math.log(smallest)
            - math.log(anchor_norm))


def invert_dimension_markov(
    shift: MarkovShift,
    sys: SystemSpec,
    d_target: float,
    epsilon: float = DEFAULT_EPSILON,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget(),
    anchor: Optional[int] = None,
    max_block_length: int = DEFAULT_MAX_BLOCK_LENGTH,
    max_bisections: int = DEFAULT_MAX_BISECTIONS
) -> MarkovInversion:
    """
    Find a subshift of Z with dimension within epsilon of d_target.

    Grows m until the block system Z_m clears d_target + epsilon, then
    bisects beta inside Z_{m, beta}.

    Raises:
        InputError: If d_target is outside [0, 1], epsilon <= 0 or
            max_bisections < 1
        PreconditionError: If Z is not irreducible
        SpectrumRangeError: If d_target exceeds the dimension of Z
        ResourceError: If no m up to max_block_length clears the target
    """
    _check_target(d_target, epsilon, max_bisections)
    if not is_irreducible(shift):
        raise PreconditionError(
            "Inversion inside a Markov chain needs an irreducible chain"
        )
    anchor = min(shift.active_letters) if anchor is None else anchor
    if d_target == 0.0:
        return MarkovInversion(1, 1.0, _zero_enclosure(), False, True)

    width = min(target_width, epsilon)
    whole = dimension(shift, sys, width, budget)
    if d_target > whole.h_hi:
        raise SpectrumRangeError(
            f"Target {d_target} exceeds the chain's dimension enclosure "
            f"[{whole.h_lo}, {whole.h_hi}]",
            enclosure=whole
        )
    if _meets(whole, d_target, epsilon):
        return MarkovInversion(None, None, whole, True, True)

    for m in range(1, max_block_length + 1):
        count = count_language(shift, m, budget.max_words)
        if count < 2:
            continue
        blocks = markov_block_construction(
            shift, sys, anchor, m, float(count), budget.max_words
        )
        top = float(count)
        block_full = dimension(
            FullShift(blocks.index_size), blocks.induced, width, budget
        )
        logger.debug(
            "m=%d: block system dimension in [%.9g, %.9g]", m,
            block_full.h_lo, block_full.h_hi
        )
        if _meets(block_full, d_target, epsilon):
            return MarkovInversion(m, top, block_full, False, True)
        if block_full.h_lo >= d_target + epsilon:
            result = _bisect_beta(
                blocks.induced, top, d_target, epsilon, width, budget,
                max_bisections
            )
            return MarkovInversion(
                m, result.beta, result.enclosure, False, result.converged
            )
    raise ResourceError(
        f"No block length up to {max_block_length} reaches dimension "
        f"{d_target + epsilon}",
        estimate=max_block_length,
        budget=max_block_length
    )


def continued_fraction_truncation(size: int) -> SystemSpec:
    """The continued-fraction system on digits 1..size."""
    return continued_fraction_system(range(1, size + 1))


def exhaustion_dimension(
    sizes: Iterable[int],
    factory: Callable[[int], SystemSpec] = continued_fraction_truncation,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget()
) -> List[ExhaustionRung]:
    """
    Dimension enclosures of increasing finite truncations.

    A rung whose system cannot be built or whose budget runs out records
    the error and the ladder continues. Each lower bound is lifted to the
    best lower bound of the smaller truncations, which are contained in it;
    ``raw`` keeps the unlifted enclosure.

    Raises:
        InputError: If sizes are not strictly increasing
    """
    sizes = [int(size) for size in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or not sizes:
        raise InputError(f"Truncation sizes must strictly increase: {sizes}")

    def rung(size: int) -> ExhaustionRung:
        try:
            sys = factory(size)
            raw = dimension(FullShift(sys.size), sys, target_width, budget)
        except (ConfigurationError, ResourceError) as error:
            logger.warning("Truncation %d failed: %s", size, error)
            return ExhaustionRung(
                size, None, None, str(error),
                budget_exhausted=isinstance(error, ResourceError)
            )
        return ExhaustionRung(
            size, raw, raw, budget_exhausted=raw.budget_exhausted
        )

    ladder = []
    floor = 0.0
    for entry in _map_ordered(rung, sizes):
        if entry.raw is not None:
            floor = max(floor, entry.raw.h_lo)
            lifted = replace(
                entry.raw, h_lo=min(floor, entry.raw.h_hi)
            )
            entry = replace(entry, enclosure=lifted)
        ladder.append(entry)
    return ladder


def coded_dimension_direct(
    shift: CodedShift,
    sys: SystemSpec,
    depth: int,
    target_width: float = DEFAULT_TARGET_WIDTH,
    budget: Budget = Budget()
) -> DimensionEnclosure:
    """
    Enclosure of a coded shift's dimension with its upper bound taken from
    the coded language itself and its lower bound from the induced block
    system, whose limit set sits inside J(shift).
    """
    upper = budget.engine(shift, sys, upper_only=True).bowen_root(
        depth, target_width
    )
    induced = induced_block_system(sys, shift.blocks, shift.base)
    lower = dimension(shift.index_shift, induced, target_width, budget)
    return DimensionEnclosure(
        h_lo=min(lower.h_lo, upper.h_hi),
        h_hi=upper.h_hi,
        depth=depth,
        converged=lower.converged,
        guard_hits=max(lower.guard_hits, upper.guard_hits),
        budget_exhausted=lower.budget_exhausted
    )
