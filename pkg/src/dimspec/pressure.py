"""
Partition functions, certified pressure enclosures and the Bowen root.

Upper bounds come from sup-norm partition functions, whose normalised
logarithms dominate the pressure at every depth, and for Markov and beta
shifts also from a Collatz-Wielandt bound on the junction matrix of
n-words. Lower bounds come from concatenations that are certainly legal:
any n-words for a full shift, n-words joined along legal junctions for a
Markov chain, and n-words of the inner shift of finite type for a beta
shift.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import networkx as nx
import numpy as np

from ._internal_utils import (
    bisect_decreasing,
    log_sum_exp,
    pad_down,
    pad_up,
    round_up,
)
from ._logging import get_logger
from .conformal import SystemSpec, word_log_norms
from .exceptions import InputError, PreconditionError, ResourceError
from .symbolic import (
    DEFAULT_MAX_WORDS,
    BetaShift,
    CodedShift,
    InnerSftSpec,
    LanguageLevel,
    MarkovShift,
    ShiftSpec,
    is_irreducible,
    language_level,
)


logger = get_logger(__name__)

METHOD_FULL = "full-superadditive"
METHOD_MARKOV = "markov-spectral"
METHOD_BETA = "beta-inner-sft"
METHOD_CODED = "coded-partition"

MODE_SUP = "sup-norm"
MODE_POINT = "base-point"

DEFAULT_MAX_STATES = 512
DEFAULT_MAX_JUNCTION_WORDS = 2**17

_CW_MAX_ITER = 500
_CW_TOL = 1e-10
_TINY = 1e-300


@dataclass(frozen=True)
class PressureEnclosure:
    """Certified [lower, upper] around P(X, t) at depth n."""
    t: float
    depth: int
    lower: float
    upper: float
    method: str

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class DimensionEnclosure:
    """
    Certified [h_lo, h_hi] around the Hausdorff dimension of J(X).

    ``budget_exhausted`` marks enclosures cut short by a word or state
    budget rather than by depth or width.
    """
    h_lo: float
    h_hi: float
    depth: int
    converged: bool = True
    guard_hits: int = 0
    budget_exhausted: bool = False

    @property
    def width(self) -> float:
        return self.h_hi - self.h_lo

    def contains(self, value: float) -> bool:
        return self.h_lo <= value <= self.h_hi

    def intersect(self, other: "DimensionEnclosure") -> "DimensionEnclosure":
        """Both enclosures hold, so their overlap does too."""
        return DimensionEnclosure(
            h_lo=max(self.h_lo, other.h_lo),
            h_hi=min(self.h_hi, other.h_hi),
            depth=max(self.depth, other.depth),
            converged=self.converged,
            guard_hits=max(self.guard_hits, other.guard_hits),
            budget_exhausted=self.budget_exhausted or other.budget_exhausted
        )


@dataclass(frozen=True)
class _JunctionTable:
    """n-words grouped by r-prefix (rows) and r-suffix (columns)."""
    states: int
    rows: np.ndarray
    cols: np.ndarray
    junction: np.ndarray
    components: Tuple[np.ndarray, ...]


def _codes(rows: np.ndarray, size: int) -> np.ndarray:
    width = rows.shape[1]
    if width * math.log2(max(size, 2)) >= 62:
        raise ResourceError(
            f"State words of length {width} over {size} letters do not fit "
            "64-bit codes"
        )
    powers = size**np.arange(width - 1, -1, -1, dtype=np.int64)
    return rows.astype(np.int64) @ powers


def _collatz_wielandt(block: np.ndarray) -> Tuple[float, float]:
    """
    (min_i (Bv)_i/v_i, max_i (Bv)_i/v_i) for a positive v driven towards
    the Perron vector of B; the pair brackets the spectral radius.
    """
    v = np.ones(block.shape[0])
    lo = hi = 0.0
    for _ in range(_CW_MAX_ITER):
        w = block @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi <= 0.0:
            return 0.0, 0.0
        if hi - lo <= _CW_TOL * hi:
            break
        v = w + hi * v
        v = np.maximum(v / v.max(), _TINY)
    return lo, hi


def _cycle_components(support: np.ndarray) -> Tuple[np.ndarray, ...]:
    graph = nx.from_numpy_array(support.astype(np.int8),
                                create_using=nx.DiGraph)
    components = []
    for component in nx.strongly_connected_components(graph):
        members = sorted(component)
        if len(members) > 1 or graph.has_edge(members[0], members[0]):
            components.append(np.array(members, dtype=np.int64))
    components.sort(key=lambda members: int(members[0]))
    return tuple(components)


class PressureEngine:
    """
    Pressure evaluation for one shift and system, with per-depth caches of
    language levels and derivative tables.

    Args:
        shift: Subshift coding the construction
        sys: Refined conformal system
        max_words: Budget on any language level
        max_states: Budget on junction states |L_r|
        max_junction_words: Budget on junction words |L_2r|
        window: Fixed junction length r; chosen per depth when None
        upper_only: Skip lower bounds, allowing reducible Markov chains

    Raises:
        PreconditionError: For a reducible Markov chain unless upper_only
    """

    def __init__(
        self,
        shift: ShiftSpec,
        sys: SystemSpec,
        max_words: int = DEFAULT_MAX_WORDS,
        max_states: int = DEFAULT_MAX_STATES,
        max_junction_words: int = DEFAULT_MAX_JUNCTION_WORDS,
        window: Optional[int] = None,
        upper_only: bool = False
    ):
        if shift.alphabet_size > sys.size:
            raise InputError(
                f"Shift alphabet of size {shift.alphabet_size} exceeds the "
                f"system's {sys.size} maps"
            )
        if isinstance(shift, MarkovShift) and not upper_only:
            if not is_irreducible(shift):
                raise PreconditionError(
                    "Markov pressure lower bounds need an irreducible chain; "
                    "pass a component from scc_decomposition"
                )
        self.shift = shift
        self.sys = sys
        self.max_words = max_words
        self.max_states = max_states
        self.max_junction_words = max_junction_words
        self.window = window
        self.upper_only = upper_only or isinstance(shift, CodedShift)
        self.method = self._method()
        self.guard_hits = 0
        self._logs: Dict[Tuple[ShiftSpec, int], Tuple[np.ndarray,
                                                      np.ndarray]] = {}
        self._tables: Dict[Tuple[ShiftSpec, int, int], _JunctionTable] = {}
        self._windows: Dict[int, int] = {}
        self._log_k = round_up(math.log(sys.K))

    def _method(self) -> str:
        shift = self.shift
        if isinstance(shift, CodedShift):
            return METHOD_CODED
        if isinstance(shift, MarkovShift):
            return METHOD_MARKOV
        if isinstance(shift, BetaShift) and not (shift.is_full
                                                 or shift.is_singleton):
            return METHOD_BETA
        return METHOD_FULL

    def _level(self, spec: ShiftSpec, n: int) -> LanguageLevel:
        level = language_level(spec, n, self.max_words)
        self.guard_hits = max(self.guard_hits, level.guard_hits)
        return level

    def word_logs(self, spec: ShiftSpec,
                  n: int) -> Tuple[np.ndarray, np.ndarray]:
        """(log sup-norm, log base-point derivative) for every word of L_n."""
        key = (spec, n)
        if key not in self._logs:
            words = self._level(spec, n).words
            if words.shape[0] == 0:
                empty = np.zeros(0)
                self._logs[key] = (empty, empty)
            else:
                log_sup, _, log_point = word_log_norms(self.sys, words)
                self._logs[key] = (log_sup, log_point)
        return self._logs[key]

    def partition_log(self, n: int, t: float, mode: str = MODE_SUP) -> float:
        """log Z(n, t) over L_n of the engine's shift."""
        if n < 1:
            raise InputError(f"Depth must be positive: {n}")
        if t < 0:
            raise InputError(f"t must be non-negative: {t}")
        if mode not in (MODE_SUP, MODE_POINT):
            raise InputError(f"Unknown partition mode: {mode}")
        log_sup, log_point = self.word_logs(self.shift, n)
        values = log_sup if mode == MODE_SUP else log_point
        return log_sum_exp(t * values)

    def _partition_upper(self, n: int, t: float) -> float:
        best = math.inf
        for m in range(1, n + 1):
            count = self._level(self.shift, m).count
            value = pad_up(self.partition_log(m, t, MODE_SUP), count * m)
            best = min(best, value / m)
        return best

    def _full_lower(self, n: int, t: float) -> float:
        best = -math.inf
        for m in range(1, n + 1):
            count = self._level(self.shift, m).count
            value = pad_down(self.partition_log(m, t, MODE_POINT), count * m)
            best = max(best, (value - t * self._log_k) / m)
        return best

    def junction_window(self, n: int) -> int:
        """
        Junction length r for depth n: 1 for Markov chains, otherwise the
        largest r <= n whose r-words and 2r-words fit the state budgets.
        """
        if isinstance(self.shift, MarkovShift):
            return 1
        if self.window is not None:
            return max(1, min(self.window, n))
        if n in self._windows:
            return self._windows[n]
        best = 1
        for r in range(1, n + 1):
            try:
                states = self._level(self.shift, r).count
                junctions = self._level(self.shift, 2 * r).count
            except ResourceError:
                break
            if states > self.max_states or junctions > self.max_junction_words:
                break
            best = r
        self._windows[n] = best
        return best

    def _table(self, spec: ShiftSpec, n: int, r: int) -> _JunctionTable:
        key = (spec, n, r)
        if key in self._tables:
            return self._tables[key]
        size = spec.alphabet_size
        state_words = self._level(spec, r).words
        states = state_words.shape[0]
        if states > self.max_states:
            raise ResourceError(
                f"{states} junction states exceed max_states="
                f"{self.max_states}",
                estimate=states,
                budget=self.max_states
            )
        junction_words = self._level(spec, 2 * r).words
        if junction_words.shape[0] > self.max_junction_words:
            raise ResourceError(
                f"{junction_words.shape[0]} junction words exceed "
                f"max_junction_words={self.max_junction_words}",
                estimate=junction_words.shape[0],
                budget=self.max_junction_words
            )
        state_codes = _codes(state_words, size)
        words = self._level(spec, n).words
        rows = np.searchsorted(state_codes, _codes(words[:, :r], size))
        cols = np.searchsorted(state_codes, _codes(words[:, n - r:], size))

        junction = np.zeros((states, states))
        heads = np.searchsorted(state_codes, _codes(junction_words[:, :r],
                                                    size))
        tails = np.searchsorted(state_codes, _codes(junction_words[:, r:],
                                                    size))
        junction[heads, tails] = 1.0

        pattern = np.zeros((states, states))
        pattern[rows, cols] = 1.0
        components = _cycle_components((pattern @ junction) > 0)
        table = _JunctionTable(states, rows, cols, junction, components)
        self._tables[key] = table
        logger.debug(
            "Junction table n=%d r=%d: %d words, %d states, %d components", n,
            r, words.shape[0], states, len(components)
        )
        return table

    def _spectral(self, table: _JunctionTable,
                  log_weights: np.ndarray) -> Tuple[float, float]:
        """Bracket log rho(N C) over its cycle-carrying components."""
        if log_weights.size == 0 or not table.components:
            return -math.inf, -math.inf
        shift = float(log_weights.max())
        weights = np.exp(log_weights - shift)
        size = table.states
        matrix = np.bincount(
            table.rows * size + table.cols,
            weights=weights,
            minlength=size * size
        ).reshape(size, size) @ table.junction

        terms = int(log_weights.size) + size
        lower = upper = -math.inf
        for component in table.components:
            block = matrix[np.ix_(component, component)]
            rho_lo, rho_hi = _collatz_wielandt(block)
            if rho_lo > 0.0:
                lower = max(lower, pad_down(math.log(rho_lo) + shift, terms))
            if rho_hi > 0.0:
                upper = max(upper, pad_up(math.log(rho_hi) + shift, terms))
        return lower, upper

    def _spectral_upper(self, n: int, t: float) -> float:
        r = self.junction_window(n)
        table = self._table(self.shift, n, r)
        log_sup, _ = self.word_logs(self.shift, n)
        _, upper = self._spectral(table, t * log_sup)
        return upper / n

    def _inner_spec(self, r: int) -> ShiftSpec:
        if self.method == METHOD_BETA:
            return InnerSftSpec(self.shift.beta, r + 1)
        return self.shift

    def _spectral_lower(self, n: int, t: float) -> float:
        r = self.junction_window(n)
        spec = self._inner_spec(r)
        table = self._table(spec, n, r)
        _, log_point = self.word_logs(spec, n)
        lower, _ = self._spectral(table, t * log_point)
        return (lower - t * self._log_k) / n

    def upper(self, n: int, t: float) -> float:
        """Certified upper bound on P(X, t) from depths up to n."""
        value = self._partition_upper(n, t)
        if self.method in (METHOD_MARKOV, METHOD_BETA):
            value = min(value, self._spectral_upper(n, t))
        return value

    def lower(self, n: int, t: float) -> float:
        """Certified lower bound on P(X, t) at depth n."""
        if self.upper_only:
            return -math.inf
        if self.method == METHOD_FULL:
            return self._full_lower(n, t)
        return self._spectral_lower(n, t)

    def enclosure(self, n: int, t: float) -> PressureEnclosure:
        """
        [lower, upper] around P(X, t) from every depth up to n, so the
        enclosures at increasing n are nested.
        """
        if t < 0:
            raise InputError(f"t must be non-negative: {t}")
        if n < 1:
            raise InputError(f"Depth must be positive: {n}")
        upper = self._partition_upper(n, t)
        if self.method in (METHOD_MARKOV, METHOD_BETA):
            for m in range(1, n + 1):
                upper = min(upper, self._spectral_upper(m, t))
        if self.method == METHOD_FULL or self.upper_only:
            lower = self.lower(n, t)
        else:
            lower = max(self.lower(m, t) for m in range(1, n + 1))
        lower = min(lower, upper)
        logger.debug(
            "P(t=%.6g, n=%d) in [%.12g, %.12g] via %s", t, n, lower, upper,
            self.method
        )
        return PressureEnclosure(t, n, lower, upper, self.method)

    def bowen_root(self, n: int, tol: float) -> DimensionEnclosure:
        """Enclose the zero of t -> P(X, t) on [0, 1] at depth n."""
        if tol <= 0:
            raise InputError(f"Tolerance must be positive: {tol}")
        step = tol / 4.0

        def upper(t: float) -> float:
            return self.upper(n, t)

        def lower(t: float) -> float:
            return self.lower(n, t)

        if upper(1.0) >= 0.0:
            h_hi = 1.0
        elif upper(0.0) <= 0.0:
            h_hi = 0.0
        else:
            _, h_hi = bisect_decreasing(upper, 0.0, 1.0, step)

        if self.upper_only or lower(0.0) <= 0.0:
            h_lo = 0.0
        elif lower(1.0) >= 0.0:
            h_lo = 1.0
        else:
            h_lo, _ = bisect_decreasing(lower, 0.0, 1.0, step)

        h_lo = min(h_lo, h_hi)
        logger.debug("Bowen root at depth %d in [%.12g, %.12g]", n, h_lo, h_hi)
        return DimensionEnclosure(
            h_lo=h_lo, h_hi=h_hi, depth=n, guard_hits=self.guard_hits
        )


def partition_log(
    shift: ShiftSpec,
    sys: SystemSpec,
    n: int,
    t: float,
    mode: str = MODE_SUP,
    max_words: int = DEFAULT_MAX_WORDS
) -> float:
    """
    log Z(n, t): log of the sum over L_n(shift) of ||phi_w'||^t (sup-norm
    mode) or |phi_w'(x0)|^t with x0 the midpoint of Y (base-point mode).

    Raises:
        InputError: If t < 0, n < 1 or the mode is unknown
        ResourceError: If L_n exceeds ``max_words``
    """
    engine = PressureEngine(shift, sys, max_words=max_words, upper_only=True)
    return engine.partition_log(n, t, mode)


def pressure_enclosure(
    shift: ShiftSpec,
    sys: SystemSpec,
    n: int,
    t: float,
    max_words: int = DEFAULT_MAX_WORDS,
    max_states: int = DEFAULT_MAX_STATES,
    max_junction_words: int = DEFAULT_MAX_JUNCTION_WORDS
) -> PressureEnclosure:
    """
    Certified enclosure of P(shift, t) at depth n.

    Raises:
        InputError: If t < 0 or n < 1
        PreconditionError: For a reducible Markov chain
        ResourceError: If a language or junction budget is exceeded
    """
    engine = PressureEngine(
        shift, sys, max_words, max_states, max_junction_words
    )
    return engine.enclosure(n, t)


def bowen_root(
    shift: ShiftSpec,
    sys: SystemSpec,
    n: int,
    tol: float,
    max_words: int = DEFAULT_MAX_WORDS,
    max_states: int = DEFAULT_MAX_STATES,
    max_junction_words: int = DEFAULT_MAX_JUNCTION_WORDS
) -> DimensionEnclosure:
    """
    Enclose the Hausdorff dimension of J(shift) from depth-n pressure
    bounds, each root located by bisection to tol/4.
    """
    engine = PressureEngine(
        shift, sys, max_words, max_states, max_junction_words
    )
    return engine.bowen_root(n, tol)
