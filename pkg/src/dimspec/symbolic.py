"""
Alphabets, words and subshift descriptors.

Languages are built level by level: every variant here has a factor-closed
language in which each admissible word of length n+1 extends an admissible
word of length n, so extending and pruning one letter at a time yields
exactly L_n. Levels are held as integer arrays (one word per row) in
lexicographic order.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from ._internal_utils import GUARD_BAND
from ._logging import get_logger
from .exceptions import InputError, PreconditionError, ResourceError


logger = get_logger(__name__)

Word = Tuple[int, ...]

DEFAULT_MAX_WORDS = 2**22


def parse_word(text: str) -> Word:
    """
    Parse a word from its string form.

    Single-digit alphabets use plain digit strings ("0101"); larger letters
    are written comma separated ("0,12,3"). The empty string is the empty
    word.
    """
    text = text.strip()
    if not text:
        return ()
    try:
        if "," in text:
            letters = tuple(int(part) for part in text.split(","))
        else:
            letters = tuple(int(char) for char in text)
    except ValueError as e:
        raise InputError(f"Cannot parse word {text!r}: {str(e)}") from e
    if any(letter < 0 for letter in letters):
        raise InputError(f"Negative letter in word {text!r}")
    return letters


def format_word(word: Iterable[int]) -> str:
    """Inverse of :func:`parse_word`."""
    letters = [int(letter) for letter in word]
    if any(letter > 9 for letter in letters):
        return ",".join(str(letter) for letter in letters)
    return "".join(str(letter) for letter in letters)


@dataclass(frozen=True)
class LanguageLevel:
    """One level of a language: words as rows plus per-word scan state."""
    words: np.ndarray
    state: Optional[np.ndarray] = None
    guard_hits: int = 0

    @property
    def count(self) -> int:
        return int(self.words.shape[0])


class ShiftSpec:
    """Declarative description of a one-sided subshift."""

    @property
    def alphabet_size(self) -> int:
        raise NotImplementedError

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def admits(self, word: Word) -> bool:
        """Membership test for a word already known to be in range."""
        raise NotImplementedError

    def initial_level(self) -> LanguageLevel:
        """Level one of the language."""
        letters = np.arange(self.alphabet_size, dtype=np.int16)
        words = letters.reshape(-1, 1)
        keep = np.array([self.admits((int(a), )) for a in letters], bool)
        return LanguageLevel(words=words[keep])

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        """Extend every word of ``level`` by one letter and prune."""
        raise NotImplementedError

    def _candidates(
        self, level: LanguageLevel
    ) -> Tuple[np.ndarray, np.ndarray]:
        """All one-letter extensions, in lexicographic order."""
        size = self.alphabet_size
        parents = np.repeat(np.arange(level.count), size)
        letters = np.tile(np.arange(size, dtype=np.int16), level.count)
        return parents, letters


@dataclass(frozen=True)
class FullShift(ShiftSpec):
    """The full shift on ``size`` letters."""
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise InputError(
                f"Full shift needs at least one letter: {self.size}"
            )

    @property
    def alphabet_size(self) -> int:
        return self.size

    @property
    def kind(self) -> str:
        return "full"

    def admits(self, word: Word) -> bool:
        return True

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        parents, letters = self._candidates(level)
        words = np.column_stack([level.words[parents], letters])
        return LanguageLevel(words=words)


@dataclass(frozen=True)
class MarkovShift(ShiftSpec):
    """
    Topological Markov chain given by allowed ordered pairs.

    ``letters`` restricts the active alphabet; it defaults to every letter
    below ``size``. Restricted chains keep the original letter indices so
    that a system defined on the full alphabet still applies.
    """
    size: int
    adjacency: FrozenSet[Tuple[int, int]]
    letters: Optional[FrozenSet[int]] = None

    def __post_init__(self):
        object.__setattr__(
            self, "adjacency",
            frozenset((int(i), int(j)) for i, j in self.adjacency)
        )
        if self.letters is not None:
            object.__setattr__(
                self, "letters", frozenset(int(a) for a in self.letters)
            )
        for i, j in self.adjacency:
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise InputError(
                    f"Adjacency pair ({i}, {j}) outside alphabet of size "
                    f"{self.size}"
                )
        for letter in self.active_letters:
            if not 0 <= letter < self.size:
                raise InputError(f"Active letter {letter} outside alphabet")

    @property
    def alphabet_size(self) -> int:
        return self.size

    @property
    def kind(self) -> str:
        return "markov"

    @property
    def active_letters(self) -> FrozenSet[int]:
        if self.letters is None:
            return frozenset(range(self.size))
        return self.letters

    @cached_property
    def transition_matrix(self) -> np.ndarray:
        """0/1 matrix of allowed pairs between active letters."""
        matrix = np.zeros((self.size, self.size), dtype=bool)
        active = self.active_letters
        for i, j in self.adjacency:
            if i in active and j in active:
                matrix[i, j] = True
        return matrix

    def admits(self, word: Word) -> bool:
        active = self.active_letters
        if any(letter not in active for letter in word):
            return False
        return all(
            (word[i], word[i + 1]) in self.adjacency
            for i in range(len(word) - 1)
        )

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        parents, letters = self._candidates(level)
        last = level.words[parents, -1]
        keep = self.transition_matrix[last, letters]
        words = np.column_stack([level.words[parents[keep]], letters[keep]])
        return LanguageLevel(words=words)

    def restrict(self, component: Iterable[int]) -> "MarkovShift":
        """The chain restricted to the letters of ``component``."""
        component = frozenset(int(a) for a in component)
        pairs = frozenset(
            (i, j) for i, j in self.adjacency
            if i in component and j in component
        )
        return MarkovShift(self.size, pairs, component)

    def graph(self) -> nx.DiGraph:
        """Adjacency digraph on the active letters, built in sorted order."""
        graph = nx.DiGraph()
        active = self.active_letters
        graph.add_nodes_from(sorted(active))
        graph.add_edges_from(
            sorted((i, j) for i, j in self.adjacency
                   if i in active and j in active)
        )
        return graph


def _beta_alphabet(beta: float) -> int:
    return max(math.ceil(beta), 1)


@dataclass(frozen=True)
class BetaShift(ShiftSpec):
    """
    The beta-shift X_beta.

    beta <= 1 is the singleton shift {0^inf}; an integer beta is the full
    shift on beta letters; otherwise a sequence is admissible when every
    window sum sum_s x_{i+s} beta^{-s} stays below 1. Sums inside the guard
    band of 1 are rejected so that rounding only ever removes words.
    """
    beta: float

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InputError(
                f"beta must be a finite non-negative real: {self.beta}"
            )
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def alphabet_size(self) -> int:
        return _beta_alphabet(self.beta)

    @property
    def kind(self) -> str:
        return "beta"

    @property
    def is_singleton(self) -> bool:
        return self.beta <= 1.0

    @property
    def is_full(self) -> bool:
        return self.beta > 1.0 and float(self.beta).is_integer()

    def suffix_sums(self, word: Word) -> List[float]:
        """Window sums starting at every position, run to the word's end."""
        sums = [0.0] * len(word)
        running = 0.0
        for i in range(len(word) - 1, -1, -1):
            running = (word[i] + running) / self.beta
            sums[i] = running
        return sums

    def admits(self, word: Word) -> bool:
        if self.is_singleton:
            return all(letter == 0 for letter in word)
        if self.is_full:
            return all(letter < self.alphabet_size for letter in word)
        peak = max(self.suffix_sums(word), default=0.0)
        if abs(peak - 1.0) < GUARD_BAND:
            logger.debug(
                "Window sum %.17g of %s within guard band at beta=%s", peak,
                format_word(word), self.beta
            )
        return peak < 1.0 - GUARD_BAND

    def initial_level(self) -> LanguageLevel:
        level = super().initial_level()
        if self.is_singleton or self.is_full:
            return level
        state = level.words.astype(float) / self.beta
        return LanguageLevel(words=level.words, state=state)

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        if self.is_full:
            return FullShift(self.alphabet_size).extend_level(level)
        if self.is_singleton:
            zeros = np.zeros((level.count, 1), dtype=np.int16)
            return LanguageLevel(words=np.hstack([level.words, zeros]))
        words, state, hits = _extend_window_sums(
            self.beta, self.alphabet_size, level
        )
        return LanguageLevel(words, state, level.guard_hits + hits)


def _extend_window_sums(
    beta: float,
    size: int,
    level: LanguageLevel,
    window: Optional[int] = None,
    ceiling: float = 1.0
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Extend a beta-shift level using its suffix window sums.

    With ``window`` set, the complete window of that length ending at the
    new letter must additionally sum below ``ceiling``.
    """
    n = level.words.shape[1]
    parents = np.repeat(np.arange(level.count), size)
    letters = np.tile(np.arange(size, dtype=np.int16), level.count)
    # new letter sits at offset n - p + 1 from start position p
    powers = beta**(-(n - np.arange(n) + 1.0))
    sums = level.state[parents] + letters[:, None] * powers[None, :]
    sums = np.column_stack([sums, letters / beta])
    peak = sums.max(axis=1)
    keep = peak < 1.0 - GUARD_BAND
    hits = int(np.count_nonzero(np.abs(peak - 1.0) < GUARD_BAND))
    if window is not None and n + 1 >= window:
        start = n + 1 - window
        leading = sums[:, start]
        keep &= leading < ceiling - GUARD_BAND
        hits += int(np.count_nonzero(np.abs(leading - ceiling) < GUARD_BAND))
    if hits:
        logger.debug(
            "%d window sums fell inside the guard band at beta=%s, length %d",
            hits, beta, n + 1
        )
    words = np.column_stack([level.words[parents[keep]], letters[keep]])
    return words, sums[keep], hits


@dataclass(frozen=True)
class InnerSftSpec(ShiftSpec):
    """
    Shift of finite type W_m contained in X_beta.

    Every length-m window must sum below 1 - margin, where the margin
    bounds the tail of any infinite window beyond m letters; the
    remaining (m-1)-blocks must be admissible in X_beta.
    """
    beta: float
    window: int

    def __post_init__(self):
        if self.beta <= 1.0:
            raise InputError(f"Inner SFT needs beta > 1: {self.beta}")
        if self.window < 2:
            raise InputError(f"Inner SFT window must be >= 2: {self.window}")

    @property
    def alphabet_size(self) -> int:
        return _beta_alphabet(self.beta)

    @property
    def kind(self) -> str:
        return "inner-sft"

    @property
    def margin(self) -> float:
        return ((math.ceil(self.beta) - 1) * self.beta**(-self.window)
                / (self.beta - 1.0))

    @property
    def ceiling(self) -> float:
        return 1.0 - self.margin

    @property
    def outer(self) -> BetaShift:
        return BetaShift(self.beta)

    def admits(self, word: Word) -> bool:
        if not self.outer.admits(word):
            return False
        weights = [self.beta**(-s) for s in range(1, self.window + 1)]
        for start in range(len(word) - self.window + 1):
            leading = sum(
                letter * weight for letter, weight in
                zip(word[start:start + self.window], weights)
            )
            if leading >= self.ceiling - GUARD_BAND:
                return False
        return True

    def initial_level(self) -> LanguageLevel:
        level = ShiftSpec.initial_level(self)
        state = level.words.astype(float) / self.beta
        return LanguageLevel(words=level.words, state=state)

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        words, state, hits = _extend_window_sums(
            self.beta, self.alphabet_size, level, self.window, self.ceiling
        )
        return LanguageLevel(words, state, level.guard_hits + hits)

    def vertices(self, max_words: int = DEFAULT_MAX_WORDS) -> List[Word]:
        """Vertex blocks: L_{m-1}(X_beta)."""
        return language(self.outer, self.window - 1, max_words)

    def transitions(
        self, max_words: int = DEFAULT_MAX_WORDS
    ) -> List[Tuple[Word, Word]]:
        """Overlap-consistent vertex pairs whose m-window clears the ceiling."""
        return [(word[:-1], word[1:])
                for word in language(self, self.window, max_words)]


@dataclass(frozen=True)
class CodedShift(ShiftSpec):
    """
    Coded shift: factors of block concatenations b_{i1} b_{i2} ... whose
    index sequence i1 i2 ... lies in the beta-shift X_{index_beta}.
    """
    blocks: Tuple[Word, ...]
    index_beta: float
    base: Optional[ShiftSpec] = None

    def __post_init__(self):
        blocks = tuple(tuple(int(a) for a in block) for block in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks or any(len(block) == 0 for block in blocks):
            raise InputError("Coded shift blocks must be nonempty")
        if len(set(blocks)) != len(blocks):
            raise InputError("Coded shift blocks must be pairwise distinct")
        if self.index_shift.alphabet_size > len(blocks):
            raise InputError(
                f"index beta {self.index_beta} needs "
                f"{self.index_shift.alphabet_size} blocks, got {len(blocks)}"
            )
        if self.base is not None:
            for block in blocks:
                if not is_word_admissible(self.base, block):
                    raise InputError(
                        f"Block {format_word(block)} is not admissible in the "
                        "base shift"
                    )

    @property
    def alphabet_size(self) -> int:
        if self.base is not None:
            return self.base.alphabet_size
        return max(max(block) for block in self.blocks) + 1

    @property
    def kind(self) -> str:
        return "coded"

    @property
    def index_shift(self) -> BetaShift:
        return BetaShift(self.index_beta)

    def factors(self, n: int, max_words: int = DEFAULT_MAX_WORDS) -> List[Word]:
        """All length-n factors of admissible block concatenations."""
        shortest = min(len(block) for block in self.blocks)
        span = -(-n // shortest) + 2
        found = set()
        for index_word in language(self.index_shift, span, max_words):
            text = [
                letter for index in index_word
                for letter in self.blocks[index]
            ]
            for start in range(len(text) - n + 1):
                found.add(tuple(text[start:start + n]))
            if len(found) > max_words:
                raise ResourceError(
                    f"Coded language of length {n} exceeds max_words="
                    f"{max_words} (at least {len(found)} words)",
                    estimate=len(found),
                    budget=max_words
                )
        return sorted(found)

    def admits(self, word: Word) -> bool:
        return word in set(self.factors(len(word)))

    def extend_level(self, level: LanguageLevel) -> LanguageLevel:
        n = level.words.shape[1] + 1
        words = np.array(self.factors(n), dtype=np.int16).reshape(-1, n)
        return LanguageLevel(words=words)


def _check_letters(spec: ShiftSpec, word: Word) -> None:
    for letter in word:
        if not 0 <= letter < spec.alphabet_size:
            raise InputError(
                f"Letter {letter} outside alphabet of size {spec.alphabet_size}"
            )


def is_word_admissible(spec: ShiftSpec, word: Word) -> bool:
    """
    Decide whether ``word`` lies in the language of ``spec``.

    Raises:
        InputError: If a letter is outside the alphabet
    """
    word = tuple(int(a) for a in word)
    _check_letters(spec, word)
    return spec.admits(word)


@lru_cache(maxsize=64)
def language_level(
    spec: ShiftSpec,
    n: int,
    max_words: int = DEFAULT_MAX_WORDS
) -> LanguageLevel:
    """
    The n-th language level of ``spec`` as an array, cached per spec.

    Raises:
        InputError: If n is not positive
        ResourceError: If the level would exceed ``max_words`` words
    """
    if n < 1:
        raise InputError(f"Word length must be positive: {n}")
    if n == 1:
        level = spec.initial_level()
    else:
        previous = language_level(spec, n - 1, max_words)
        estimate = previous.count * spec.alphabet_size
        if estimate > 4 * max_words:
            raise ResourceError(
                f"Language of length {n} may hold {estimate} words, over "
                f"max_words={max_words}",
                estimate=estimate,
                budget=max_words
            )
        level = spec.extend_level(previous)
    if level.count > max_words:
        raise ResourceError(
            f"Language of length {n} holds {level.count} words, over "
            f"max_words={max_words}",
            estimate=level.count,
            budget=max_words
        )
    level.words.setflags(write=False)
    if level.state is not None:
        level.state.setflags(write=False)
    return level


def language(
    spec: ShiftSpec,
    n: int,
    max_words: int = DEFAULT_MAX_WORDS
) -> List[Word]:
    """L_n(spec) in lexicographic order."""
    level = language_level(spec, n, max_words)
    return [tuple(int(a) for a in row) for row in level.words]


def count_language(
    spec: ShiftSpec,
    n: int,
    max_words: int = DEFAULT_MAX_WORDS
) -> int:
    """|L_n(spec)|; exact without enumeration for full shifts."""
    if isinstance(spec, FullShift):
        return spec.size**n
    if isinstance(spec, BetaShift) and spec.is_full:
        return spec.alphabet_size**n
    if isinstance(spec, BetaShift) and spec.is_singleton:
        return 1
    return language_level(spec, n, max_words).count


@dataclass(frozen=True)
class SccDecomposition:
    """Irreducible pieces of a Markov chain."""
    components: Tuple[FrozenSet[int], ...]
    maximal_flags: Tuple[bool, ...]


def _on_cycle(graph: nx.DiGraph, component: FrozenSet[int]) -> bool:
    if len(component) > 1:
        return True
    (letter, ) = tuple(component)
    return graph.has_edge(letter, letter)


def scc_decomposition(spec: MarkovShift) -> SccDecomposition:
    """
    Strongly connected components of the adjacency digraph that carry at
    least one cycle, ordered by their smallest letter.
    """
    if not isinstance(spec, MarkovShift):
        raise InputError("SCC decomposition needs a Markov shift")
    graph = spec.graph()
    components = [
        frozenset(component)
        for component in nx.strongly_connected_components(graph)
        if _on_cycle(graph, frozenset(component))
    ]
    components.sort(key=min)
    flags = tuple(
        nx.is_strongly_connected(graph.subgraph(component))
        for component in components
    )
    logger.debug("Markov chain splits into %d components", len(components))
    return SccDecomposition(tuple(components), flags)


def is_irreducible(spec: MarkovShift) -> bool:
    """True when the active letters form a single cycle-carrying component."""
    graph = spec.graph()
    if graph.number_of_nodes() == 0 or graph.number_of_edges() == 0:
        return False
    return nx.is_strongly_connected(graph) and _on_cycle(
        graph, frozenset(graph.nodes)
    )


@dataclass(frozen=True)
class ConnectorTable:
    """Shortest connecting words w_{i,j} with i w_{i,j} j admissible."""
    words: Dict[Tuple[int, int], Word] = field(default_factory=dict)

    @property
    def max_length(self) -> int:
        return max((len(word) for word in self.words.values()), default=0)

    def __getitem__(self, pair: Tuple[int, int]) -> Word:
        return self.words[pair]


def connecting_words(
    spec: MarkovShift,
    component: Optional[Iterable[int]] = None
) -> ConnectorTable:
    """
    Breadth-first shortest connectors for every ordered pair of letters of
    an irreducible component. A connector is empty when the pair itself is
    allowed.

    Raises:
        PreconditionError: If the component is not irreducible
    """
    restricted = spec if component is None else spec.restrict(component)
    if not is_irreducible(restricted):
        raise PreconditionError(
            "Connecting words need an irreducible component; select one with "
            "scc_decomposition"
        )
    graph = restricted.graph()
    letters = sorted(graph.nodes)
    words = {}
    for i in letters:
        for j in letters:
            if graph.has_edge(i, j):
                words[(i, j)] = ()
                continue
            best = None
            for successor in sorted(graph.successors(i)):
                path = nx.shortest_path(graph, successor, j)
                candidate = tuple(path[:-1])
                if best is None or len(candidate) < len(best):
                    best = candidate
            words[(i, j)] = best
    return ConnectorTable(words)
