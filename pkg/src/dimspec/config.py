"""Run configuration and result records."""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from .conformal import (
    SystemSpec,
    affine_system,
    continued_fraction_system,
)
from .pressure import DEFAULT_MAX_JUNCTION_WORDS, DEFAULT_MAX_STATES
from .spectrum import Budget
from .symbolic import (
    DEFAULT_MAX_WORDS,
    BetaShift,
    CodedShift,
    FullShift,
    MarkovShift,
    ShiftSpec,
    parse_word,
)


class SystemConfig(BaseModel):
    """Map family and its parameters."""
    model_config = ConfigDict(extra="forbid")

    family: Literal["affine", "continued-fraction"]
    ratios: Optional[List[float]] = None
    offsets: Optional[List[float]] = None
    digits: Optional[List[PositiveInt]] = None
    k_override: Optional[float] = None
    refine_iterations: PositiveInt = 20

    @model_validator(mode="after")
    def _check_family(self) -> "SystemConfig":
        if self.family == "affine" and not self.ratios:
            raise ValueError("affine systems need ratios")
        if self.family == "continued-fraction" and not self.digits:
            raise ValueError("continued-fraction systems need digits")
        return self

    @property
    def size(self) -> int:
        if self.family == "affine":
            return len(self.ratios)
        return len(self.digits)

    def build(self) -> SystemSpec:
        if self.family == "affine":
            return affine_system(
                self.ratios,
                self.offsets,
                k_override=self.k_override,
                iterations=self.refine_iterations
            )
        return continued_fraction_system(
            self.digits,
            k_override=self.k_override,
            iterations=self.refine_iterations
        )


class ShiftConfig(BaseModel):
    """
    Subshift kind and parameters. Words are digit strings. A coded shift
    with ``adjacency`` takes that Markov chain as its base, and its blocks
    must then be admissible and compose in it.
    """
    model_config = ConfigDict(extra="forbid")

    kind: Literal["full", "beta", "markov", "coded"]
    size: Optional[PositiveInt] = None
    beta: Optional[float] = Field(default=None, ge=0)
    adjacency: Optional[List[Tuple[int, int]]] = None
    letters: Optional[List[int]] = None
    blocks: Optional[List[str]] = None
    index_beta: Optional[float] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_kind(self) -> "ShiftConfig":
        if self.kind == "beta" and self.beta is None:
            raise ValueError("beta shifts need beta")
        if self.kind == "markov" and self.adjacency is None:
            raise ValueError("markov shifts need adjacency")
        if self.kind == "coded" and (not self.blocks
                                     or self.index_beta is None):
            raise ValueError("coded shifts need blocks and index_beta")
        return self

    def alphabet_size(self, system_size: int) -> int:
        """Letters the shift can use, given the system's alphabet."""
        if self.kind == "beta":
            return max(math.ceil(self.beta), 1)
        if self.kind == "coded" and self.adjacency is None:
            return max(max(parse_word(block)) for block in self.blocks) + 1
        return self.size or system_size

    def build(self, system_size: int) -> ShiftSpec:
        if self.kind == "full":
            return FullShift(self.size or system_size)
        if self.kind == "beta":
            return BetaShift(self.beta)
        if self.kind == "markov":
            return self._markov(system_size)
        base = None if self.adjacency is None else self._markov(system_size)
        return CodedShift(
            tuple(parse_word(block) for block in self.blocks),
            self.index_beta,
            base=base
        )

    def _markov(self, system_size: int) -> MarkovShift:
        letters = None if self.letters is None else frozenset(self.letters)
        return MarkovShift(
            self.size or system_size, frozenset(self.adjacency), letters
        )


class TaskConfig(BaseModel):
    """The single task of a run and its parameters."""
    model_config = ConfigDict(extra="forbid")

    name: Literal["dimension", "invert", "curve", "pressure", "language",
                  "replace", "exhaust", "markov-invert"]
    d_target: Optional[float] = Field(default=None, ge=0, le=1)
    beta_lo: Optional[float] = Field(default=None, ge=0)
    beta_hi: Optional[float] = Field(default=None, ge=0)
    step: Optional[PositiveFloat] = None
    t: Optional[List[float]] = None
    depth: Optional[PositiveInt] = None
    word: Optional[str] = None
    beta: Optional[float] = None
    beta_prime: Optional[float] = None
    k: Optional[PositiveInt] = None
    sizes: Optional[List[PositiveInt]] = None
    anchor: Optional[int] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "TaskConfig":
        required = {
            "invert": ("d_target", ),
            "markov-invert": ("d_target", ),
            "curve": ("beta_lo", "beta_hi", "step"),
            "pressure": ("t", "depth"),
            "language": ("depth", ),
            "replace": ("word", "beta", "beta_prime", "k"),
            "exhaust": ("sizes", ),
        }.get(self.name, ())
        missing = [field for field in required if getattr(self, field) is None]
        if missing:
            raise ValueError(
                f"task {self.name} needs {', '.join(missing)}"
            )
        return self


class BudgetConfig(BaseModel):
    """Resource limits and accuracy targets."""
    model_config = ConfigDict(extra="forbid")

    max_depth: PositiveInt = 20
    max_words: PositiveInt = DEFAULT_MAX_WORDS
    target_width: PositiveFloat = 0.05
    epsilon: PositiveFloat = 0.01
    max_states: PositiveInt = DEFAULT_MAX_STATES
    max_junction_words: PositiveInt = DEFAULT_MAX_JUNCTION_WORDS

    def to_budget(self) -> Budget:
        return Budget(
            max_depth=self.max_depth,
            max_words=self.max_words,
            max_states=self.max_states,
            max_junction_words=self.max_junction_words
        )


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None
    include_timing: bool = False


class RunConfig(BaseModel):
    """A complete run: system, shift, one task, budgets and output."""
    model_config = ConfigDict(extra="forbid")

    system: SystemConfig
    shift: ShiftConfig
    task: TaskConfig
    budgets: BudgetConfig = BudgetConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        name = self.task.name
        if name in ("invert", "curve") and self.shift.kind != "full":
            raise ValueError(
                f"task {name} sweeps beta itself and needs a full shift; "
                "use markov-invert inside a Markov chain"
            )
        if name == "markov-invert" and self.shift.kind != "markov":
            raise ValueError("task markov-invert needs a markov shift")
        if name == "exhaust" and self.system.family != "continued-fraction":
            raise ValueError("task exhaust needs the continued-fraction family")
        letters = self.shift.alphabet_size(self.system.size)
        if letters > self.system.size:
            raise ValueError(
                f"shift uses {letters} letters but the system has "
                f"{self.system.size} maps"
            )
        return self


class ResultRecord(BaseModel):
    """
    One output record. Enclosures always appear as explicit lower and
    upper fields. ``wall_time`` is set only when timing is requested.
    """
    task: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    outputs: Dict[str, Any] = Field(default_factory=dict)
    flags: Dict[str, Any] = Field(default_factory=dict)
    wall_time: Optional[float] = None

    def to_json(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        if self.wall_time is None:
            data.pop("wall_time")
        return data
