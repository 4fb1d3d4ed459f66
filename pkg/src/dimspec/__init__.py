"""
Certified Hausdorff dimension enclosures for shift-generated conformal
constructions.

Limit sets of one-dimensional conformal maps with itineraries restricted
to full shifts, Markov chains, beta-shifts or coded block shifts, their
pressure functions, and inversion of the extended dimension spectrum.
"""

from ._logging import LogConfig, configure_logging, get_logger, run_context
from .betashift import (
    ReplacementPlan,
    delta_bound,
    fiber_bound,
    greedy_expansion,
    inner_sft,
    perturbation_bound,
    replace_word,
    sparse_zero_replacement,
)
from .conformal import (
    CylinderInterval,
    SystemSpec,
    affine_system,
    continued_fraction_system,
    cylinder_interval,
    induced_block_system,
    refine_domain,
    system_constants,
    word_derivative_at,
    word_derivative_norm,
)
from .exceptions import (
    ConfigurationError,
    DimspecError,
    InputError,
    InternalError,
    PreconditionError,
    ResourceError,
    SpectrumRangeError,
)
from .pressure import (
    DimensionEnclosure,
    PressureEnclosure,
    bowen_root,
    partition_log,
    pressure_enclosure,
)
from .spectrum import (
    BlockConstruction,
    Budget,
    beta_curve,
    dimension,
    exhaustion_dimension,
    invert_dimension,
    invert_dimension_markov,
    markov_block_construction,
)
from .symbolic import (
    BetaShift,
    CodedShift,
    FullShift,
    MarkovShift,
    connecting_words,
    count_language,
    is_word_admissible,
    language,
    scc_decomposition,
)


__all__ = [
    "BetaShift",
    "CodedShift",
    "FullShift",
    "MarkovShift",
    "connecting_words",
    "count_language",
    "is_word_admissible",
    "language",
    "scc_decomposition",
    "ReplacementPlan",
    "delta_bound",
    "fiber_bound",
    "greedy_expansion",
    "inner_sft",
    "perturbation_bound",
    "replace_word",
    "sparse_zero_replacement",
    "CylinderInterval",
    "SystemSpec",
    "affine_system",
    "continued_fraction_system",
    "cylinder_interval",
    "induced_block_system",
    "refine_domain",
    "system_constants",
    "word_derivative_at",
    "word_derivative_norm",
    "DimensionEnclosure",
    "PressureEnclosure",
    "bowen_root",
    "partition_log",
    "pressure_enclosure",
    "BlockConstruction",
    "Budget",
    "beta_curve",
    "dimension",
    "exhaustion_dimension",
    "invert_dimension",
    "invert_dimension_markov",
    "markov_block_construction",
    "DimspecError",
    "InputError",
    "PreconditionError",
    "ResourceError",
    "ConfigurationError",
    "SpectrumRangeError",
    "InternalError",
    "configure_logging",
    "get_logger",
    "LogConfig",
    "run_context",
]
