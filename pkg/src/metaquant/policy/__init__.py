"""Bitwidth policies, size accounting and the policy search."""

from .accounting import (
    CompressionConstraint,
    compression_ratio,
    float_size_bits,
    is_feasible,
    model_size_bits,
    size_megabytes,
)
from .bitwidth import BitwidthPolicy, preset_bit_range, validate_bit_range
from .evaluate import evaluate_policy
from .exhaustive import exhaustive_search
from .genetic import GenerationStats, SearchConfig, SearchReport, genetic_search

__all__ = [
    "BitwidthPolicy",
    "CompressionConstraint",
    "GenerationStats",
    "SearchConfig",
    "SearchReport",
    "compression_ratio",
    "evaluate_policy",
    "exhaustive_search",
    "float_size_bits",
    "genetic_search",
    "is_feasible",
    "model_size_bits",
    "preset_bit_range",
    "size_megabytes",
    "validate_bit_range",
]
