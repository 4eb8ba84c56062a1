"""Brute-force policy search for small spaces; the reference for the genetic search."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence

from ..constants import EXHAUSTIVE_CAP
from ..datasets import DataSplit
from ..errors import InfeasibleError, SearchSpaceError
from ..hypernet import MetaQuantNet
from ..target_net import TargetNetSpec
from .accounting import CompressionConstraint, compression_ratio, is_feasible
from .bitwidth import BitwidthPolicy, validate_bit_range
from .evaluate import evaluate_policy, selection_key

logger = logging.getLogger(__name__)


def exhaustive_search(
    net: MetaQuantNet,
    spec: TargetNetSpec,
    constraint: CompressionConstraint,
    bit_range: Sequence[int],
    val_subset: DataSplit,
    cap: int = EXHAUSTIVE_CAP,
) -> BitwidthPolicy:
    """Return the feasible policy with the best accuracy.

    Ties go to the higher compression ratio, then the lexicographically
    smaller policy.
    """
    low, high = validate_bit_range(bit_range)
    space = (high - low + 1) ** spec.layer_count
    if space > cap:
        raise SearchSpaceError(f"{space} policies exceed the exhaustive cap of {cap}")

    feasible = [
        bits
        for bits in itertools.product(range(low, high + 1), repeat=spec.layer_count)
        if is_feasible(bits, spec, constraint)
    ]
    if not feasible:
        raise InfeasibleError(f"no policy in bits [{low}, {high}] reaches {constraint.target_ratio}x")
    logger.info("Exhaustive search over %d feasible of %d policies", len(feasible), space)

    best = min(
        feasible,
        key=lambda bits: selection_key(
            bits, evaluate_policy(net, spec, bits, val_subset), compression_ratio(bits, spec, constraint)
        ),
    )
    return BitwidthPolicy(best)
