"""Stage 2: search the best feasible policy on the frozen hypernetwork."""

from __future__ import annotations

import logging

from ..artifacts import write_bitwidth_csv
from ..errors import ConfigError
from ..hypernet import MetaQuantNet
from ..policy import SearchReport, genetic_search
from .common import BITWIDTH_CSV_NAME, SEARCH_JSON_NAME, StageContext, checkpoint_net

logger = logging.getLogger(__name__)


def run_search_stage(ctx: StageContext, net: MetaQuantNet | None = None) -> SearchReport:
    """Search with ``net``, or with the configured checkpoint when none is given."""
    config = ctx.config
    if net is None:
        net = checkpoint_net(ctx, config.checkpoint)
    low, high = config.search.resolved_bit_range(config.constraint)
    net_low, net_high = net.bit_range
    if low < net_low or high > net_high:
        raise ConfigError(
            "search.bit_range",
            f"[{low}, {high}] leaves the range [{net_low}, {net_high}] the hypernetwork was trained on",
        )
    report = genetic_search(net, ctx.spec, config.constraint, config.search, ctx.dataset.split("val"))
    logger.info(
        "Best policy %s: accuracy %.4f at %.3fx (%d evaluations)",
        report.best_policy, report.best_accuracy, report.best_ratio, report.evaluations,
    )
    search_json = ctx.path(SEARCH_JSON_NAME)
    search_json.parent.mkdir(parents=True, exist_ok=True)
    search_json.write_text(report.to_json() + "\n", encoding="utf-8")
    ctx.store.add("search", search_json, {"policy": str(report.best_policy)})
    ctx.store.add("search", write_bitwidth_csv(ctx.path(BITWIDTH_CSV_NAME), report.best_policy, high))
    return report
