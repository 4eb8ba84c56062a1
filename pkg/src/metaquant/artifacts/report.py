"""Human-readable summaries of a search report."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import FormatError
from ..policy import BitwidthPolicy, SearchReport
from .writers import bitwidth_rows, csv_text


@dataclass
class PolicySummary:
    table: str
    csv: str
    edge_mean_bits: float
    interior_mean_bits: float | None

    @property
    def edges_keep_more_bits(self) -> bool | None:
        if self.interior_mean_bits is None:
            return None
        return self.edge_mean_bits > self.interior_mean_bits


def edge_interior_bits(policy: BitwidthPolicy) -> tuple[float, float | None]:
    """Mean bits of the first and last layer, and of the layers between them."""
    bits = policy.bits
    edges = (bits[0], bits[-1]) if len(bits) > 1 else (bits[0],)
    interior = bits[1:-1]
    return sum(edges) / len(edges), (sum(interior) / len(interior) if interior else None)


def summarize_report(report: SearchReport) -> PolicySummary:
    q_max = report.bit_range[1]
    rows = bitwidth_rows(report.best_policy, q_max)
    edge, interior = edge_interior_bits(report.best_policy)
    lines = [
        f"policy {report.best_policy}  ratio {report.best_ratio:.3f}x (target {report.target_ratio:g}x)  "
        f"accuracy {report.best_accuracy:.4f}",
        f"{'layer':>5}  {'bits':>4}  {'q/q_max':>7}",
    ]
    lines += [f"{layer:>5}  {bits:>4}  {normalized:>7.3f}" for layer, bits, normalized in rows]
    if interior is not None:
        verdict = "more" if edge > interior else "not more"
        lines.append(f"edge layers average {edge:.2f} bits, interior {interior:.2f}: edges keep {verdict} bits")
    return PolicySummary(
        table="\n".join(lines) + "\n",
        csv=csv_text(("layer", "bits", "normalized"), rows),
        edge_mean_bits=edge,
        interior_mean_bits=interior,
    )


def report_policy(search_json: Path) -> PolicySummary:
    """Load a search report from disk and summarize it."""
    try:
        text = search_json.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {search_json}: {exc}") from exc
    return summarize_report(SearchReport.from_json(text))
