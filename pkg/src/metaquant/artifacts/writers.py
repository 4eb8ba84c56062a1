"""Plain-text artifact writers (CSV and JSON)."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from ..policy import BitwidthPolicy


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def write_json(path: Path, data: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


def bitwidth_rows(policy: BitwidthPolicy, q_max: int | None = None) -> list[tuple[int, int, float]]:
    """``(layer, bits, bits / q_max)`` per layer."""
    return [
        (index, bits, normalized)
        for index, (bits, normalized) in enumerate(zip(policy.bits, policy.normalized(q_max), strict=True))
    ]


def write_bitwidth_csv(path: Path, policy: BitwidthPolicy, q_max: int | None = None) -> Path:
    return write_csv(path, ("layer", "bits", "normalized"), bitwidth_rows(policy, q_max))
