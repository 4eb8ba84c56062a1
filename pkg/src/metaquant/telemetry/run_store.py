"""Artifact ledger for a single pipeline run."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

FAILED_SUFFIX = ".failed"


@dataclass
class ArtifactEntry:
    """Record of one file written by a stage."""

    stage: str
    path: Path
    metadata: dict[str, object] = field(default_factory=dict)


class RunStore:
    """Tracks the artifacts a run has written.  Not persisted between runs."""

    def __init__(self, output_dir: Path) -> None:
        self.output_dir = output_dir
        self._artifacts: list[ArtifactEntry] = []

    def add(self, stage: str, path: Path, metadata: dict[str, object] | None = None) -> Path:
        self._artifacts.append(ArtifactEntry(stage=stage, path=path, metadata=metadata or {}))
        logger.info("[%s] wrote %s", stage, path)
        return path

    def paths(self, stage: str | None = None) -> list[Path]:
        return [a.path for a in self._artifacts if stage is None or a.stage == stage]

    def mark_failed(self, reason: str) -> list[Path]:
        """Drop a ``.failed`` marker beside every artifact written so far."""
        markers = []
        for entry in self._artifacts:
            marker = entry.path.with_name(entry.path.name + FAILED_SUFFIX)
            marker.write_text(reason + "\n", encoding="utf-8")
            markers.append(marker)
        if not markers:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            marker = self.output_dir / ("run" + FAILED_SUFFIX)
            marker.write_text(reason + "\n", encoding="utf-8")
            markers.append(marker)
        return markers
