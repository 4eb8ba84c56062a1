"""Checkpoints, CSV/JSON writers and policy reports."""

from .checkpoint import Checkpoint, load_checkpoint, restore_net, save_checkpoint
from .report import PolicySummary, edge_interior_bits, report_policy, summarize_report
from .writers import bitwidth_rows, csv_text, write_bitwidth_csv, write_csv, write_json

__all__ = [
    "Checkpoint",
    "PolicySummary",
    "bitwidth_rows",
    "csv_text",
    "edge_interior_bits",
    "load_checkpoint",
    "report_policy",
    "restore_net",
    "save_checkpoint",
    "summarize_report",
    "write_bitwidth_csv",
    "write_csv",
    "write_json",
]
