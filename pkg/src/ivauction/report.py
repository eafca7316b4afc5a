"""Solve reports: optimal ratio, witness rule, and a checkable certificate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ._rat import Rat
from .core import AllocationRule


@dataclass
class SolveReport:
    """Result of one solver run.

    ``certificate`` is a JSON-compatible dict whose "type" key selects the
    verification procedure in :func:`ivauction.oracle.verify_report`:
    conflict_pair, matching, lp_basis, or exhaustive.
    """

    objective: str  # "value" | "cost" | "det"
    ratio: Rat
    allocation: AllocationRule
    certificate: dict = field(default_factory=dict)
    path: str = ""
    wall_time: Optional[float] = None
