"""Validation-driven repair and pruning of assembled specs."""

from .loop import (
    DEFAULT_MAX_ROUNDS,
    RepairReport,
    RepairTask,
    Unrepairable,
    match_errors,
    repair_description,
    repair_spec,
)

__all__ = [
    "DEFAULT_MAX_ROUNDS",
    "RepairReport",
    "RepairTask",
    "Unrepairable",
    "match_errors",
    "repair_description",
    "repair_spec",
]
