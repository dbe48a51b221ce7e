"""Shared small types used across the package."""

from __future__ import annotations

from dataclasses import dataclass


class CapacityError(Exception):
    """An enumeration cap would be exceeded by the requested computation."""


class ValidationError(ValueError):
    """An instance or distribution violates a structural invariant."""


@dataclass(frozen=True)
class ExpectationEstimate:
    """An expectation, either exact or estimated by Monte Carlo.

    std_error is 0 for exact values; method is "exact" or "mc:<trials>".
    """

    mean: float
    std_error: float = 0.0
    method: str = "exact"

    def __post_init__(self):
        if self.std_error < 0:
            raise ValidationError("std_error must be nonnegative")

    @property
    def exact(self) -> bool:
        return self.method == "exact"
