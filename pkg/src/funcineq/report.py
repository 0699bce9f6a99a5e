"""Verification outcome record shared by every checking module."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_SKIP = "skip"


@dataclass
class InequalityReport:
    """One verification outcome.

    ``margin`` is oriented so that a nonnegative value means the inequality
    holds (``rhs - lhs`` for upper bounds ``lhs <= rhs``; for identities the
    negated discrepancy). ``passed`` is ``margin >= -tolerance``; a skipped
    report records a hypothesis that was not met and is neither passed nor
    failed.
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    params: dict = field(default_factory=dict)
    provenance: str = ""
    skipped: bool = False
    reason: str = ""

    @property
    def passed(self) -> bool:
        if self.skipped:
            return False
        return bool(math.isfinite(self.margin) and self.margin >= -self.tolerance)

    @property
    def status(self) -> str:
        if self.skipped:
            return STATUS_SKIP
        return STATUS_PASS if self.passed else STATUS_FAIL

    def sort_key(self):
        return (self.name, sorted((k, repr(v)) for k, v in self.params.items()))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "status": self.status,
            "params": dict(self.params),
            "provenance": self.provenance,
            "reason": self.reason,
        }


def upper_bound(name, lhs, rhs, tolerance, params=None, provenance="") -> InequalityReport:
    """Report for ``lhs <= rhs``."""
    return InequalityReport(name, float(lhs), float(rhs), float(rhs - lhs), float(tolerance),
                            dict(params or {}), provenance)


def identity(name, lhs, rhs, tolerance, params=None, provenance="",
             relative_to: float | None = None) -> InequalityReport:
    """Report for ``lhs == rhs``; the margin is minus the (optionally relative) discrepancy."""
    gap = abs(float(lhs) - float(rhs))
    if relative_to is not None:
        gap /= relative_to
    return InequalityReport(name, float(lhs), float(rhs), -gap, float(tolerance),
                            dict(params or {}), provenance)


def skipped(name, reason, params=None) -> InequalityReport:
    return InequalityReport(name, math.nan, math.nan, math.nan, 0.0, dict(params or {}), "",
                            skipped=True, reason=reason)


def lower_bound(name, lhs, rhs, tolerance, params=None, provenance="") -> InequalityReport:
    """Report for ``lhs >= rhs``."""
    return InequalityReport(name, float(lhs), float(rhs), float(lhs - rhs), float(tolerance),
                            dict(params or {}), provenance)
