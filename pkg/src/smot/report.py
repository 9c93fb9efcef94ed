from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a checker.  ``violation`` holds the first offending configuration."""

    ok: bool
    check: str
    violation: Any = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        out = {"check": self.check, "ok": self.ok}
        if self.violation is not None:
            out["violation"] = self.violation
        if self.detail:
            out["detail"] = self.detail
        out.update(self.extra)
        return out


def passed(check: str, **extra) -> CheckReport:
    return CheckReport(True, check, extra=extra)


def failed(check: str, violation=None, detail: str = "", **extra) -> CheckReport:
    return CheckReport(False, check, violation, detail, extra=extra)
