"""Verification verdicts.

Failed checks are data, never exceptions: every check returns one
VerificationReport and a failing one carries the offending item.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from typing import Any

from omegafactor.jsonio import dumps


@dataclass(frozen=True, slots=True)
class VerificationReport:
    check: str
    scope: dict[str, Any]
    ok: bool
    counterexample: dict[str, Any] | None = None
    # how many items the check looked at
    checked: int = 0
    notes: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def passed(cls, check: str, scope: dict[str, Any], checked: int, **notes: Any) -> VerificationReport:
        return cls(check, dict(scope), True, None, checked, notes)

    @classmethod
    def failed(
        cls, check: str, scope: dict[str, Any], counterexample: dict[str, Any], checked: int = 0
    ) -> VerificationReport:
        return cls(check, dict(scope), False, counterexample, checked)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "check": self.check,
            "scope": self.scope,
            "ok": self.ok,
            "checked": self.checked,
            "counterexample": self.counterexample,
        }
        if self.notes:
            out["notes"] = self.notes
        return out


def all_ok(reports: Iterable[VerificationReport]) -> bool:
    return all(r.ok for r in reports)


def failures(reports: Iterable[VerificationReport]) -> list[VerificationReport]:
    return [r for r in reports if not r.ok]


def reports_json(reports: Iterable[VerificationReport]) -> str:
    items = [r.to_dict() for r in reports]
    return dumps({"ok": all(i["ok"] for i in items), "reports": items})
