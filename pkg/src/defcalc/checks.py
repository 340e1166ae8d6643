"""Named pass/fail checks collected into reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, Optional

PASS, FAIL, NA = "pass", "fail", "n/a"


@dataclass
class Check:
    name: str
    status: str
    witness: Optional[Any] = None

    def to_json(self) -> dict:
        out = {"name": self.name, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class Report:
    """Ordered list of checks. ``ok`` is true iff nothing failed."""

    subject: str = ""
    checks: List[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def add(self, name: str, passed: Optional[bool], witness=None) -> Check:
        status = NA if passed is None else (PASS if passed else FAIL)
        c = Check(name, status, witness)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.witness))

    @property
    def ok(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def status(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.status
        raise KeyError(name)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"subject": self.subject, "ok": self.ok, "checks": [c.to_json() for c in self.checks]}
