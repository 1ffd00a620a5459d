"""Verification records and their serializations."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional


@dataclass
class CheckRecord:
    """Outcome of one check on one catalog entry.

    ``status`` is ``"pass"``, ``"fail"`` or ``"skip"``.  ``residual_witness`` holds
    a nonvanishing residual (or a description of it) when a check fails.
    """

    id: str
    check: str
    status: str
    scale: Optional[str] = None
    residual_witness: Optional[str] = None
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_json(self) -> str:
        d = {"id": self.id, "check": self.check, "status": self.status, "scale": self.scale}
        if self.residual_witness is not None:
            d["residual_witness"] = self.residual_witness
        if self.seed is not None:
            d["seed"] = self.seed
        if self.details:
            d["details"] = self.details
        return json.dumps(d, sort_keys=False, default=str)

    def to_text(self) -> str:
        mark = {"pass": "PASS", "fail": "FAIL", "skip": "SKIP"}[self.status]
        line = f"[{mark}] {self.id:<14} {self.check}"
        if self.scale not in (None, "1"):
            line += f"  scale={self.scale}"
        if self.details.get("summary"):
            line += f"  {self.details['summary']}"
        if self.details.get("fired"):
            line += f"  relations={','.join(self.details['fired'])}"
        if self.residual_witness is not None and self.status == "fail":
            w = self.residual_witness
            line += f"\n        witness: {w if len(w) < 300 else w[:297] + '...'}"
        return line


def record(id: str, check: str, ok: bool, **kw) -> CheckRecord:
    return CheckRecord(id=id, check=check, status="pass" if ok else "fail", **kw)


def all_passed(records: Iterable[CheckRecord]) -> bool:
    return all(r.passed for r in records)


def emit(records: Iterable[CheckRecord], fmt: str = "text") -> List[str]:
    if fmt == "json-lines":
        return [r.to_json() for r in records]
    return [r.to_text() for r in records]


def asdict_record(r: CheckRecord) -> dict:
    return asdict(r)
