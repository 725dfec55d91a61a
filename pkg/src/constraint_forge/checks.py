"""Check results shared by every verification routine."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass

STATUSES = ("pass", "fail", "info")


@dataclass(frozen=True)
class CheckReport:
    name: str
    status: str
    residual: str | None = None
    elapsed_ms: float = 0.0
    citation: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return asdict(self)


@contextmanager
def stopwatch():
    """Yields a one-element list that receives the elapsed milliseconds."""
    box = [0.0]
    start = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = round((time.perf_counter() - start) * 1000.0, 3)


def from_residuals(name: str, residuals: dict, citation: str, elapsed_ms: float = 0.0) -> CheckReport:
    """Pass iff every residual is zero; otherwise list the nonzero ones."""
    bad = {k: v for k, v in residuals.items() if not v.is_zero()}
    if not bad:
        return CheckReport(name, "pass", None, elapsed_ms, citation)
    text = "; ".join(f"{k} = {v}" for k, v in bad.items())
    return CheckReport(name, "fail", text, elapsed_ms, citation)
