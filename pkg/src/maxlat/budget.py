"""Work-budget guards.

Counting and multiplier kernels scale like d * n * vmax elementary operations
(times the profile width for joint tables).  Rather than hanging on an
accidentally huge request, every expensive entry point estimates its cost up
front and refuses above a configurable cap.
"""

from __future__ import annotations

DEFAULT_WORK_CAP = 2**33
DEFAULT_ENUM_CAP = 10**8


class WorkBudgetError(RuntimeError):
    """Raised when an operation's estimated cost exceeds its cap."""

    def __init__(self, estimated: int, cap: int, what: str = "operation"):
        self.estimated = estimated
        self.cap = cap
        super().__init__(
            f"{what} needs ~{estimated} elementary operations, cap is {cap}"
        )


class EnumerationCapError(WorkBudgetError):
    """Raised when a brute-force enumeration box exceeds the point cap."""


def check_work(estimated: int, cap: int | None, what: str = "operation") -> None:
    if cap is None:
        cap = DEFAULT_WORK_CAP
    if estimated > cap:
        raise WorkBudgetError(estimated, cap, what)


def check_enum(box_points: int, cap: int | None, what: str = "enumeration") -> None:
    if cap is None:
        cap = DEFAULT_ENUM_CAP
    if box_points > cap:
        raise EnumerationCapError(box_points, cap, what)
