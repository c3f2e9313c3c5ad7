"""Diagnostics with source spans and stakeholder routing.

Validation never throws: problems surface as diagnostics that name the
role (and, where known, the stakeholder) to query for the fix.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .model import Role


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int  # 1-based
    column: int  # 1-based
    length: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError("invalid source span")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    span: Optional[SourceSpan] = None
    responsible_role: Optional[Role] = None
    field: Optional[str] = None
    stakeholder: Optional[str] = None

    def render(self) -> str:
        where = f"{self.span}: " if self.span else ""
        who = ""
        if self.responsible_role:
            name = f" {self.stakeholder}" if self.stakeholder else ""
            who = f" [ask {self.responsible_role.value}{name}]"
        return f"{where}{self.severity.value}[{self.code}]: {self.message}{who}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
