"""Diagnostics and workspace validation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from flexitex.service import LanguageService

SEVERITIES = ("error", "warning", "info")

CODES = {
    # parser
    "unclosed-group",
    "stray-delimiter",
    "env-mismatch",
    # handlers
    "missing-file",
    "unknown-module-id",
    "redundant-import",
    "import-cycle",
    "missing-module-id",
    "symdef-outside-module",
    "symdef-missing-name",
    # build
    "build-output",
    "build-failure",
}


@dataclass(frozen=True, order=True)
class SourceSpan:
    start: int
    end: int
    file: str = ""

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad span {self.start}..{self.end}")

    def contains(self, other: "SourceSpan") -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: SourceSpan
    code: str

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise ValueError(f"unknown severity {self.severity!r}")
        if not self.message:
            raise ValueError("diagnostic message must not be empty")
        if self.code not in CODES:
            raise ValueError(f"unregistered diagnostic code {self.code!r}")

    def sort_key(self):
        return (self.span.file, self.span.start, self.span.end, self.code, self.message)

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "span": {"start": self.span.start, "end": self.span.end},
            "file": self.span.file,
        }


def line_col(text: str, offset: int) -> tuple[int, int]:
    """1-based line and column of ``offset``."""
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def validate(service: "LanguageService", file: str) -> list[Diagnostic]:
    """All diagnostics for ``file``: parser, environments and handler checks."""
    doc = service.document(file)
    found = list(doc.diagnostics)
    ctx = service.context(file)
    for node in doc.root.walk():
        for tag in sorted(node.tags):
            handler = service.registry.handler_for_tag(tag)
            handler.validate(tag, node, ctx)
    found.extend(ctx.diagnostics)
    unique = {(d.sort_key(), d.severity): d for d in found}
    return sorted(unique.values(), key=Diagnostic.sort_key)
