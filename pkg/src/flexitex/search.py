"""Keyword search over the indexed definitions of a workspace."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from flexitex import semantics
from flexitex.diagnostics import SourceSpan

if TYPE_CHECKING:
    from flexitex.service import LanguageService

SNIPPET_WIDTH = 80


@dataclass(frozen=True)
class SearchHit:
    file: str
    span: SourceSpan
    definiendum: str
    title: str | None
    snippet: str
    score: int

    def to_dict(self) -> dict:
        return {
            "file": self.file,
            "span": {"start": self.span.start, "end": self.span.end},
            "definiendum": self.definiendum,
            "title": self.title,
            "snippet": self.snippet,
            "score": self.score,
        }


def _pattern(keyword: str) -> re.Pattern:
    return re.compile(rf"(?<!\w){re.escape(keyword)}(?!\w)", re.IGNORECASE)


def _snippet(text: str, pattern: re.Pattern) -> str:
    m = pattern.search(text)
    if m is None or len(text) <= SNIPPET_WIDTH:
        return text[:SNIPPET_WIDTH]
    start = max(0, min(m.start() - SNIPPET_WIDTH // 4, len(text) - SNIPPET_WIDTH))
    return text[start : start + SNIPPET_WIDTH]


def search_definitions(service: "LanguageService", keywords: list[str]) -> list[SearchHit]:
    """Definitions mentioning every keyword, best first.

    A keyword matches a whole word of the definition text or of a
    definiendum name, ignoring case.  The score counts all occurrences.
    """
    keywords = [k for k in keywords if k.strip()]
    if not keywords:
        raise ValueError("search needs at least one keyword")
    patterns = [_pattern(k.strip()) for k in keywords]
    hits = []
    for file in service.index_all():
        for d in semantics.definitions(service, file):
            haystacks = [d.text, *d.names]
            counts = [sum(len(p.findall(h)) for h in haystacks) for p in patterns]
            if not all(counts):
                continue
            hits.append(
                SearchHit(
                    file,
                    SourceSpan(d.start, d.end, file),
                    ",".join(d.names),
                    d.title,
                    _snippet(d.text, patterns[0]),
                    sum(counts),
                )
            )
    hits.sort(key=lambda h: (-h.score, h.file, h.span.start))
    return hits
