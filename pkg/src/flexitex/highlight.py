"""Semantic highlighting: tags decide color categories."""

from __future__ import annotations

from dataclasses import dataclass

from flexitex.diagnostics import SourceSpan
from flexitex.handlers.base import COMMAND_DESC, COMMAND_URI
from flexitex.registry import Registry, RegistryError
from flexitex.syntax import COMMAND, MATH, WORD, Document, Node


class HighlightError(RegistryError):
    pass


@dataclass(frozen=True)
class HighlightSpan:
    span: SourceSpan
    category: str
    description: str
    handler: str = ""

    def to_dict(self) -> dict:
        return {
            "start": self.span.start,
            "end": self.span.end,
            "category": self.category,
            "description": self.description,
        }


def _category(node: Node, registry: Registry) -> tuple[str, str, str] | None:
    for tag in sorted(node.tags):
        handler = registry.handler_for_tag(tag)
        uri = handler.syntax_color_uri(tag)
        if uri is None:
            continue
        if uri not in handler.highlighting:
            raise HighlightError(
                f"handler {handler.id!r} returned undeclared category {uri!r} for tag {tag!r}"
            )
        return uri, handler.highlighting[uri], handler.id
    return None


def highlight(doc: Document, registry: Registry) -> list[HighlightSpan]:
    """Colored spans for the leaves and command names of a tagged document.

    Only a node's own tags count.  Handlers that want a whole option
    colored tag it with ``tag_tree``, so the deepest tagged node decides.
    Command names without a category get the generic command color.
    """
    out: list[HighlightSpan] = []
    for node in doc.root.walk():
        if node.kind not in (COMMAND, WORD, MATH):
            continue
        cat = _category(node, registry) if node.tags else None
        if node.kind == COMMAND:
            cat = cat or (COMMAND_URI, COMMAND_DESC, "")
            out.append(HighlightSpan(SourceSpan(node.span.start, node.head_end, doc.file), *cat))
        elif cat is not None:
            out.append(HighlightSpan(SourceSpan(node.span.start, node.span.end, doc.file), *cat))
    out.sort(key=lambda h: h.span.start)
    return out


# ANSI colors per category for terminal rendering
_ANSI = {
    "command": "\x1b[1;34m",
    "externalRef": "\x1b[4;32m",
    "declaration": "\x1b[1;35m",
    "definiendum": "\x1b[1;33m",
}
_RESET = "\x1b[0m"


def render_ansi(source: str, spans: list[HighlightSpan]) -> str:
    parts = []
    pos = 0
    for h in spans:
        parts.append(source[pos : h.span.start])
        color = _ANSI.get(h.category.rsplit(".", 1)[-1], "\x1b[36m")
        parts.append(f"{color}{source[h.span.start : h.span.end]}{_RESET}")
        pos = h.span.end
    parts.append(source[pos:])
    return "".join(parts)
