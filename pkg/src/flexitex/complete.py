"""Context-sensitive completion.

The leaf at the cursor decides what is offered: its tags are handed to the
handlers owning them, and plain text falls back to the semantic macros in
scope plus environment snippets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from flexitex import semantics
from flexitex.index.store import ide
from flexitex.service import HandlerContext
from flexitex.syntax import COMMAND, MATH, OPTION, WORD, Node

if TYPE_CHECKING:
    from flexitex.service import LanguageService

KINDS = ("file", "module-id", "macro", "snippet")

_PREFIX = re.compile(r"\\?[^\s{}\[\]$%/,=\\]*$")


@dataclass(frozen=True)
class CompletionItem:
    label: str
    kind: str
    detail: str | None = None
    source: str = ""

    def to_dict(self) -> dict:
        d = {"label": self.label, "kind": self.kind}
        if self.detail is not None:
            d["detail"] = self.detail
        return d


class CompletionAcceptor:
    def __init__(self, source: str = ""):
        self.source = source
        self.items: list[CompletionItem] = []

    def accept(self, label: str, kind: str, detail: str | None = None) -> None:
        if not label:
            return
        if kind not in KINDS:
            raise ValueError(f"unknown completion kind {kind!r}")
        self.items.append(CompletionItem(label, kind, detail, self.source))


class CompletionContext(HandlerContext):
    def __init__(self, service: "LanguageService", file: str, offset: int, node: Node, text_before: str):
        super().__init__(service, file)
        self.offset = offset
        self.node = node
        # text of the leaf (or option) up to the cursor
        self.text_before = text_before


def locate(doc, offset: int) -> tuple[Node, str]:
    """The node completion happens in and the part of it before the cursor."""
    src = doc.source
    for leaf in doc.root.walk():
        if leaf.kind in (WORD, MATH) and leaf.span.start < offset <= leaf.span.end:
            return leaf, src[leaf.span.start : offset]
        if leaf.kind == COMMAND and leaf.span.start < offset <= leaf.head_end:
            return leaf, src[leaf.span.start : offset]
    node = doc.root
    while True:
        inner = None
        for c in node.children:
            inside = c.span.start < offset < c.span.end
            if c.span.end == offset and c.span.start < offset and _open_at_end(c):
                inside = True
            if inside:
                inner = c
                break
        if inner is None:
            break
        node = inner
    if node.kind == OPTION and node.model is not None:
        return node, src[node.model.span.start : offset]
    return node, ""


def _open_at_end(node: Node) -> bool:
    """True when ``node`` ends in a group that was never closed."""
    if node.kind == OPTION:
        return not node.closed
    if node.kind == COMMAND and node.children:
        return _open_at_end(node.children[-1])
    return False


def default_prefix(text_before: str) -> str:
    m = _PREFIX.search(text_before)
    return m.group(0) if m else ""


def complete_at(
    service: "LanguageService", file: str, offset: int, prefix: str | None = None
) -> list[CompletionItem]:
    doc = service.document(file)
    if not 0 <= offset <= len(doc.source):
        raise ValueError(f"offset {offset} outside {file} (length {len(doc.source)})")
    node, before = locate(doc, offset)
    ctx = CompletionContext(service, file, offset, node, before)
    handled_command = node.kind == COMMAND and bool(node.tags)
    if prefix is None:
        prefix = "" if handled_command else default_prefix(before)
    items: list[CompletionItem] = []
    if node.tags:
        for tag in sorted(node.tags):
            handler = service.registry.handler_for_tag(tag)
            acc = CompletionAcceptor(handler.id)
            handler.autocomplete_tag(tag, node, prefix, acc, ctx)
            items.extend(acc.items)
    else:
        acc = CompletionAcceptor("")
        suggest_macros(ctx, acc)
        for env in service.registry.environments():
            acc.accept(f"\\begin{{{env}}}", "snippet")
        items.extend(acc.items)
    unique: dict[tuple[str, str], CompletionItem] = {}
    for item in items:
        if item.label.startswith(prefix):
            unique.setdefault((item.label, item.kind), item)
    return sorted(unique.values(), key=lambda i: (i.kind, i.label))


def suggest_macros(ctx: CompletionContext, acc: CompletionAcceptor, backslash: bool = True) -> None:
    """Offer the semantic macros visible at the cursor, with definition text."""
    service = ctx.service
    in_scope = semantics.symbols_in_scope(service, ctx.file, ctx.offset)
    if not in_scope:
        return
    hover = definition_texts(ctx, in_scope)
    for sym, _ in in_scope:
        label = f"\\{sym.name}" if backslash else sym.name
        acc.accept(label, "macro", hover.get(sym.name))


def definition_texts(ctx: CompletionContext, in_scope) -> dict[str, str]:
    """Definition text per symbol name; nearer modules win, then file order."""
    service = ctx.service
    scope = semantics.scope_of(service, ctx.file, ctx.offset)
    modules = {scope: 0}
    direct = [
        t.iri
        for imp, ts in semantics.import_edges(service, scope)
        if imp.start < ctx.offset
        for t in ts
    ]
    for m, d in semantics.reachable(service, direct).items():
        modules.setdefault(m, d)
    wanted = {sym.name for sym, _ in in_scope}
    best: dict[str, tuple] = {}
    files = {ctx.file}
    for m in modules:
        src = service.store.value(m, ide("sourceFile"))
        if src is not None:
            files.add(str(src.value))
    for f in sorted(files):
        for d in semantics.definitions(service, f):
            if d.module not in modules and not (d.module is None and f == ctx.file):
                continue
            dist = modules.get(d.module, 0)
            for name in d.names:
                if name in wanted:
                    key = (dist, d.file, d.start)
                    if name not in best or key < best[name][0]:
                        best[name] = (key, d.text)
    return {name: text for name, (_, text) in best.items()}

