"""Ties the workspace, registry and index together.

``LanguageService`` is what the CLI and the handlers talk to: it keeps a
cache of tagged documents and rebuilds a file's index only when the file
content changed.
"""

from __future__ import annotations

import logging

from flexitex.diagnostics import Diagnostic, SourceSpan
from flexitex.index.builder import build_index
from flexitex.index.store import IRI, Store
from flexitex.registry import Registry, tag_document
from flexitex.syntax import Document, Node, content_hash, parse
from flexitex.workspace import Workspace

log = logging.getLogger(__name__)


class LanguageService:
    def __init__(self, workspace: Workspace, registry: Registry | None = None, store: Store | None = None):
        if registry is None:
            from flexitex.handlers import default_registry

            registry = default_registry()
        self.workspace = workspace
        self.registry = registry
        self.store = store if store is not None else Store()
        self.rebuilds = 0
        self._docs: dict[str, tuple[str, Document]] = {}
        # answers derived from the store, keyed by node IRIs; node IRIs embed
        # the content hash, and any rebuild clears the whole memo anyway
        self._memo: dict[tuple, object] = {}

    def document(self, file: str) -> Document:
        """Parsed and tagged document for the current content of ``file``."""
        text = self.workspace.read(file)
        digest = content_hash(text)
        cached = self._docs.get(file)
        if cached is not None and cached[0] == digest:
            return cached[1]
        doc = tag_document(self.registry, parse(text, file))
        self._docs[file] = (digest, doc)
        return doc

    def get_index(self, file: str) -> IRI:
        """Root IRI of ``file``'s index, rebuilding it if the content changed."""
        text = self.workspace.read(file)
        digest = content_hash(text)
        if self.store.freshness.get(file) == digest and file in self.store.roots:
            return self.store.roots[file]
        doc = self.document(file)
        self.rebuilds += 1
        self._memo.clear()
        log.debug("indexing %s", file)
        return build_index(self.store, file, doc, self.registry)

    def memo(self, kind: str, key: IRI, compute):
        """Cached ``compute()`` for ``(kind, key)`` until the next rebuild."""
        k = (kind, key)
        if k not in self._memo:
            self._memo[k] = compute()
        return self._memo[k]

    def index_all(self) -> list[str]:
        files = self.workspace.files()
        for f in files:
            self.get_index(f)
        return files

    def context(self, file: str) -> "HandlerContext":
        return HandlerContext(self, file)


class HandlerContext:
    """What handlers see while validating or completing inside one file."""

    def __init__(self, service: LanguageService, file: str):
        self.service = service
        self.file = file
        self.diagnostics: list[Diagnostic] = []

    @property
    def doc(self) -> Document:
        return self.service.document(self.file)

    @property
    def workspace(self) -> Workspace:
        return self.service.workspace

    def report(self, severity: str, code: str, message: str, where: Node | SourceSpan) -> None:
        span = where.span if isinstance(where, Node) else where
        span = SourceSpan(span.start, span.end, self.file)
        self.diagnostics.append(Diagnostic(severity, message, span, code))

    def error(self, code: str, message: str, where) -> None:
        self.report("error", code, message, where)

    def warning(self, code: str, message: str, where) -> None:
        self.report("warning", code, message, where)

    def resolve(self, path: str) -> str:
        return self.workspace.resolve(self.file, path)
