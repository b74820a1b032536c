"""Read-side helpers over the index: modules, imports, symbols, definitions.

Everything here goes through ``LanguageService.get_index`` so callers
always see the current file contents, and only follows semantic links
(``IDE:hasModule``, ``IDE:hasImport``, ``IDE:hasSymbol``,
``IDE:hasDefinition``, ``oo:partOf``), never the ``rdf:_n`` tree shape.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

from flexitex.index.store import IRI, Var, ide, oo, rdf

if TYPE_CHECKING:
    from flexitex.service import LanguageService


@dataclass(frozen=True)
class ModuleRecord:
    iri: IRI
    file: str
    id: str | None
    start: int
    end: int


@dataclass(frozen=True)
class ImportRecord:
    iri: IRI
    file: str  # importing file
    target: str | None  # resolved workspace-relative path
    module_id: str | None
    start: int
    end: int


@dataclass(frozen=True)
class SymbolRecord:
    iri: IRI
    file: str
    name: str
    arity: int
    start: int


@dataclass(frozen=True)
class DefinitionRecord:
    iri: IRI
    file: str
    names: tuple[str, ...]
    title: str | None
    text: str
    start: int
    end: int
    module: IRI | None


def _str(store, s, p):
    v = store.value(s, p)
    return None if v is None else str(v.value)


def _int(store, s, p, default=0):
    v = store.value(s, p)
    return default if v is None else int(v.value)


def modules(service: "LanguageService", file: str) -> list[ModuleRecord]:
    if not service.workspace.exists(file):
        return []
    root = service.get_index(file)
    return service.memo("modules", root, lambda: _modules(service, root, file))


def _modules(service, root, file):
    store = service.store
    out = []
    for b in store.query([(root, ide("hasModule"), Var("m")), (Var("m"), rdf("type"), oo("Theory"))]):
        m = b["m"]
        out.append(
            ModuleRecord(
                m,
                file,
                _str(store, m, rdf("id")),
                _int(store, m, ide("start")),
                _int(store, m, ide("extentEnd"), _int(store, m, ide("end"))),
            )
        )
    return sorted(out, key=lambda r: r.start)


def module_ids(service: "LanguageService", file: str) -> list[str]:
    """Ids of the modules defined in ``file`` (the module-id query)."""
    if not service.workspace.exists(file):
        return []
    root = service.get_index(file)
    rows = service.store.query(
        [
            (root, ide("hasModule"), Var("y")),
            (Var("y"), rdf("type"), oo("Theory")),
            (Var("y"), rdf("id"), Var("moduleId")),
        ]
    )
    return sorted({str(b["moduleId"].value) for b in rows})


def scope_of(service: "LanguageService", file: str, offset: int) -> IRI:
    """Innermost module containing ``offset``, or the document root."""
    best = None
    for m in modules(service, file):
        if m.start <= offset < m.end or (m.start < offset <= m.end):
            if best is None or m.start >= best.start:
                best = m
    return best.iri if best is not None else service.get_index(file)


def scope_at(service: "LanguageService", file: str, start: int) -> IRI:
    for m in modules(service, file):
        if m.start == start:
            return m.iri
    return service.get_index(file)


def imports(service: "LanguageService", scope: IRI) -> list[ImportRecord]:
    return service.memo("imports", scope, lambda: _imports(service, scope))


def _imports(service, scope):
    store = service.store
    out = []
    for b in store.query([(scope, ide("hasImport"), Var("i"))]):
        i = b["i"]
        out.append(
            ImportRecord(
                i,
                _str(store, i, ide("sourceFile")) or "",
                _str(store, i, ide("importFile")),
                _str(store, i, ide("importId")),
                _int(store, i, ide("start")),
                _int(store, i, ide("end")),
            )
        )
    return sorted(out, key=lambda r: r.start)


def targets(service: "LanguageService", imp: ImportRecord) -> list[ModuleRecord]:
    if imp.target is None or imp.module_id is None:
        return []
    if not service.workspace.exists(imp.target):
        return []
    return [m for m in modules(service, imp.target) if m.id == imp.module_id]


def symbols(service: "LanguageService", scope: IRI) -> list[SymbolRecord]:
    return service.memo("symbols", scope, lambda: _symbols(service, scope))


def _symbols(service, scope):
    store = service.store
    out = []
    for b in store.query([(scope, ide("hasSymbol"), Var("s"))]):
        s = b["s"]
        out.append(
            SymbolRecord(
                s,
                _str(store, s, ide("sourceFile")) or "",
                _str(store, s, ide("name")) or "",
                _int(store, s, ide("arity")),
                _int(store, s, ide("start")),
            )
        )
    return sorted(out, key=lambda r: r.start)


def definitions(service: "LanguageService", file: str) -> list[DefinitionRecord]:
    root = service.get_index(file)
    return service.memo("definitions", root, lambda: _definitions(service, root, file))


def _definitions(service, root, file):
    store = service.store
    out = []
    for b in store.query([(root, ide("hasDefinition"), Var("d"))]):
        d = b["d"]
        out.append(
            DefinitionRecord(
                d,
                file,
                tuple(str(o.value) for o in store.objects(d, ide("for"))),
                _str(store, d, ide("title")),
                _str(store, d, ide("text")) or "",
                _int(store, d, ide("start")),
                _int(store, d, ide("extentEnd"), _int(store, d, ide("end"))),
                store.value(d, oo("partOf")),
            )
        )
    return sorted(out, key=lambda r: r.start)


def import_edges(service: "LanguageService", scope: IRI) -> list[tuple[ImportRecord, list[ModuleRecord]]]:
    return [(imp, targets(service, imp)) for imp in imports(service, scope)]


def reachable(
    service: "LanguageService",
    start: list[IRI],
    override: dict[IRI, list[IRI]] | None = None,
) -> dict[IRI, int]:
    """Modules reachable from ``start`` (inclusive) with their import distance.

    ``override`` replaces the outgoing edges of selected modules, which is
    how "what if this import were removed" is answered.
    """
    override = override or {}
    dist: dict[IRI, int] = {}
    queue = deque()
    for s in start:
        if s not in dist:
            dist[s] = 1
            queue.append(s)
    while queue:
        m = queue.popleft()
        if m in override:
            nxt = override[m]
        else:
            nxt = [t.iri for _, ts in import_edges(service, m) for t in ts]
        for t in nxt:
            if t not in dist:
                dist[t] = dist[m] + 1
                queue.append(t)
    return dist


def symbols_in_scope(
    service: "LanguageService", file: str, offset: int
) -> list[tuple[SymbolRecord, int]]:
    """Symbols usable at ``offset``: own ones defined earlier plus imported ones.

    Imports count only when they appear before ``offset``; everything the
    imported modules pull in transitively is visible in full.
    """
    scope = scope_of(service, file, offset)
    found: list[tuple[SymbolRecord, int]] = [
        (s, 0) for s in symbols(service, scope) if s.start < offset
    ]
    direct = [t.iri for imp, ts in import_edges(service, scope) if imp.start < offset for t in ts]
    for module, d in sorted(reachable(service, direct).items(), key=lambda kv: kv[1]):
        if module == scope:
            continue
        found.extend((s, d) for s in symbols(service, module))
    return found

