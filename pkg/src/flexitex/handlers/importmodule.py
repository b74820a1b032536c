"""``\\importmodule[path]{id}``: the three-tag handler.

The command itself owns the index node; the path and id options only add
properties to it.  Without a path the id refers to a module of the same
file.
"""

from __future__ import annotations

import posixpath

import networkx as nx

from flexitex import semantics
from flexitex.handlers.base import (
    COMMAND_DESC,
    COMMAND_URI,
    EXTERNAL_REF_DESC,
    EXTERNAL_REF_URI,
    MODULE_TAG,
    option_text,
)
from flexitex.index.store import ide, rdf
from flexitex.registry import Extension
from flexitex.syntax import BRACE, BRACKET, COMMAND, OPTION, Node
from flexitex.workspace import resolve_import

COMMAND_TAG = "kwarc.info.mkmide.latex.importmodule.commandtag"
FILE_TAG = "kwarc.info.mkmide.latex.importmodule.filetag"
ID_TAG = "kwarc.info.mkmide.latex.importmodule.symboltag"


def file_option(cmd: Node) -> Node | None:
    """The path option; only a bracket in first position counts."""
    opts = cmd.options
    return opts[0] if opts and opts[0].delimiter == BRACKET else None


def id_option(cmd: Node) -> Node | None:
    return cmd.option(BRACE)


def import_target(cmd: Node, file: str) -> str:
    path = option_text(file_option(cmd))
    return resolve_import(file, path) if path else file


def _command_of(node: Node) -> Node | None:
    cur = node
    while cur is not None:
        if cur.kind == COMMAND and COMMAND_TAG in cur.tags:
            return cur
        cur = cur.parent
    return None


class ImportModuleHandler(Extension):
    id = "stex.importmodule"
    command_names = ("importmodule",)
    tags = (COMMAND_TAG, FILE_TAG, ID_TAG)
    highlighting = {COMMAND_URI: COMMAND_DESC, EXTERNAL_REF_URI: EXTERNAL_REF_DESC}

    def add_node_tags(self, cmd, tagger):
        tagger.tag(cmd, COMMAND_TAG)
        path = file_option(cmd)
        if path is not None:
            tagger.tag_tree(path, FILE_TAG)
        mid = id_option(cmd)
        if mid is not None:
            tagger.tag_tree(mid, ID_TAG)

    def syntax_color_uri(self, tag):
        if tag in (FILE_TAG, ID_TAG):
            return EXTERNAL_REF_URI
        if tag == COMMAND_TAG:
            return COMMAND_URI
        return None

    # ---------------------------------------------------------------- index

    def index(self, tag, acceptor):
        node = acceptor.ast_node
        if tag == COMMAND_TAG:
            acceptor.add_resource_property(rdf("type"), ide("importModuleCommand"))
            scope = acceptor.find(MODULE_TAG) or acceptor.root
            scope.add_link_property(ide("hasImport"), acceptor)
            if file_option(node) is None:
                acceptor.add_string_property(ide("importFile"), acceptor.file)
            return True
        # path and id only decorate the responsible command node
        if node.kind != OPTION:
            return False
        owner = acceptor.find(COMMAND_TAG)
        if owner is None:
            return False
        text = option_text(node)
        if tag == FILE_TAG and text:
            owner.add_string_property(ide("importPath"), text)
            owner.add_string_property(ide("importFile"), resolve_import(acceptor.file, text))
        elif tag == ID_TAG and text:
            owner.add_string_property(ide("importId"), text)
        return False

    # ------------------------------------------------------------- validate

    def validate(self, tag, node, ctx):
        if tag == FILE_TAG and node.kind == OPTION:
            path = option_text(node)
            if path and not ctx.workspace.exists(ctx.resolve(path)):
                ctx.error("missing-file", f"file does not exist: {ctx.resolve(path)}", node)
        elif tag == ID_TAG and node.kind == OPTION:
            cmd = node.parent
            target = import_target(cmd, ctx.file)
            mid = option_text(node)
            if mid and ctx.workspace.exists(target):
                if mid not in semantics.module_ids(ctx.service, target):
                    ctx.error("unknown-module-id", f"no module '{mid}' in {target}", node)
        elif tag == COMMAND_TAG:
            self._check_graph(node, ctx)

    def _check_graph(self, cmd, ctx):
        service = ctx.service
        scope = semantics.scope_of(service, ctx.file, cmd.span.start)
        edges = semantics.import_edges(service, scope)
        mine = [ts for imp, ts in edges if imp.start == cmd.span.start]
        if not mine or not mine[0]:
            return
        own = [t.iri for t in mine[0]]
        others = [t.iri for imp, ts in edges if imp.start != cmd.span.start for t in ts]
        closure = semantics.reachable(service, others, override={scope: others})
        if all(t in closure for t in own):
            ctx.warning(
                "redundant-import",
                "redundant import: module is already imported through other imports",
                cmd,
            )
        cycle = _cycle_edge(service, scope)
        if cycle is not None and cycle == (ctx.file, cmd.span.start):
            ctx.warning("import-cycle", "import cycle through this module", cmd)

    # ------------------------------------------------------------- complete

    def autocomplete_tag(self, tag, leaf, prefix, acceptor, ctx):
        if tag == COMMAND_TAG and leaf.kind == COMMAND:
            directory = posixpath.dirname(ctx.file)
            for name, is_dir in ctx.workspace.listdir(directory):
                entry = _entry(name, is_dir)
                if entry:
                    acceptor.accept(f"[{entry}]", "file")
        elif tag == FILE_TAG:
            before = ctx.text_before
            head = before.rsplit("/", 1)[0] + "/" if "/" in before else ""
            directory = posixpath.normpath(posixpath.join(posixpath.dirname(ctx.file), head or "."))
            if directory == ".":
                directory = ""
            if directory.startswith(".."):
                return
            for name, is_dir in ctx.workspace.listdir(directory):
                entry = _entry(name, is_dir)
                if entry:
                    acceptor.accept(entry, "file")
        elif tag == ID_TAG:
            cmd = _command_of(leaf)
            if cmd is None:
                return
            target = import_target(cmd, ctx.file)
            if target == ctx.file or not ctx.workspace.exists(target):
                return
            for mid in semantics.module_ids(ctx.service, target):
                acceptor.accept(mid, "module-id")


def _entry(name: str, is_dir: bool) -> str | None:
    if name.startswith("."):
        return None
    if is_dir:
        return name + "/"
    if name.endswith(".tex"):
        return name[: -len(".tex")]
    return None


def _cycle_edge(service, scope) -> tuple[str, int] | None:
    """(file, offset) of the import that represents the cycle through ``scope``.

    Each strongly connected component of the import graph is reported once,
    at its internal import with the smallest (file, offset).
    """
    graph = nx.DiGraph()
    graph.add_node(scope)
    seen = {scope}
    todo = [scope]
    labels: dict[tuple, tuple[str, int]] = {}
    while todo:
        m = todo.pop()
        for imp, targets in semantics.import_edges(service, m):
            for t in targets:
                graph.add_edge(m, t.iri)
                key = (imp.file, imp.start)
                if (m, t.iri) not in labels or key < labels[(m, t.iri)]:
                    labels[(m, t.iri)] = key
                if t.iri not in seen:
                    seen.add(t.iri)
                    todo.append(t.iri)
    component = next(c for c in nx.strongly_connected_components(graph) if scope in c)
    if len(component) == 1 and not graph.has_edge(scope, scope):
        return None
    internal = [labels[(a, b)] for a, b in graph.edges if a in component and b in component]
    return min(internal)
