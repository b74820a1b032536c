"""Turn a tagged document into an index tree.

Handlers only decide whether the node they own gets an index node of its
own.  Accepted nodes hang under the nearest accepted ancestor as
``rdf:_1, rdf:_2, ...`` so the index keeps the document order without
mirroring every AST level.  Nodes that are not indexed can still push
properties and links onto any accepted ancestor on their stack.
"""

from __future__ import annotations

import hashlib
from typing import TYPE_CHECKING

from flexitex.index.store import IRI, Literal, Store, Triple, ide, rdf, seq
from flexitex.syntax import Document, Node

if TYPE_CHECKING:
    from flexitex.registry import Registry


class IndexingError(Exception):
    pass


def node_iri(file_key: str, start: int, n: int = 0) -> IRI:
    suffix = f"{start}" if n == 0 else f"{start}.{n}"
    return IRI(f"urn:flexitex:node:{file_key}:{suffix}")


def file_key(file: str, content_hash: str) -> str:
    return hashlib.sha256(f"{file}\0{content_hash}".encode("utf-8", "surrogatepass")).hexdigest()[:16]


class PropertiesAcceptor:
    """Collects what handlers want to record about one AST node."""

    def __init__(self, builder: "_Builder", node: Node | None, stack: list["PropertiesAcceptor"]):
        self._builder = builder
        self._node = node
        self._stack = stack
        self.iri: IRI | None = None
        self.indexed = False
        self.children = 0
        self.triples: list[Triple] = []

    def _subject(self) -> IRI:
        if self.iri is None:
            self.iri = self._builder.mint(self._node)
        return self.iri

    def add_integer_property(self, prop: IRI, value: int) -> None:
        self.triples.append((self._subject(), prop, Literal(int(value))))

    def add_string_property(self, prop: IRI, value: str) -> None:
        self.triples.append((self._subject(), prop, Literal(str(value))))

    def add_resource_property(self, prop: IRI, uri: IRI | str) -> None:
        self.triples.append((self._subject(), prop, uri if isinstance(uri, IRI) else IRI(uri)))

    def add_link_property(self, prop: IRI, other: "PropertiesAcceptor") -> None:
        self._builder.links.append((self, prop, other))

    def get_stack(self) -> list["PropertiesAcceptor"]:
        return list(self._stack)

    def get_ast_node(self) -> Node | None:
        return self._node

    @property
    def ast_node(self) -> Node | None:
        return self._node

    def find(self, tag: str) -> "PropertiesAcceptor | None":
        """Nearest accepted ancestor whose AST node carries ``tag``."""
        for acc in reversed(self._stack):
            if acc._node is not None and tag in acc._node.tags:
                return acc
        return None

    @property
    def file(self) -> str:
        return self._builder.file

    @property
    def document(self) -> Document:
        return self._builder.doc

    @property
    def root(self) -> "PropertiesAcceptor":
        return self._stack[0] if self._stack else self


class _Builder:
    def __init__(self, doc: Document, file: str):
        self.doc = doc
        self.file = file
        self.key = file_key(file, doc.content_hash)
        self.used: dict[int, int] = {}
        self.links: list[tuple[PropertiesAcceptor, IRI, PropertiesAcceptor]] = []

    def mint(self, node: Node | None) -> IRI:
        if node is None:
            return IRI(f"urn:flexitex:node:{self.key}:root")
        n = self.used.get(node.span.start, 0)
        self.used[node.span.start] = n + 1
        return node_iri(self.key, node.span.start, n)


def build_index(store: Store, file: str, doc: Document, registry: "Registry") -> IRI:
    """(Re)index ``file`` from its tagged document and return the root IRI."""
    builder = _Builder(doc, file)
    root = PropertiesAcceptor(builder, None, [])
    root.indexed = True
    root.add_resource_property(rdf("type"), rdf("Seq"))
    root.add_resource_property(rdf("type"), ide("Document"))
    root.add_string_property(ide("file"), file)
    accepted = [root]
    pending: list[PropertiesAcceptor] = []

    # explicit stack of (node, acceptor stack) in logical pre-order
    work: list[tuple[Node, list[PropertiesAcceptor]]] = [
        (c, [root]) for c in reversed(doc.logical_children(doc.root))
    ]
    while work:
        node, stack = work.pop()
        child_stack = stack
        if node.tags:
            acc = PropertiesAcceptor(builder, node, stack)
            wants = False
            for tag in sorted(node.tags):
                handler = registry.handler_for_tag(tag)
                if handler.index(tag, acc):
                    wants = True
            if wants:
                acc.indexed = True
                parent = stack[-1]
                parent.children += 1
                subject = acc._subject()
                parent.triples.append((parent._subject(), seq(parent.children), subject))
                acc.triples.append((subject, rdf("type"), rdf("Seq")))
                acc.add_integer_property(ide("start"), node.span.start)
                acc.add_integer_property(ide("end"), node.span.end)
                acc.add_string_property(ide("sourceFile"), file)
                accepted.append(acc)
                child_stack = stack + [acc]
            else:
                pending.append(acc)
        for child in reversed(doc.logical_children(node)):
            work.append((child, child_stack))

    for acc in pending:
        if acc.triples:
            raise IndexingError(
                f"properties added to a node that was not indexed (offset {acc.ast_node.span.start})"
            )
    triples: list[Triple] = []
    for acc in accepted:
        triples.extend(acc.triples)
    for src, prop, dst in builder.links:
        if not src.indexed or not dst.indexed:
            raise IndexingError(
                f"link {prop.value} between nodes that were not both indexed"
            )
        triples.append((src._subject(), prop, dst._subject()))
    store.replace_file(file, root._subject(), triples, doc.content_hash)
    return root._subject()
