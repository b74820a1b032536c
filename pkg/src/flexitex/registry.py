"""Extension handlers, the registry that catalogs them, and the tagger."""

from __future__ import annotations

import copy
import dataclasses
from typing import TYPE_CHECKING, Iterable

from flexitex.syntax import COMMAND, Document, Node, environment_name

if TYPE_CHECKING:
    from flexitex.index.builder import PropertiesAcceptor
    from flexitex.service import HandlerContext


class RegistryError(Exception):
    pass


class UnknownTagError(RegistryError, KeyError):
    def __str__(self):
        return f"no handler owns tag {self.args[0]!r}"


class UndeclaredTagError(RegistryError):
    pass


class Extension:
    """Base class for handlers.

    Subclasses set the class attributes and override the callbacks they
    need; the defaults do nothing.  ``command_names`` may also name
    environments: ``\\begin{name}`` is dispatched to the handler owning
    ``name``.
    """

    id: str = ""
    command_names: tuple[str, ...] = ()
    environments: tuple[str, ...] = ()
    tags: tuple[str, ...] = ()
    highlighting: dict[str, str] = {}

    def add_node_tags(self, cmd: Node, tagger: "Tagger") -> None:
        pass

    def syntax_color_uri(self, tag: str) -> str | None:
        return None

    def index(self, tag: str, acceptor: "PropertiesAcceptor") -> bool:
        return False

    def validate(self, tag: str, node: Node, ctx: "HandlerContext") -> None:
        pass

    def autocomplete_tag(self, tag, leaf, prefix, acceptor, ctx) -> None:
        pass

    def refactor(self, tag: str, node: Node, dialogs=None) -> str:
        return "unsupported"

    def __repr__(self):
        return f"<{type(self).__name__} {self.id}>"


class Registry:
    def __init__(self, handlers: Iterable[Extension] = ()):
        self.handlers: list[Extension] = []
        self.by_command: dict[str, Extension] = {}
        self.by_tag: dict[str, Extension] = {}
        for handler in handlers:
            self.register(handler)

    def register(self, handler: Extension) -> "Registry":
        if not handler.id:
            raise RegistryError("handler without id")
        if any(h.id == handler.id for h in self.handlers):
            raise RegistryError(f"handler id {handler.id!r} registered twice")
        for tag in handler.tags:
            if not tag:
                raise RegistryError(f"{handler.id}: empty tag")
            owner = self.by_tag.get(tag)
            if owner is not None:
                raise RegistryError(
                    f"tag {tag!r} claimed by {handler.id!r} is already owned by {owner.id!r}"
                )
        for name in handler.command_names:
            owner = self.by_command.get(name)
            if owner is not None:
                raise RegistryError(
                    f"command {name!r} claimed by {handler.id!r} is already handled by {owner.id!r}"
                )
        if len(set(handler.tags)) != len(handler.tags):
            raise RegistryError(f"{handler.id}: duplicate tags")
        self.handlers.append(handler)
        for tag in handler.tags:
            self.by_tag[tag] = handler
        for name in handler.command_names:
            self.by_command[name] = handler
        return self

    def without(self, handler_id: str) -> "Registry":
        return Registry(h for h in self.handlers if h.id != handler_id)

    def handler_for_tag(self, tag: str) -> Extension:
        try:
            return self.by_tag[tag]
        except KeyError:
            raise UnknownTagError(tag) from None

    def handler_for_command(self, cmd: Node) -> Extension | None:
        if cmd.kind != COMMAND:
            return None
        if cmd.name == "begin":
            env = environment_name(cmd)
            return self.by_command.get(env) if env else None
        return self.by_command.get(cmd.name)

    def environments(self) -> list[str]:
        return sorted({e for h in self.handlers for e in h.environments})

    def category_description(self, uri: str) -> str:
        for h in self.handlers:
            if uri in h.highlighting:
                return h.highlighting[uri]
        return uri.rsplit(".", 1)[-1]


class Tagger:
    """Handed to ``add_node_tags``; enforces that handlers use their own tags."""

    def __init__(self, doc: Document, handler: Extension):
        self.doc = doc
        self.handler = handler

    def _check(self, tag: str) -> None:
        if tag not in self.handler.tags:
            raise UndeclaredTagError(
                f"handler {self.handler.id!r} attached undeclared tag {tag!r}"
            )

    def tag(self, node: Node, tag: str) -> None:
        self._check(tag)
        node.tags.add(tag)

    def tag_tree(self, node: Node, tag: str) -> None:
        self._check(tag)
        for n in node.walk():
            n.tags.add(tag)

    def body(self, begin: Node) -> list[Node]:
        return self.doc.body(begin)


def tag_document(registry: Registry, doc: Document) -> Document:
    """Return a copy of ``doc`` with handler tags attached.

    Existing tags are discarded first, so tagging twice gives the same result.
    """
    tagged = copy.copy(doc)
    memo: dict = {}
    tagged.root = _copy_tree(doc.root, memo)
    tagged.env_pairs = [
        type(p)(p.name, memo[id(p.begin)], None if p.end is None else memo[id(p.end)])
        for p in doc.env_pairs
    ]
    tagged._bodies = {id(memo[k]): [memo[id(n)] for n in v] for k, v in _rekey(doc._bodies, memo)}
    tagged._parents = {id(memo[k]): memo[id(v)] for k, v in _rekey(doc._parents, memo)}
    for node in tagged.root.walk():
        node.tags = set()
    for node in tagged.root.walk():
        handler = registry.handler_for_command(node)
        if handler is not None:
            handler.add_node_tags(node, Tagger(tagged, handler))
            for n in (node, *node.walk(), *tagged.body(node)):
                stray = n.tags - set(registry.by_tag)
                if stray:
                    raise UndeclaredTagError(
                        f"handler {handler.id!r} attached undeclared tag {sorted(stray)[0]!r}"
                    )
    return tagged


def _rekey(mapping: dict, memo: dict):
    # mapping is keyed by id() of original nodes; memo maps id(original) -> copy
    return ((k, v) for k, v in mapping.items() if k in memo)


def _copy_tree(root: Node, memo: dict) -> Node:
    new_root = copy.copy(root)
    memo[id(root)] = new_root
    stack = [(root, new_root)]
    while stack:
        old, new = stack.pop()
        new.tags = set(old.tags)
        new.children = []
        for child in old.children:
            c = copy.copy(child)
            c.parent = new
            memo[id(child)] = c
            new.children.append(c)
            stack.append((child, c))
    new_root.parent = None
    for node in new_root.walk():
        if node.keyvals:
            node.keyvals = {
                k: dataclasses.replace(kv, nodes=[memo[id(n)] for n in kv.nodes])
                for k, kv in node.keyvals.items()
            }
    return new_root
