"""``\\begin{definition}[for=...,title=...]``: definitions of symbols."""

from __future__ import annotations

from flexitex.handlers.base import (
    COMMAND_DESC,
    COMMAND_URI,
    DEFINIENDUM_DESC,
    DEFINIENDUM_URI,
    MODULE_TAG,
    flat_text,
)
from flexitex.index.store import ide, oo, rdf
from flexitex.registry import Extension
from flexitex.syntax import BRACKET, Node

DEFINITION_TAG = "stex.definition.begin"
FOR_TAG = "stex.definition.definitionfor"
TEXT_TAG = "stex.definition.definitionText"


def _keyval(cmd: Node, key: str):
    opt = cmd.option(BRACKET)
    return None if opt is None else opt.keyvals.get(key)


def definienda(cmd: Node) -> list[str]:
    """Names listed in ``for=``; ``for={a,b}`` names several symbols."""
    kv = _keyval(cmd, "for")
    if kv is None:
        return []
    text = kv.value.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    return [n.strip().lstrip("\\") for n in text.split(",") if n.strip()]


def definition_title(cmd: Node) -> str | None:
    kv = _keyval(cmd, "title")
    return kv.value if kv is not None and kv.value else None


class DefinitionHandler(Extension):
    id = "stex.definition"
    command_names = ("definition",)
    environments = ("definition",)
    tags = (DEFINITION_TAG, FOR_TAG, TEXT_TAG)
    highlighting = {COMMAND_URI: COMMAND_DESC, DEFINIENDUM_URI: DEFINIENDUM_DESC}

    def add_node_tags(self, cmd, tagger):
        if cmd.name != "begin":
            return
        tagger.tag(cmd, DEFINITION_TAG)
        kv = _keyval(cmd, "for")
        if kv is not None:
            for n in kv.nodes:
                tagger.tag_tree(n, FOR_TAG)
        for n in tagger.body(cmd):
            tagger.tag_tree(n, TEXT_TAG)

    def syntax_color_uri(self, tag):
        return {DEFINITION_TAG: COMMAND_URI, FOR_TAG: DEFINIENDUM_URI}.get(tag)

    def index(self, tag, acceptor):
        if tag != DEFINITION_TAG:
            return False
        cmd = acceptor.ast_node
        acceptor.add_resource_property(rdf("type"), oo("Definition"))
        for name in definienda(cmd):
            acceptor.add_string_property(ide("for"), name)
        title = definition_title(cmd)
        if title is not None:
            acceptor.add_string_property(ide("title"), title)
        acceptor.add_string_property(ide("text"), flat_text(acceptor.document.body(cmd)))
        pair = acceptor.document.environment(cmd)
        if pair is not None and pair.end is not None:
            acceptor.add_integer_property(ide("extentEnd"), pair.end.span.end)
        module = acceptor.find(MODULE_TAG)
        if module is not None:
            acceptor.add_link_property(oo("partOf"), module)
        acceptor.root.add_link_property(ide("hasDefinition"), acceptor)
        return True

    def autocomplete_tag(self, tag, leaf, prefix, acceptor, ctx):
        from flexitex.complete import suggest_macros

        if tag == TEXT_TAG:
            suggest_macros(ctx, acceptor)
        elif tag == FOR_TAG:
            suggest_macros(ctx, acceptor, backslash=False)
