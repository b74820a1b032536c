"""``\\symdef{name}[arity]{presentation}``: semantic macro declarations."""

from __future__ import annotations

from flexitex.handlers.base import (
    COMMAND_DESC,
    COMMAND_URI,
    DECLARATION_DESC,
    DECLARATION_URI,
    MODULE_TAG,
    inside_module,
    option_text,
)
from flexitex.index.store import ide, oo, rdf
from flexitex.registry import Extension
from flexitex.syntax import BRACE, BRACKET, Node

SYMDEF_TAG = "stex.symdef.command"
SYMDEF_NAME_TAG = "stex.symdef.name"


def symbol_name(cmd: Node) -> str:
    return option_text(cmd.option(BRACE)).lstrip("\\")


def symbol_arity(cmd: Node) -> int:
    text = option_text(cmd.option(BRACKET))
    return int(text) if text.isdigit() else 0


class SymdefHandler(Extension):
    id = "stex.symdef"
    command_names = ("symdef",)
    tags = (SYMDEF_TAG, SYMDEF_NAME_TAG)
    highlighting = {COMMAND_URI: COMMAND_DESC, DECLARATION_URI: DECLARATION_DESC}

    def add_node_tags(self, cmd, tagger):
        tagger.tag(cmd, SYMDEF_TAG)
        name = cmd.option(BRACE)
        if name is not None:
            tagger.tag_tree(name, SYMDEF_NAME_TAG)

    def syntax_color_uri(self, tag):
        return {SYMDEF_TAG: COMMAND_URI, SYMDEF_NAME_TAG: DECLARATION_URI}.get(tag)

    def index(self, tag, acceptor):
        if tag != SYMDEF_TAG:
            return False
        cmd = acceptor.ast_node
        name = symbol_name(cmd)
        if not name:
            return False
        braces = [o for o in cmd.options if o.delimiter == BRACE]
        acceptor.add_resource_property(rdf("type"), oo("Symbol"))
        acceptor.add_string_property(ide("name"), name)
        acceptor.add_integer_property(ide("arity"), symbol_arity(cmd))
        presentation = option_text(braces[-1]) if len(braces) > 1 else ""
        acceptor.add_string_property(ide("presentation"), presentation)
        scope = acceptor.find(MODULE_TAG) or acceptor.root
        scope.add_link_property(ide("hasSymbol"), acceptor)
        return True

    def validate(self, tag, node, ctx):
        if tag != SYMDEF_TAG:
            return
        if not symbol_name(node):
            ctx.warning("symdef-missing-name", "\\symdef without a symbol name", node)
        elif inside_module(ctx.doc, node) is None:
            ctx.warning(
                "symdef-outside-module",
                f"symbol '{symbol_name(node)}' is declared outside any module",
                node,
            )
