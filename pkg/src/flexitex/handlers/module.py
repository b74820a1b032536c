"""``\\begin{module}[id=...]``: the theory nodes everything else hangs off."""

from __future__ import annotations

from flexitex.handlers.base import (
    COMMAND_DESC,
    COMMAND_URI,
    DECLARATION_DESC,
    DECLARATION_URI,
    MODULE_ID_TAG,
    MODULE_TAG,
)
from flexitex.index.store import ide, oo, rdf
from flexitex.registry import Extension
from flexitex.syntax import BRACKET, Node


def module_id(cmd: Node) -> str | None:
    opt = cmd.option(BRACKET)
    if opt is None or "id" not in opt.keyvals:
        return None
    return opt.keyvals["id"].value or None


class ModuleHandler(Extension):
    id = "stex.module"
    command_names = ("module",)
    environments = ("module",)
    tags = (MODULE_TAG, MODULE_ID_TAG)
    highlighting = {COMMAND_URI: COMMAND_DESC, DECLARATION_URI: DECLARATION_DESC}

    def add_node_tags(self, cmd, tagger):
        if cmd.name != "begin":
            return
        tagger.tag(cmd, MODULE_TAG)
        opt = cmd.option(BRACKET)
        if opt is not None and "id" in opt.keyvals:
            for n in opt.keyvals["id"].nodes:
                tagger.tag_tree(n, MODULE_ID_TAG)

    def syntax_color_uri(self, tag):
        return {MODULE_TAG: COMMAND_URI, MODULE_ID_TAG: DECLARATION_URI}.get(tag)

    def index(self, tag, acceptor):
        if tag != MODULE_TAG:
            return False
        cmd = acceptor.ast_node
        acceptor.add_resource_property(rdf("type"), oo("Theory"))
        mid = module_id(cmd)
        if mid is not None:
            acceptor.add_string_property(rdf("id"), mid)
        pair = acceptor.document.environment(cmd)
        end = pair.end.span.end if pair is not None and pair.end is not None else cmd.span.end
        acceptor.add_integer_property(ide("extentEnd"), end)
        acceptor.root.add_link_property(ide("hasModule"), acceptor)
        return True

    def validate(self, tag, node, ctx):
        if tag == MODULE_TAG and module_id(node) is None:
            ctx.warning("missing-module-id", "module has no id= key", node)
