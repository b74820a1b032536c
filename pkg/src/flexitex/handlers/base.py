"""Category URIs and small helpers shared by the built-in handlers."""

from __future__ import annotations

from flexitex.syntax import WORD, Node, tokenize

COMMAND_URI = "kwarc.info.mkmide.latex.syntaxhighlighting.command"
COMMAND_DESC = "Command"
EXTERNAL_REF_URI = "kwarc.info.mkmide.latex.syntaxhighlighting.externalRef"
EXTERNAL_REF_DESC = "External references"
DECLARATION_URI = "kwarc.info.mkmide.latex.syntaxhighlighting.declaration"
DECLARATION_DESC = "Declarations"
DEFINIENDUM_URI = "kwarc.info.mkmide.latex.syntaxhighlighting.definiendum"
DEFINIENDUM_DESC = "Definienda"

MODULE_TAG = "stex.module.begin"
MODULE_ID_TAG = "stex.module.id"


def option_text(option: Node | None) -> str:
    """Text inside an option's delimiters, comments dropped."""
    if option is None or option.model is None:
        return ""
    text = option.model.render()
    if "%" in text:
        text = "".join(t.text for t in tokenize(text) if t.kind != "comment")
    return text.strip()


def flat_text(nodes: list[Node]) -> str:
    """Whitespace-normalized concatenation of the Word leaves under ``nodes``."""
    words = [n.text for top in nodes for n in top.walk() if n.kind == WORD]
    return " ".join(" ".join(words).split())


def inside_module(ctx_doc, node: Node) -> Node | None:
    """The ``\\begin{module}`` logically enclosing ``node``, if any."""
    for anc in ctx_doc.logical_ancestors(node):
        if MODULE_TAG in anc.tags:
            return anc
    return None
