import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import REALS
from flexitex.handlers import default_registry
from flexitex.handlers.base import COMMAND_URI, DECLARATION_URI, EXTERNAL_REF_URI
from flexitex.highlight import HighlightError, highlight, render_ansi
from flexitex.registry import Extension, Registry, tag_document
from flexitex.syntax import parse


def spans_of(source, registry=None):
    registry = registry or default_registry()
    doc = tag_document(registry, parse(source))
    return doc, highlight(doc, registry)


def text_of(doc, h):
    return doc.source[h.span.start : h.span.end]


def test_importmodule_command_is_command_colored():
    doc, spans = spans_of(r"\importmodule[../background/sets]{sets}")
    first = spans[0]
    assert text_of(doc, first) == r"\importmodule"
    assert first.category == COMMAND_URI and first.description == "Command"


def test_import_path_is_external_reference():
    doc, spans = spans_of(r"\importmodule[../background/sets]{sets}")
    by_text = {text_of(doc, h): h for h in spans}
    assert by_text["../background/sets"].category == EXTERNAL_REF_URI
    assert by_text["../background/sets"].description == "External references"
    assert by_text["sets"].category == EXTERNAL_REF_URI


def test_plain_text_has_no_spans():
    assert spans_of("Just some words here.")[1] == []


def test_unhandled_command_gets_default_category():
    doc, spans = spans_of(r"\emph{word}")
    assert [(text_of(doc, h), h.category) for h in spans] == [(r"\emph", COMMAND_URI)]


def test_symbol_names_are_declarations():
    doc, spans = spans_of(r"\begin{module}[id=m]\symdef{Reals}{x}\end{module}")
    cats = {text_of(doc, h): h.category for h in spans}
    assert cats["Reals"] == DECLARATION_URI
    assert cats["m"] == DECLARATION_URI


def test_undeclared_category_is_an_error():
    class Bad(Extension):
        id = "bad"
        command_names = ("foo",)
        tags = ("test.foo",)
        highlighting = {"urn:declared": "Declared"}

        def add_node_tags(self, cmd, tagger):
            tagger.tag(cmd, "test.foo")

        def syntax_color_uri(self, tag):
            return "urn:not-declared"

    with pytest.raises(HighlightError, match="bad"):
        spans_of(r"\foo", Registry([Bad()]))


def test_removing_handler_removes_only_its_categories():
    reg = default_registry()
    _, full = spans_of(REALS, reg)
    for handler in reg.handlers:
        _, reduced = spans_of(REALS, reg.without(handler.id))
        kept = [h for h in full if h.handler != handler.id]
        assert [h for h in reduced if h.handler] == [h for h in kept if h.handler]


def test_ansi_rendering_keeps_text():
    doc, spans = spans_of(REALS)
    out = render_ansi(doc.source, spans)
    assert "\x1b[" in out
    import re

    assert re.sub(r"\x1b\[[0-9;]*m", "", out) == REALS


@settings(max_examples=150)
@given(st.lists(st.sampled_from(list("ab {}[]\\%$\n") + [r"\importmodule", r"\symdef", r"\begin{module}"]), max_size=30).map("".join))
def test_spans_sorted_disjoint_in_bounds(source):
    _, spans = spans_of(source)
    last = 0
    for h in spans:
        assert last <= h.span.start <= h.span.end <= len(source)
        last = h.span.end
