import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import DEFINIENDUM, REALS
from oracles import brute_max_matching, matching_is_valid
from flexitex.diagnostics import SourceSpan
from flexitex.syntax import (
    BRACE,
    BRACKET,
    COMMAND,
    MATH,
    MODEL,
    OPTION,
    WORD,
    Edit,
    max_nested_matching,
    node_at,
    parse,
    reparse,
    tokenize,
)


def visible(source):
    return [(t.kind, t.text) for t in tokenize(source) if t.kind != "space"]


def shape(doc):
    return (
        doc.root.to_dict(),
        [d.to_dict() for d in doc.diagnostics],
        doc.to_dict()["environments"],
    )


TEX_PIECES = list("ab \n\t\\{}[]%$=,é∀") + ["\\begin{x}", "\\end{x}", "\\[", "\\]", "\\cmd"]
TEX_ALPHABET = st.lists(st.sampled_from(TEX_PIECES), max_size=40).map("".join)


# ------------------------------------------------------------------ tokens


def test_tokenize_importmodule():
    assert visible(r"\importmodule[x]{y}") == [
        ("command", r"\importmodule"),
        ("lbracket", "["),
        ("word", "x"),
        ("rbracket", "]"),
        ("lbrace", "{"),
        ("word", "y"),
        ("rbrace", "}"),
    ]


def test_tokenize_empty():
    assert tokenize("") == []


def test_escaped_percent_is_a_command_not_a_comment():
    assert visible(r"a \% b % c") == [("word", "a"), ("command", r"\%"), ("word", "b"), ("comment", "% c")]


def test_comment_stops_before_newline():
    toks = tokenize("x % note\ny")
    assert ("comment", "% note") in [(t.kind, t.text) for t in toks]
    assert toks[-1].text == "y"


def test_math_shifts():
    kinds = [k for k, _ in visible(r"$x$ \[y\]")]
    assert kinds == ["math", "word", "math", "math", "word", "math"]


def test_command_takes_maximal_letter_run():
    assert visible(r"\alpha1")[:2] == [("command", r"\alpha"), ("word", "1")]


def test_lone_backslash_at_end():
    assert visible("a\\") == [("word", "a"), ("command", "\\")]


@given(st.text(max_size=80))
def test_tokens_partition_input(source):
    toks = tokenize(source)
    assert "".join(t.text for t in toks) == source
    pos = 0
    for t in toks:
        assert t.start == pos
        pos = t.end


# ------------------------------------------------------------------- parse


def test_listing_begins_with_module_environment():
    doc = parse(REALS)
    first = next(c for c in doc.root.children if c.kind == COMMAND)
    assert first.name == "begin"
    brace, bracket = first.children
    assert brace.delimiter == BRACE and brace.model.children[0].text == "module"
    assert bracket.delimiter == BRACKET
    assert bracket.keyvals["id"].value == "reals"


def test_orphan_group_becomes_model_option():
    doc = parse("{a}")
    (opt,) = doc.root.children
    assert opt.kind == OPTION and opt.delimiter == BRACE
    assert opt.model.kind == MODEL
    assert [w.text for w in opt.model.children] == ["a"]
    assert doc.diagnostics == []


def test_symdef_options():
    doc = parse(r"\symdef{Reals}{\mathcal{R}}")
    (cmd,) = doc.root.children
    assert cmd.name == "symdef" and [o.delimiter for o in cmd.children] == [BRACE, BRACE]
    inner = cmd.children[1].model.children[0]
    assert inner.name == "mathcal" and len(inner.children) == 1


def test_unclosed_group_closes_at_end_with_error():
    doc = parse(r"\textbf{abc")
    assert doc.render() == r"\textbf{abc"
    assert [d.code for d in doc.diagnostics] == ["unclosed-group"]
    assert doc.diagnostics[0].severity == "error"


def test_stray_closers_become_words():
    doc = parse("a}b")
    assert [n.text for n in doc.root.children] == ["a", "}", "b"]
    assert doc.diagnostics[0].code == "stray-delimiter"


def test_bracket_after_whitespace_binds_to_command():
    doc = parse("\\begin{definition}\n   [for=x]")
    cmd = doc.root.children[0]
    assert [o.delimiter for o in cmd.children] == [BRACE, BRACKET]


def test_bracket_after_blank_line_does_not_bind():
    doc = parse("\\item\n\n[x]")
    assert doc.root.children[0].children == []


def test_bracket_without_command_is_text():
    doc = parse("see [1]")
    assert all(c.kind == WORD for c in doc.root.children)


def test_keyvals_first_key_wins_and_values_are_raw():
    doc = parse(r"\begin{definition}[for=a, title=Some Title, for=b]")
    kv = doc.root.children[0].children[1].keyvals
    assert kv["for"].value == "a"
    assert kv["title"].value == "Some Title"


def test_math_leaves():
    doc = parse("$x$")
    assert [c.kind for c in doc.root.children] == [MATH, WORD, MATH]


def test_comments_are_trivia():
    src = "% head\n\\cmd{a} % tail\n"
    doc = parse(src)
    assert doc.render() == src
    assert [c.kind for c in doc.root.children] == [COMMAND]


def test_listing_round_trips():
    for src in (REALS, DEFINIENDUM):
        assert parse(src).render() == src


@settings(max_examples=300)
@given(TEX_ALPHABET)
def test_round_trip_and_totality(source):
    doc = parse(source)
    assert doc.render() == source
    assert doc.root.kind == MODEL


@settings(max_examples=200)
@given(TEX_ALPHABET)
def test_spans_are_ordered_and_in_bounds(source):
    doc = parse(source)
    last = 0
    for node in doc.root.walk():
        assert 0 <= node.span.start <= node.span.end <= len(source)
        assert node.span.start >= last or node.kind == MODEL
        last = max(last, node.span.start)
        kids = node.children
        for a, b in zip(kids, kids[1:]):
            assert a.span.end <= b.span.start


@settings(max_examples=200)
@given(TEX_ALPHABET)
def test_command_children_are_options(source):
    for node in parse(source).root.walk():
        if node.kind == COMMAND:
            assert all(c.kind == OPTION for c in node.children)
        if node.kind == OPTION:
            assert len(node.children) == 1 and node.children[0].kind == MODEL


# ------------------------------------------------------------ environments


def test_single_environment():
    doc = parse(r"\begin{module}x\end{module}")
    assert [(p.name, p.end is not None) for p in doc.env_pairs] == [("module", True)]
    assert doc.diagnostics == []


def test_crossing_environment_leaves_one_unmatched():
    doc = parse(r"\begin{a}\begin{b}\end{a}")
    matched = [p for p in doc.env_pairs if p.end is not None]
    assert [p.name for p in matched] == ["a"]
    assert len(doc.diagnostics) == 1
    assert "b" in doc.diagnostics[0].message
    assert doc.diagnostics[0].span.start == len(r"\begin{a}")


def test_empty_document_has_no_environments():
    doc = parse("")
    assert doc.env_pairs == [] and doc.diagnostics == []


def test_unmatched_end_is_reported():
    doc = parse(r"\end{x}")
    assert [d.code for d in doc.diagnostics] == ["env-mismatch"]


def test_environment_body_is_logical_children():
    doc = parse(r"\begin{m}a\begin{d}b\end{d}\end{m}")
    begin_m = doc.root.children[0]
    names = [n.name or n.text for n in doc.logical_children(begin_m)]
    # the options of \begin{m}, then its body without the inner body
    assert names[-3:] == ["a", "begin", "end"]


@settings(max_examples=400)
@given(st.lists(st.tuples(st.sampled_from(["b", "e"]), st.sampled_from("abc")), max_size=9))
def test_matching_is_maximal(markers):
    pairs = max_nested_matching(markers)
    assert matching_is_valid(markers, pairs)
    assert len(pairs) == brute_max_matching(markers)


# ----------------------------------------------------------------- reparse


def test_reparse_insert_into_word():
    doc = parse("abc def")
    new = reparse(doc, Edit(SourceSpan(1, 1), "x"))
    assert new.render() == "axbc def"
    assert shape(new) == shape(parse("axbc def"))


def test_reparse_deleting_brace_reports_it():
    doc = parse(r"\a{b}")
    new = reparse(doc, Edit(SourceSpan(4, 5), ""))
    assert shape(new) == shape(parse(r"\a{b"))
    assert [d.code for d in new.diagnostics] == ["unclosed-group"]


def test_reparse_replace_everything():
    doc = parse("old")
    new = reparse(doc, Edit(SourceSpan(0, 3), REALS))
    assert shape(new) == shape(parse(REALS))


def test_reparse_rejects_out_of_range_edit():
    doc = parse("abc")
    with pytest.raises(ValueError):
        reparse(doc, Edit(SourceSpan(2, 9), ""))


@settings(max_examples=150)
@given(TEX_ALPHABET, st.data())
def test_reparse_matches_full_parse(source, data):
    a = data.draw(st.integers(0, len(source)))
    b = data.draw(st.integers(a, len(source)))
    text = data.draw(TEX_ALPHABET)
    doc = parse(source)
    assert shape(reparse(doc, Edit(SourceSpan(a, b), text))) == shape(parse(source[:a] + text + source[b:]))


# ----------------------------------------------------------------- node_at


def test_node_at_inside_word():
    src = r"\importmodule[../background/sets]{sets}"
    doc = parse(src)
    offset = src.rindex("sets") + 2
    node, before = node_at(doc, offset)
    assert node.kind == WORD and node.text == "sets"
    assert before.text == "../background/sets"


def test_node_at_start_and_end():
    doc = parse("ab cd")
    node, before = node_at(doc, 0)
    assert node.text == "ab" and before is None
    node, before = node_at(doc, 5)
    assert node is doc.root and before.text == "cd"


def test_node_at_out_of_range():
    with pytest.raises(ValueError):
        node_at(parse("ab"), 3)


def test_node_at_agrees_with_linear_scan():
    src = REALS
    doc = parse(src)
    leaves = [n for n in doc.root.walk() if n.is_leaf and n.kind != MODEL]
    for offset in range(len(src) + 1):
        _, before = node_at(doc, offset)
        expected = [n for n in leaves if n.span.end <= offset]
        expected = max(expected, key=lambda n: (n.span.end, n.span.start), default=None)
        if expected is None:
            assert before is None
        else:
            assert before.span.end == expected.span.end
