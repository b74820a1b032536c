from corpus import DEFINIENDUM, REALS, SETS
from flexitex import semantics
from flexitex.diagnostics import validate
from flexitex.handlers.symdef import symbol_arity, symbol_name
from flexitex.index.store import Literal, ide, oo, rdf
from flexitex.syntax import parse


def codes(service, file):
    return [d.code for d in validate(service, file)]


def test_module_record_has_id_and_extent(make_service):
    svc = make_service({"d.tex": DEFINIENDUM})
    (mod,) = semantics.modules(svc, "d.tex")
    assert mod.id == "sets-operations"
    assert mod.start == 0 and mod.end == DEFINIENDUM.index(r"\end{module}") + len(r"\end{module}")


def test_symbol_records(make_service):
    svc = make_service({"r.tex": REALS})
    (mod,) = semantics.modules(svc, "r.tex")
    syms = {s.name: s.arity for s in semantics.symbols(svc, mod.iri)}
    assert syms == {"Reals": 0, "greater": 2, "positiveReals": 0}


def test_symdef_helpers_on_raw_commands():
    cmd = parse(r"\symdef{\greater}[2]{#1>#2}").root.children[0]
    assert symbol_name(cmd) == "greater" and symbol_arity(cmd) == 2


def test_definition_record(make_service):
    svc = make_service({"r.tex": REALS, "d.tex": DEFINIENDUM})
    (pos,) = semantics.definitions(svc, "r.tex")
    assert pos.title == "Positive Real Numbers" and pos.names == ()
    (cart,) = semantics.definitions(svc, "d.tex")
    assert cart.names == ("cart",)
    assert "Cartesian" in cart.text and "pair" in cart.text
    assert cart.module == semantics.modules(svc, "d.tex")[0].iri


def test_definition_has_part_of_and_text_property(make_service):
    svc = make_service({"s.tex": SETS})
    root = svc.get_index("s.tex")
    defs = [s for s, _, _ in svc.store.match(None, rdf("type"), oo("Definition"))]
    assert len(defs) == 2
    for d in defs:
        assert svc.store.value(d, oo("partOf")) is not None
        assert (root, ide("hasDefinition"), d) in svc.store
    assert {svc.store.value(d, ide("for")) for d in defs} == {Literal("inset"), Literal("union")}


def test_import_properties(make_service):
    svc = make_service({"a/r.tex": REALS, "background/sets.tex": SETS})
    (mod,) = semantics.modules(svc, "a/r.tex")
    (imp,) = semantics.imports(svc, mod.iri)
    assert imp.target == "background/sets.tex" and imp.module_id == "sets"
    (target,) = semantics.targets(svc, imp)
    assert target.id == "sets"


def test_same_file_import_without_path(make_service):
    text = "\\begin{module}[id=a]\\end{module}\n\\begin{module}[id=b]\\importmodule{a}\\end{module}\n"
    svc = make_service({"x.tex": text})
    b = [m for m in semantics.modules(svc, "x.tex") if m.id == "b"][0]
    (imp,) = semantics.imports(svc, b.iri)
    assert imp.target == "x.tex"
    assert [t.id for t in semantics.targets(svc, imp)] == ["a"]


def test_missing_module_id_warning(make_service):
    svc = make_service({"x.tex": r"\begin{module}\end{module}"})
    assert codes(svc, "x.tex") == ["missing-module-id"]


def test_definition_without_for_is_accepted(make_service):
    svc = make_service({"x.tex": r"\begin{module}[id=m]\begin{definition}text\end{definition}\end{module}"})
    assert codes(svc, "x.tex") == []


def test_symdef_without_name_and_outside_module(make_service):
    svc = make_service({"x.tex": "\\symdef\n\\symdef{lonely}{x}"})
    assert sorted(codes(svc, "x.tex")) == ["symdef-missing-name", "symdef-outside-module"]


def test_unknown_module_id_points_at_id_option(make_service):
    text = "\\begin{module}[id=m]\\importmodule[s]{nope}\\end{module}"
    svc = make_service({"x.tex": text, "s.tex": SETS})
    (d,) = validate(svc, "x.tex")
    assert d.code == "unknown-module-id" and d.severity == "error"
    assert text[d.span.start : d.span.end] == "{nope}"
