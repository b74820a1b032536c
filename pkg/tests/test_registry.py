import pytest

from corpus import DEFINIENDUM, REALS
from flexitex.handlers import (
    DefinitionHandler,
    ImportModuleHandler,
    ModuleHandler,
    SymdefHandler,
    default_registry,
)
from flexitex.handlers.definition import FOR_TAG, TEXT_TAG
from flexitex.handlers.importmodule import COMMAND_TAG, FILE_TAG, ID_TAG
from flexitex.registry import (
    Extension,
    Registry,
    RegistryError,
    UndeclaredTagError,
    UnknownTagError,
    tag_document,
)
from flexitex.syntax import WORD, parse


class Dummy(Extension):
    id = "dummy"
    command_names = ("foo",)
    tags = ("test.foo",)

    def add_node_tags(self, cmd, tagger):
        tagger.tag(cmd, "test.foo")


def tag_set(doc):
    return [(n.span.start, n.span.end, n.kind, tuple(sorted(n.tags))) for n in doc.root.walk()]


def test_register_importmodule_handler():
    reg = Registry([ImportModuleHandler()])
    assert isinstance(reg.by_command["importmodule"], ImportModuleHandler)


def test_disjoint_handlers_both_resolve():
    reg = Registry([ImportModuleHandler(), Dummy()])
    assert reg.handler_for_tag("test.foo").id == "dummy"
    assert reg.handler_for_tag(COMMAND_TAG).id == "stex.importmodule"


def test_tag_collision_names_both_handlers():
    class Thief(Extension):
        id = "thief"
        tags = (COMMAND_TAG,)

    reg = Registry([ImportModuleHandler()])
    with pytest.raises(RegistryError) as err:
        reg.register(Thief())
    assert "thief" in str(err.value) and "stex.importmodule" in str(err.value)


def test_command_collision_is_rejected():
    class Other(Extension):
        id = "other"
        command_names = ("importmodule",)

    with pytest.raises(RegistryError, match="stex.importmodule"):
        Registry([ImportModuleHandler(), Other()])


def test_unknown_tag():
    with pytest.raises(UnknownTagError):
        default_registry().handler_for_tag("urn:nobody")


def test_definition_tags_resolve_to_definition_handler():
    assert isinstance(default_registry().handler_for_tag(FOR_TAG), DefinitionHandler)


def test_importmodule_three_tags():
    doc = tag_document(default_registry(), parse(REALS))
    cmd = next(n for n in doc.root.walk() if n.name == "importmodule")
    assert COMMAND_TAG in cmd.tags
    path_words = [n for n in cmd.children[0].walk() if n.kind == WORD]
    assert path_words and all(FILE_TAG in w.tags for w in path_words)
    id_words = [n for n in cmd.children[1].walk() if n.kind == WORD]
    assert [w.text for w in id_words] == ["sets"] and ID_TAG in id_words[0].tags


def test_importmodule_without_options_gets_only_command_tag():
    doc = tag_document(default_registry(), parse(r"\importmodule"))
    cmd = doc.root.children[0]
    assert cmd.tags == {COMMAND_TAG}


def test_importmodule_without_path_tags_id_only():
    doc = tag_document(default_registry(), parse(r"\importmodule{sets}"))
    tags = set().union(*(n.tags for n in doc.root.walk()))
    assert FILE_TAG not in tags and ID_TAG in tags


def test_no_handled_commands_means_no_tags():
    doc = tag_document(default_registry(), parse(r"just \emph{text} here"))
    assert all(not n.tags for n in doc.root.walk())


def test_definition_for_value_and_body_tagged():
    doc = tag_document(default_registry(), parse(DEFINIENDUM))
    cart = [n for n in doc.root.walk() if n.kind == WORD and n.text == "cart" and FOR_TAG in n.tags]
    assert len(cart) == 1
    body_words = [n.text for n in doc.root.walk() if n.kind == WORD and TEXT_TAG in n.tags]
    assert "Cartesian" in body_words and "pair" in body_words
    assert "cart" not in body_words  # the for= value is not body text


def test_tagging_is_idempotent():
    reg = default_registry()
    once = tag_document(reg, parse(REALS))
    twice = tag_document(reg, once)
    assert tag_set(once) == tag_set(twice)


def test_tagging_leaves_original_untouched():
    doc = parse(REALS)
    tag_document(default_registry(), doc)
    assert all(not n.tags for n in doc.root.walk())


def test_removing_a_handler_removes_exactly_its_tags():
    reg = default_registry()
    full = tag_document(reg, parse(DEFINIENDUM + REALS))
    for handler in reg.handlers:
        reduced = tag_document(reg.without(handler.id), parse(DEFINIENDUM + REALS))
        expected = [
            (a, b, k, tuple(t for t in tags if t not in handler.tags)) for a, b, k, tags in tag_set(full)
        ]
        assert tag_set(reduced) == expected


def test_undeclared_tag_is_a_hard_error():
    class Sloppy(Extension):
        id = "sloppy"
        command_names = ("foo",)
        tags = ("test.declared",)

        def add_node_tags(self, cmd, tagger):
            tagger.tag(cmd, "test.other")

    with pytest.raises(UndeclaredTagError, match="sloppy"):
        tag_document(Registry([Sloppy()]), parse(r"\foo"))


def test_refactor_is_a_stub():
    assert SymdefHandler().refactor("x", None) == "unsupported"


def test_environments_listed():
    assert default_registry().environments() == ["definition", "module"]


def test_module_handler_ignores_plain_command_named_module():
    doc = tag_document(Registry([ModuleHandler()]), parse(r"\module{x}"))
    assert all(not n.tags for n in doc.root.walk())
