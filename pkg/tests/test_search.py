import pytest

from corpus import DEFINIENDUM, SETS
from flexitex.search import search_definitions


def test_cartesian_product(make_service):
    svc = make_service({"d.tex": DEFINIENDUM})
    (hit,) = search_definitions(svc, ["cartesian", "product"])
    assert hit.definiendum == "cart" and hit.file == "d.tex"
    assert hit.score == 2


def test_unknown_word(make_service):
    svc = make_service({"d.tex": DEFINIENDUM})
    assert search_definitions(svc, ["nonexistentword"]) == []


def test_two_files_ordered_by_path(make_service):
    svc = make_service({"b.tex": DEFINIENDUM, "a.tex": DEFINIENDUM.replace("cart", "prod")})
    hits = search_definitions(svc, ["pair"])
    assert [(h.file, h.definiendum) for h in hits] == [("a.tex", "prod"), ("b.tex", "cart")]


def test_whole_word_only(make_service):
    svc = make_service({"s.tex": SETS})
    assert search_definitions(svc, ["ele"]) == []
    assert [h.definiendum for h in search_definitions(svc, ["ELEMENT"])] == ["inset"]


def test_score_orders_hits(make_service):
    svc = make_service({"s.tex": SETS})
    hits = search_definitions(svc, ["set"])
    # "set" only appears once in each, but "sets" is a different word
    assert [h.definiendum for h in hits] == ["inset"]
    hits = search_definitions(svc, ["union"])
    assert [(h.definiendum, h.score) for h in hits] == [("union", 2)]


def test_empty_workspace(make_service):
    assert search_definitions(make_service({}), ["x"]) == []


def test_empty_keywords_rejected(make_service):
    with pytest.raises(ValueError):
        search_definitions(make_service({}), [])


def test_edit_is_reflected(make_service):
    svc = make_service({"s.tex": SETS})
    assert search_definitions(svc, ["belongs"])
    svc.workspace.write("s.tex", SETS.replace("belongs", "lives"))
    assert search_definitions(svc, ["belongs"]) == []
    (hit,) = search_definitions(svc, ["lives"])
    assert svc.workspace.read("s.tex")[hit.span.start :].startswith(r"\begin{definition}")
