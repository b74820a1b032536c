"""In-memory triple store with conjunctive pattern queries."""

from __future__ import annotations

import functools
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_INTEGER = "http://www.w3.org/2001/XMLSchema#integer"
IDE = "urn:flexitex:ide#"
OO = "urn:flexitex:oo#"

PREFIXES = {"rdf": RDF, "IDE": IDE, "oo": OO, "xsd": "http://www.w3.org/2001/XMLSchema#"}


class QueryError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IRI:
    value: str

    def __post_init__(self):
        if not _ABSOLUTE.match(self.value) or any(c in self.value for c in '<>" {}|\\^`\n'):
            raise QueryError(f"not an absolute IRI: {self.value!r}")

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Literal:
    value: Union[str, int]

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str


Term = Union[IRI, Literal]
Triple = tuple[IRI, IRI, Term]
Pattern = tuple[Union[IRI, Var], Union[IRI, Var], Union[IRI, Literal, Var]]

_ABSOLUTE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:\S+$")


@functools.lru_cache(maxsize=None)
def rdf(local: str) -> IRI:
    return IRI(RDF + local)


@functools.lru_cache(maxsize=None)
def ide(local: str) -> IRI:
    return IRI(IDE + local)


@functools.lru_cache(maxsize=None)
def oo(local: str) -> IRI:
    return IRI(OO + local)


@functools.lru_cache(maxsize=None)
def seq(n: int) -> IRI:
    return IRI(f"{RDF}_{n}")


def term_key(t: Term) -> tuple:
    """Total order over terms: IRIs, then strings, then integers."""
    if isinstance(t, IRI):
        return (0, t.value, 0)
    if isinstance(t.value, int):
        return (2, "", t.value)
    return (1, t.value, 0)


def _check_triple(s, p, o) -> None:
    if not isinstance(s, IRI) or not isinstance(p, IRI):
        raise QueryError(f"subject and predicate must be IRIs: {s!r} {p!r}")
    if not isinstance(o, (IRI, Literal)):
        raise QueryError(f"object must be an IRI or literal: {o!r}")
    if isinstance(o, Literal) and isinstance(o.value, bool):
        raise QueryError("boolean literals are not supported")


class Store:
    """Triples with SPO/POS/OSP hash indexes and per-file ownership."""

    def __init__(self):
        self._spo: dict = defaultdict(lambda: defaultdict(set))
        self._pos: dict = defaultdict(lambda: defaultdict(set))
        self._osp: dict = defaultdict(lambda: defaultdict(set))
        self._count = 0
        self.roots: dict[str, IRI] = {}
        self.freshness: dict[str, str] = {}
        self.by_file: dict[str, set[Triple]] = {}

    def __len__(self):
        return self._count

    def __contains__(self, triple: Triple) -> bool:
        s, p, o = triple
        return o in self._spo.get(s, {}).get(p, ())

    def __iter__(self) -> Iterator[Triple]:
        for s, po in self._spo.items():
            for p, objs in po.items():
                for o in objs:
                    yield (s, p, o)

    def add(self, s: IRI, p: IRI, o: Term) -> bool:
        _check_triple(s, p, o)
        if (s, p, o) in self:
            return False
        self._spo[s][p].add(o)
        self._pos[p][o].add(s)
        self._osp[o][s].add(p)
        self._count += 1
        return True

    def remove(self, s: IRI, p: IRI, o: Term) -> None:
        if (s, p, o) not in self:
            return
        for index, a, b, c in ((self._spo, s, p, o), (self._pos, p, o, s), (self._osp, o, s, p)):
            bucket = index[a][b]
            bucket.discard(c)
            if not bucket:
                del index[a][b]
                if not index[a]:
                    del index[a]
        self._count -= 1

    def replace_file(self, file: str, root: IRI, triples: Iterable[Triple], digest: str) -> None:
        """Swap in the triples of ``file``, dropping whatever it had before."""
        for t in self.by_file.pop(file, ()):
            self.remove(*t)
        owned = set()
        for t in triples:
            self.add(*t)
            owned.add(t)
        self.by_file[file] = owned
        self.roots[file] = root
        self.freshness[file] = digest

    def drop_file(self, file: str) -> None:
        for t in self.by_file.pop(file, ()):
            self.remove(*t)
        self.roots.pop(file, None)
        self.freshness.pop(file, None)

    def match(self, s=None, p=None, o=None) -> Iterator[Triple]:
        """Triples matching the given positions; None matches anything."""
        if s is not None:
            po = self._spo.get(s)
            if not po:
                return
            preds = [p] if p is not None else list(po)
            for pp in preds:
                objs = po.get(pp, ())
                if o is not None:
                    if o in objs:
                        yield (s, pp, o)
                else:
                    for oo_ in objs:
                        yield (s, pp, oo_)
        elif p is not None:
            os_ = self._pos.get(p)
            if not os_:
                return
            objs = [o] if o is not None else list(os_)
            for oo_ in objs:
                for ss in os_.get(oo_, ()):
                    yield (ss, p, oo_)
        elif o is not None:
            for ss, preds in self._osp.get(o, {}).items():
                for pp in preds:
                    yield (ss, pp, o)
        else:
            yield from self

    def count(self, s=None, p=None, o=None) -> int:
        if s is not None and p is not None and o is None:
            return len(self._spo.get(s, {}).get(p, ()))
        if p is not None and o is not None and s is None:
            return len(self._pos.get(p, {}).get(o, ()))
        if s is not None and p is None and o is None:
            return sum(len(v) for v in self._spo.get(s, {}).values())
        if p is not None and s is None and o is None:
            return sum(len(v) for v in self._pos.get(p, {}).values())
        if o is not None and s is None and p is None:
            return sum(len(v) for v in self._osp.get(o, {}).values())
        return sum(1 for _ in self.match(s, p, o))

    def objects(self, s: IRI, p: IRI) -> list[Term]:
        return sorted(self._spo.get(s, {}).get(p, ()), key=term_key)

    def value(self, s: IRI, p: IRI, default=None):
        objs = self.objects(s, p)
        return objs[0] if objs else default

    # ------------------------------------------------------------ queries

    def query(self, patterns: list[Pattern]) -> list[dict[str, Term]]:
        return query(self, patterns)


def _variables(patterns: list[Pattern]) -> list[str]:
    names: list[str] = []
    for pat in patterns:
        for t in pat:
            if isinstance(t, Var) and t.name not in names:
                names.append(t.name)
    return names


def _validate_pattern(pat) -> None:
    if len(pat) != 3:
        raise QueryError(f"pattern must have three positions: {pat!r}")
    s, p, o = pat
    if not isinstance(s, (IRI, Var)):
        raise QueryError(f"subject must be an IRI or variable: {s!r}")
    if not isinstance(p, (IRI, Var)):
        raise QueryError(f"predicate must be an IRI or variable: {p!r}")
    if not isinstance(o, (IRI, Literal, Var)):
        raise QueryError(f"object must be an IRI, literal or variable: {o!r}")


def query(store: Store, patterns: list[Pattern]) -> list[dict[str, Term]]:
    """All bindings satisfying every pattern, ordered by bound values."""
    for pat in patterns:
        _validate_pattern(pat)
    remaining = list(patterns)
    solutions: list[dict[str, Term]] = [{}]
    while remaining and solutions:
        # cheapest pattern first, judged on the first partial solution
        probe = solutions[0]

        def cost(pat):
            s, p, o = (_resolve(t, probe) for t in pat)
            if isinstance(s, IRI) and isinstance(o, (IRI, Literal)) and not isinstance(p, IRI):
                return sum(1 for _ in store.match(s, None, o))
            return store.count(
                s if not isinstance(s, Var) else None,
                p if not isinstance(p, Var) else None,
                o if not isinstance(o, Var) else None,
            )

        remaining.sort(key=cost)
        pat = remaining.pop(0)
        nxt: list[dict[str, Term]] = []
        for sol in solutions:
            s, p, o = (_resolve(t, sol) for t in pat)
            for triple in store.match(
                None if isinstance(s, Var) else s,
                None if isinstance(p, Var) else p,
                None if isinstance(o, Var) else o,
            ):
                ext = _extend(sol, (s, p, o), triple)
                if ext is not None:
                    nxt.append(ext)
        solutions = nxt
    if remaining:
        return []
    names = sorted(_variables(patterns))
    unique = {tuple(sol[n] for n in names): sol for sol in solutions}
    return [unique[k] for k in sorted(unique, key=lambda k: [term_key(t) for t in k])]


def _resolve(t, sol):
    if isinstance(t, Var) and t.name in sol:
        return sol[t.name]
    return t


def _extend(sol: dict, pat, triple) -> dict | None:
    out = dict(sol)
    for t, v in zip(pat, triple):
        if isinstance(t, Var):
            bound = out.get(t.name)
            if bound is None:
                out[t.name] = v
            elif bound != v:
                return None
    return out


# ---------------------------------------------------------- text syntax

_TERM = re.compile(
    r"""\s*(?:
        (?P<iri><[^<>"\s]*>)
      | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<int>-?\d+)(?![\w:])
      | (?P<pname>[A-Za-z][A-Za-z0-9_-]*:[A-Za-z0-9_#./-]*)
    )""",
    re.VERBOSE,
)


def parse_term(text: str, prefixes: dict[str, str] = PREFIXES, aliases: dict | None = None):
    m = _TERM.fullmatch(text.strip() + "") if text.strip() else None
    if not m:
        raise QueryError(f"cannot parse term {text!r}")
    return _term_from_match(m, prefixes, aliases or {})


def _term_from_match(m, prefixes, aliases):
    if m.group("iri"):
        raw = m.group("iri")
        if raw in aliases:
            return aliases[raw]
        return IRI(raw[1:-1])
    if m.group("var"):
        return Var(m.group("var")[1:])
    if m.group("str"):
        return Literal(_unescape(m.group("str")[1:-1]))
    if m.group("int"):
        return Literal(int(m.group("int")))
    prefix, _, local = m.group("pname").partition(":")
    if prefix not in prefixes:
        raise QueryError(f"unknown prefix {prefix!r}")
    return IRI(prefixes[prefix] + local)


def parse_patterns(text: str, prefixes: dict[str, str] = PREFIXES, aliases: dict | None = None):
    """Parse ``"s p o; s p o"`` (also ``.`` or newline separated)."""
    patterns = []
    for chunk in re.split(r";|\.\s*(?:\n|$)|\n", text):
        if not chunk.strip() or chunk.strip().startswith("#"):
            continue
        terms = []
        pos = 0
        while pos < len(chunk):
            if not chunk[pos:].strip():
                break
            m = _TERM.match(chunk, pos)
            if not m or m.end() == pos:
                raise QueryError(f"cannot parse pattern {chunk.strip()!r}")
            terms.append(_term_from_match(m, prefixes, aliases or {}))
            pos = m.end()
        if len(terms) != 3:
            raise QueryError(f"pattern needs subject, predicate and object: {chunk.strip()!r}")
        _validate_pattern(tuple(terms))
        patterns.append(tuple(terms))
    return patterns


# ------------------------------------------------------------ N-Triples

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F or 0xD800 <= ord(ch) <= 0xDFFF:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _unescape(s: str) -> str:
    def repl(m):
        e = m.group(0)
        if e[1] in "uU":
            return chr(int(e[2:], 16))
        return {"\\\\": "\\", '\\"': '"', "\\n": "\n", "\\r": "\r", "\\t": "\t", "\\'": "'", "\\b": "\b", "\\f": "\f"}[e]

    return re.sub(r"\\(?:u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)", repl, s)


def format_term(t: Term) -> str:
    if isinstance(t, IRI):
        return f"<{t.value}>"
    if isinstance(t.value, int):
        return f'"{t.value}"^^<{XSD_INTEGER}>'
    return f'"{_escape(t.value)}"'


def to_ntriples(triples: Iterable[Triple]) -> str:
    lines = sorted(f"{format_term(s)} {format_term(p)} {format_term(o)} ." for s, p, o in triples)
    return "".join(line + "\n" for line in lines)


_NT_LINE = re.compile(
    r'^<([^>]*)>\s+<([^>]*)>\s+(?:<([^>]*)>|"((?:[^"\\]|\\.)*)"(?:\^\^<([^>]*)>)?)\s*\.\s*$'
)


def from_ntriples(text: str) -> list[Triple]:
    triples = []
    for n, line in enumerate(text.split("\n"), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _NT_LINE.match(line)
        if not m:
            raise QueryError(f"line {n}: not an N-Triples statement")
        s, p, o_iri, o_lit, dtype = m.groups()
        if o_iri is not None:
            obj: Term = IRI(o_iri)
        elif dtype == XSD_INTEGER:
            obj = Literal(int(o_lit))
        else:
            obj = Literal(_unescape(o_lit))
        triples.append((IRI(s), IRI(p), obj))
    return triples
