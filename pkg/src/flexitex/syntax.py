"""Error-tolerant parser for sTeX sources.

The grammar is deliberately context free::

    Model   = (Word | Command)*
    Command = \\Word Option*
    Option  = { Model } | [ Model ]

Parsing never fails.  Unbalanced delimiters are repaired locally and
reported as diagnostics, and every character of the input ends up either
in a leaf or in the trivia (whitespace, comments) attached to a node, so
``Document.render()`` gives the original text back.

``\\begin{..}``/``\\end{..}`` pairs are not part of the grammar.  They are
matched by a separate pass that pairs up as many markers as possible.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterator

from flexitex.diagnostics import Diagnostic, SourceSpan

MODEL = "Model"
WORD = "Word"
COMMAND = "Command"
OPTION = "Option"
MATH = "MathShift"

BRACE = "{"
BRACKET = "["

_CLOSER = {BRACE: "}", BRACKET: "]"}

_SPECIAL = set("\\{}[]%$")


# ---------------------------------------------------------------- tokens


@dataclass(frozen=True)
class Token:
    kind: str  # word, command, lbrace, rbrace, lbracket, rbracket, comment, math, space
    text: str
    start: int

    @property
    def end(self) -> int:
        return self.start + len(self.text)

    @property
    def name(self) -> str:
        return self.text[1:] if self.kind == "command" else ""


def _is_letter(ch: str) -> bool:
    return ("a" <= ch <= "z") or ("A" <= ch <= "Z")


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens that cover it exactly, whitespace included."""
    tokens: list[Token] = []
    n = len(source)
    i = 0
    while i < n:
        ch = source[i]
        if ch == "\\":
            j = i + 1
            if j < n and _is_letter(source[j]):
                while j < n and _is_letter(source[j]):
                    j += 1
                tokens.append(Token("command", source[i:j], i))
            elif j < n and source[j] in "[]":
                tokens.append(Token("math", source[i : j + 1], i))
                j += 1
            elif j < n:
                tokens.append(Token("command", source[i : j + 1], i))
                j += 1
            else:
                tokens.append(Token("command", "\\", i))
            i = j
        elif ch == "%":
            j = source.find("\n", i)
            j = n if j < 0 else j
            tokens.append(Token("comment", source[i:j], i))
            i = j
        elif ch == "$":
            tokens.append(Token("math", "$", i))
            i += 1
        elif ch in "{}[]":
            kind = {"{": "lbrace", "}": "rbrace", "[": "lbracket", "]": "rbracket"}[ch]
            tokens.append(Token(kind, ch, i))
            i += 1
        elif ch.isspace():
            j = i + 1
            while j < n and source[j].isspace():
                j += 1
            tokens.append(Token("space", source[i:j], i))
            i = j
        else:
            j = i + 1
            while j < n and source[j] not in _SPECIAL and not source[j].isspace():
                j += 1
            tokens.append(Token("word", source[i:j], i))
            i = j
    return tokens


# ------------------------------------------------------------------ tree


@dataclass
class KeyValue:
    """One ``key=value`` entry of a bracket option."""

    key: str
    value: str
    span: SourceSpan
    nodes: list["Node"]


@dataclass(eq=False)
class Node:
    kind: str
    span: SourceSpan
    text: str = ""
    name: str | None = None
    delimiter: str | None = None
    closed: bool = True
    leading: str = ""
    trailing: str = ""
    children: list["Node"] = field(default_factory=list)
    tags: set[str] = field(default_factory=set)
    parent: "Node | None" = field(default=None, repr=False)
    keyvals: dict[str, KeyValue] = field(default_factory=dict, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children and self.kind != MODEL and self.kind != OPTION

    @property
    def head_end(self) -> int:
        """End offset of the ``\\name`` part of a command (span end otherwise)."""
        if self.kind == COMMAND:
            return self.span.start + len(self.text)
        return self.span.end

    @property
    def options(self) -> list["Node"]:
        return self.children if self.kind == COMMAND else []

    def option(self, delimiter: str, index: int = 0) -> "Node | None":
        """The ``index``-th option of this command with the given delimiter."""
        found = [o for o in self.options if o.delimiter == delimiter]
        return found[index] if index < len(found) else None

    @property
    def model(self) -> "Node | None":
        return self.children[0] if self.kind == OPTION and self.children else None

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal without recursion."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator["Node"]:
        return (n for n in self.walk() if n.is_leaf)

    def words(self) -> list[str]:
        return [n.text for n in self.walk() if n.kind == WORD]

    def render(self) -> str:
        """Source text of the node, leading trivia included."""
        out: list[str] = []
        # (node, phase): phase 0 opens, phase 1 closes
        stack: list[tuple[Node, int]] = [(self, 0)]
        while stack:
            node, phase = stack.pop()
            if phase == 1:
                if node.kind == MODEL:
                    out.append(node.trailing)
                elif node.kind == OPTION and node.closed:
                    out.append(_CLOSER[node.delimiter])
                continue
            out.append(node.leading)
            if node.kind in (WORD, MATH, COMMAND):
                out.append(node.text)
            elif node.kind == OPTION:
                out.append(node.delimiter)
            stack.append((node, 1))
            stack.extend((c, 0) for c in reversed(node.children))
        return "".join(out)

    def _shallow_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.kind == COMMAND:
            d["name"] = self.name
        if self.kind in (WORD, MATH):
            d["text"] = self.text
        if self.kind == OPTION:
            d["delimiter"] = self.delimiter
        d["span"] = {"start": self.span.start, "end": self.span.end}
        d["tags"] = sorted(self.tags)
        d["children"] = []
        return d

    def to_dict(self) -> dict:
        top = self._shallow_dict()
        stack = [(self, top)]
        while stack:
            node, d = stack.pop()
            for child in node.children:
                cd = child._shallow_dict()
                d["children"].append(cd)
                stack.append((child, cd))
        return top


@dataclass
class EnvironmentPair:
    name: str
    begin: Node
    end: Node | None


@dataclass
class Edit:
    span: SourceSpan
    replacement: str

    def apply(self, source: str) -> str:
        if not 0 <= self.span.start <= self.span.end <= len(source):
            raise ValueError(
                f"edit span {self.span.start}..{self.span.end} outside source of length {len(source)}"
            )
        return source[: self.span.start] + self.replacement + source[self.span.end :]


@dataclass(eq=False)
class Document:
    root: Node
    source: str
    diagnostics: list[Diagnostic]
    env_pairs: list[EnvironmentPair]
    file: str = ""
    content_hash: str = ""
    # logical structure: matched environments enclose the nodes between them
    _parents: dict[int, Node] = field(default_factory=dict, repr=False)
    _bodies: dict[int, list[Node]] = field(default_factory=dict, repr=False)

    def render(self) -> str:
        return self.root.render()

    def environment(self, begin: Node) -> EnvironmentPair | None:
        for pair in self.env_pairs:
            if pair.begin is begin:
                return pair
        return None

    def body(self, begin: Node) -> list[Node]:
        """Nodes enclosed by a matched environment (same-level siblings)."""
        return self._bodies.get(id(begin), [])

    def logical_parent(self, node: Node) -> Node | None:
        return self._parents.get(id(node))

    def logical_children(self, node: Node) -> list[Node]:
        if node.kind == MODEL:
            return self._unclaimed(node.children)
        return node.children + self._unclaimed(self._bodies.get(id(node), []))

    def _unclaimed(self, nodes: list[Node]) -> list[Node]:
        inside = {id(n) for b in nodes for n in self._bodies.get(id(b), ())}
        return [c for c in nodes if id(c) not in inside]

    def logical_ancestors(self, node: Node) -> Iterator[Node]:
        cur = self.logical_parent(node)
        while cur is not None:
            yield cur
            cur = self.logical_parent(cur)

    def to_dict(self) -> dict:
        return {
            "root": self.root.to_dict(),
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "environments": [
                {
                    "name": p.name,
                    "begin": p.begin.span.start,
                    "end": None if p.end is None else p.end.span.start,
                }
                for p in self.env_pairs
            ],
        }


def environment_name(cmd: Node) -> str | None:
    """Name of a ``\\begin{x}``/``\\end{x}`` command, or None for other nodes."""
    if cmd.kind != COMMAND or cmd.name not in ("begin", "end"):
        return None
    if not cmd.children or cmd.children[0].delimiter != BRACE:
        return None
    model = cmd.children[0].model
    return model.render().strip() if model is not None else ""


# ---------------------------------------------------------------- parser


class _Frame:
    __slots__ = ("model", "option", "plain")

    def __init__(self, model: Node, option: Node | None):
        self.model = model
        self.option = option
        self.plain = 0  # unmatched plain "[" words seen in this model

    @property
    def delimiter(self) -> str | None:
        return None if self.option is None else self.option.delimiter


_KV_SPLIT = re.compile(r"[^,=]+|[,=]")


class _Parser:
    def __init__(self, source: str, file: str):
        self.source = source
        self.file = file
        self.tokens = tokenize(source)
        self.diagnostics: list[Diagnostic] = []
        self.pending = ""
        self.pending_start = 0
        self.attach: Node | None = None

    def span(self, start: int, end: int) -> SourceSpan:
        return SourceSpan(start, end, self.file)

    def diag(self, severity: str, code: str, message: str, start: int, end: int) -> None:
        self.diagnostics.append(Diagnostic(severity, message, self.span(start, end), code))

    def add(self, frame: _Frame, node: Node) -> Node:
        node.leading, self.pending = self.pending, ""
        node.parent = frame.model
        frame.model.children.append(node)
        return node

    def open_option(self, stack: list[_Frame], owner: Node, tok: Token, delimiter: str) -> None:
        option = Node(OPTION, self.span(tok.start, tok.end), delimiter=delimiter, closed=False)
        option.leading, self.pending = self.pending, ""
        option.parent = owner
        owner.children.append(option)
        model = Node(MODEL, self.span(tok.end, tok.end), parent=option)
        option.children.append(model)
        stack.append(_Frame(model, option))
        self.attach = None

    def close_frame(self, stack: list[_Frame], end: int, closed: bool) -> Node:
        frame = stack.pop()
        model, option = frame.model, frame.option
        model.trailing, self.pending = self.pending, ""
        model.span = self.span(model.span.start, end)
        option.closed = closed
        option.span = self.span(option.span.start, end + (1 if closed else 0))
        if option.delimiter == BRACKET:
            option.keyvals = _keyvals(option, self.source, self.file)
        if not closed:
            self.diag(
                "error",
                "unclosed-group",
                f"'{option.delimiter}' is never closed",
                option.span.start,
                option.span.start + 1,
            )
        owner = option.parent
        self.attach = owner if owner is not None and owner.kind == COMMAND else None
        return option

    def run(self) -> Node:
        root = Node(MODEL, self.span(0, len(self.source)))
        stack = [_Frame(root, None)]
        toks = self.tokens
        i = 0
        while i < len(toks):
            tok = toks[i]
            frame = stack[-1]
            kind = tok.kind
            if kind == "space":
                nxt = toks[i + 1] if i + 1 < len(toks) else None
                if (
                    self.attach is not None
                    and nxt is not None
                    and nxt.kind == "lbracket"
                    and "\n\n" not in tok.text.replace("\r", "")
                ):
                    self.pending += tok.text
                    i += 1
                    self.open_option(stack, self.attach, nxt, BRACKET)
                    i += 1
                    continue
                self.pending += tok.text
                self.attach = None
            elif kind == "comment":
                self.pending += tok.text
                self.attach = None
            elif kind == "lbrace":
                owner = self.attach
                if owner is None:
                    # orphan group: an anonymous option directly in the model
                    option = Node(OPTION, self.span(tok.start, tok.end), delimiter=BRACE, closed=False)
                    self.add(frame, option)
                    model = Node(MODEL, self.span(tok.end, tok.end), parent=option)
                    option.children.append(model)
                    stack.append(_Frame(model, option))
                    self.attach = None
                else:
                    self.open_option(stack, owner, tok, BRACE)
            elif kind == "lbracket":
                if self.attach is not None:
                    self.open_option(stack, self.attach, tok, BRACKET)
                else:
                    frame.plain += 1
                    self.word(frame, tok.text, tok.start)
            elif kind == "rbrace":
                depth = next(
                    (k for k in range(len(stack) - 1, 0, -1) if stack[k].delimiter == BRACE),
                    None,
                )
                if depth is None:
                    self.diag("error", "stray-delimiter", "unmatched '}'", tok.start, tok.end)
                    self.word(frame, tok.text, tok.start)
                else:
                    while len(stack) - 1 > depth:
                        self.close_frame(stack, tok.start, closed=False)
                    self.close_frame(stack, tok.start, closed=True)
            elif kind == "rbracket":
                if frame.plain > 0:
                    frame.plain -= 1
                    self.word(frame, tok.text, tok.start)
                elif frame.delimiter == BRACKET:
                    self.close_frame(stack, tok.start, closed=True)
                else:
                    if frame.delimiter is None:
                        self.diag("info", "stray-delimiter", "unmatched ']'", tok.start, tok.end)
                    self.word(frame, tok.text, tok.start)
            elif kind == "math":
                self.add(frame, Node(MATH, self.span(tok.start, tok.end), text=tok.text))
                self.attach = None
            elif kind == "command":
                cmd = self.add(
                    frame,
                    Node(COMMAND, self.span(tok.start, tok.end), text=tok.text, name=tok.name),
                )
                self.attach = cmd
            else:
                self.word(frame, tok.text, tok.start)
            i += 1
        while len(stack) > 1:
            self.close_frame(stack, len(self.source), closed=False)
        root.trailing, self.pending = self.pending, ""
        return root

    def word(self, frame: _Frame, text: str, start: int) -> None:
        if frame.delimiter == BRACKET and ("," in text or "=" in text) and len(text) > 1:
            pos = start
            for piece in _KV_SPLIT.findall(text):
                self.add(frame, Node(WORD, self.span(pos, pos + len(piece)), text=piece))
                pos += len(piece)
        else:
            self.add(frame, Node(WORD, self.span(start, start + len(text)), text=text))
        self.attach = None


def _fix_command_spans(root: Node) -> None:
    # commands end where their last option ends
    for node in root.walk():
        if node.kind == COMMAND and node.children:
            node.span = SourceSpan(node.span.start, node.children[-1].span.end, node.span.file)


def _keyvals(option: Node, source: str, file: str) -> dict[str, KeyValue]:
    model = option.model
    entries: list[list[Node]] = [[]]
    for child in model.children:
        if child.kind == WORD and child.text == ",":
            entries.append([])
        else:
            entries[-1].append(child)
    result: dict[str, KeyValue] = {}
    for entry in entries:
        eq = next((k for k, n in enumerate(entry) if n.kind == WORD and n.text == "="), None)
        if eq is None or eq == 0:
            continue
        key = source[entry[0].span.start : entry[eq - 1].span.end].strip()
        nodes = entry[eq + 1 :]
        if nodes:
            start, end = nodes[0].span.start, nodes[-1].span.end
        else:
            start = end = entry[eq].span.end
        if key and key not in result:
            result[key] = KeyValue(key, source[start:end].strip(), SourceSpan(start, end, file), nodes)
    return result


# ----------------------------------------------------- environment pairs


def _markers(root: Node) -> list[tuple[str, str, Node]]:
    out = []
    for node in root.walk():
        name = environment_name(node)
        if name is not None:
            out.append(("b" if node.name == "begin" else "e", name, node))
    return out


def max_nested_matching(markers: list[tuple[str, str]]) -> list[tuple[int, int]]:
    """Largest properly nested set of (begin, end) index pairs with equal names."""
    stack: list[int] = []
    greedy: list[tuple[int, int]] = []
    clean = True
    for k, (kind, name) in enumerate(markers):
        if kind == "b":
            stack.append(k)
        elif stack and markers[stack[-1]][1] == name:
            greedy.append((stack.pop(), k))
        else:
            clean = False
            break
    if clean and not stack:
        return sorted(greedy)

    # drop markers that cannot take part in any pair
    begins_seen: set[str] = set()
    usable = [False] * len(markers)
    for k, (kind, name) in enumerate(markers):
        if kind == "b":
            begins_seen.add(name)
        elif name in begins_seen:
            usable[k] = True
    ends_seen: set[str] = set()
    for k in range(len(markers) - 1, -1, -1):
        kind, name = markers[k]
        if kind == "e":
            ends_seen.add(name)
        elif name in ends_seen:
            usable[k] = True
    idx = [k for k in range(len(markers)) if usable[k]]
    seq = [markers[k] for k in idx]
    n = len(seq)
    if n == 0:
        return []

    partners: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        if seq[a][0] == "b":
            partners[a] = [b for b in range(a + 1, n) if seq[b][0] == "e" and seq[b][1] == seq[a][1]]

    # best[a][b]: max pairs within seq[a..b]; choice[a][b]: partner of a or -1
    best = [[0] * (n + 1) for _ in range(n + 1)]
    choice = [[-1] * (n + 1) for _ in range(n + 1)]

    def get(a: int, b: int) -> int:
        return best[a][b] if a <= b else 0

    for a in range(n - 1, -1, -1):
        row, crow = best[a], choice[a]
        for b in range(a, n):
            value = get(a + 1, b)
            pick = -1
            for c in partners[a]:
                if c > b:
                    break
                cand = 1 + get(a + 1, c - 1) + get(c + 1, b)
                if cand > value:
                    value, pick = cand, c
            row[b] = value
            crow[b] = pick

    pairs: list[tuple[int, int]] = []
    todo = [(0, n - 1)]
    while todo:
        a, b = todo.pop()
        while a <= b:
            c = choice[a][b]
            if c < 0:
                a += 1
                continue
            pairs.append((idx[a], idx[c]))
            todo.append((a + 1, c - 1))
            a = c + 1
    return sorted(pairs)


def match_environments(doc: Document) -> tuple[list[EnvironmentPair], list[Diagnostic]]:
    """Pair ``\\begin``/``\\end`` commands, matching as many as possible."""
    markers = _markers(doc.root)
    pairs = max_nested_matching([(k, name) for k, name, _ in markers])
    matched_end = {b: a for a, b in pairs}
    matched_begin = {a: b for a, b in pairs}
    result: list[EnvironmentPair] = []
    diags: list[Diagnostic] = []
    for k, (kind, name, node) in enumerate(markers):
        if kind == "b":
            partner = matched_begin.get(k)
            result.append(EnvironmentPair(name, node, None if partner is None else markers[partner][2]))
            if partner is None:
                diags.append(
                    Diagnostic(
                        "error",
                        f"environment '{name}' is never closed",
                        node.span,
                        "env-mismatch",
                    )
                )
        elif k not in matched_end:
            diags.append(
                Diagnostic(
                    "error",
                    f"\\end{{{name}}} has no matching \\begin{{{name}}}",
                    node.span,
                    "env-mismatch",
                )
            )
    return result, diags


def _structure(doc: Document) -> None:
    bodies: dict[int, list[Node]] = {}
    for pair in doc.env_pairs:
        begin, end = pair.begin, pair.end
        if end is None or begin.parent is not end.parent:
            continue
        siblings = begin.parent.children
        a = next(k for k, n in enumerate(siblings) if n is begin)
        b = next(k for k, n in enumerate(siblings) if n is end)
        bodies[id(begin)] = siblings[a + 1 : b]
    doc._bodies = bodies
    parents: dict[int, Node] = {}
    stack = [doc.root]
    while stack:
        node = stack.pop()
        for child in doc.logical_children(node):
            parents[id(child)] = node
            stack.append(child)
    doc._parents = parents


# ------------------------------------------------------------- entry points


def content_hash(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8", "surrogatepass")).hexdigest()


def parse(source: str, file: str = "") -> Document:
    """Parse ``source``; never raises on malformed input."""
    parser = _Parser(source, file)
    root = parser.run()
    _fix_command_spans(root)
    doc = Document(root, source, list(parser.diagnostics), [], file, content_hash(source))
    pairs, env_diags = match_environments(doc)
    doc.env_pairs = pairs
    doc.diagnostics = sorted(
        doc.diagnostics + env_diags, key=lambda d: (d.span.start, d.span.end, d.code)
    )
    _structure(doc)
    return doc


def reparse(doc: Document, edit: Edit) -> Document:
    """Apply ``edit`` and return the resulting document.

    The result is always identical to a fresh ``parse`` of the edited text;
    documents are small enough that a full parse is the cheapest way to
    guarantee that.
    """
    return parse(edit.apply(doc.source), doc.file)


def node_at(doc: Document, offset: int) -> tuple[Node, Node | None]:
    """Deepest node containing ``offset`` and the last leaf ending at or before it."""
    if not 0 <= offset <= len(doc.source):
        raise ValueError(f"offset {offset} outside document of length {len(doc.source)}")
    deepest = doc.root
    while True:
        inner = next(
            (c for c in deepest.children if c.span.start <= offset < c.span.end),
            None,
        )
        if inner is None:
            break
        deepest = inner
    preceding = None
    for leaf in doc.root.leaves():
        if leaf.span.end <= offset:
            preceding = leaf
        else:
            break
    if offset == 0:
        preceding = None
    return deepest, preceding
