"""Sample documents and a random workspace generator shared by the tests."""

from __future__ import annotations

import posixpath
import random
from dataclasses import dataclass, field

DEFINIENDUM = r"""\begin{module}[id=sets-operations]
  \symdef{cart}{\times}
  \begin{definition}[id=Cartesianproduct.def,display=flow,for=cart]
    {\twindef{Cartesian}{product}:}
    $\defeq{\cart{A,B}}{\setst{\tup{a,b}}{\conj{\inset{a}{A},\inset{b}{B}}}}$, call
    $\tup{a,b}$ {\defin{pair}}.
  \end{definition}
\end{module}
"""

REALS = r"""\begin{module}[id=reals]
  \importmodule[../background/sets]{sets}
  \symdef{Reals}{\mathcal{R}}
  \symdef{greater}[2]{#1>#2}
  \symdef{positiveReals}{\Reals^+}
  \begin{definition}[id=posreals.def,title=Positive Real Numbers]
    The set $\positiveReals$ is the set of $\inset{x}\Reals$ such that $\greater{x}0$
  \end{definition}
  \ldots
\end{module}
"""

SETS = r"""\begin{module}[id=sets]
  \symdef{inset}[2]{#1\in#2}
  \symdef{union}{\cup}
  \begin{definition}[for=inset]
    an element belongs to a set
  \end{definition}
  \begin{definition}[for=union]
    the union of two sets
  \end{definition}
\end{module}
"""

VOCAB = ["set", "element", "pair", "union", "order", "group", "map", "ring", "field", "unit"]


@dataclass
class GenModule:
    id: str
    file: str
    symbols: list[str] = field(default_factory=list)


@dataclass
class GenWorkspace:
    files: dict[str, str]
    cursors: dict[str, list[int]]  # completion offsets per file
    keywords: list[list[str]]


def _relpath(from_file: str, to_file: str, rng: random.Random) -> str:
    rel = posixpath.relpath(to_file, posixpath.dirname(from_file) or ".")
    if rng.random() < 0.5:
        rel = rel[: -len(".tex")]
    return rel


def generate_workspace(seed: int, max_files: int = 10, max_modules: int = 5) -> GenWorkspace:
    """A small random sTeX workspace with imports, symbols and definitions.

    Imports may form cycles, point at missing files or name unknown ids.
    ``%cursor`` comments mark offsets the completion oracle is run at.
    """
    rng = random.Random(seed)
    nfiles = rng.randint(1, max_files)
    paths = []
    for k in range(nfiles):
        folder = rng.choice(["", "", "a/", "b/", "a/c/"])
        paths.append(f"{folder}f{k}.tex")
    nmods = rng.randint(1, max_modules)
    modules = [GenModule(f"m{k}", rng.choice(paths)) for k in range(nmods)]
    for k, m in enumerate(modules):
        m.symbols = [f"s{k}x{j}" for j in range(rng.randint(0, 3))]

    bodies: dict[str, list[str]] = {p: [] for p in paths}
    for m in modules:
        stmts = []
        for _ in range(rng.randint(0, 3)):
            roll = rng.random()
            target = rng.choice(modules)
            if roll < 0.08:
                stmts.append(rf"\importmodule[{_relpath(m.file, 'ghost/nothing.tex', rng)}]{{{target.id}}}")
            elif roll < 0.16:
                where = _relpath(m.file, target.file, rng)
                stmts.append(rf"\importmodule[{where}]{{nosuch{rng.randint(0, 9)}}}")
            elif target.file == m.file and rng.random() < 0.5:
                stmts.append(rf"\importmodule{{{target.id}}}")
            else:
                stmts.append(rf"\importmodule[{_relpath(m.file, target.file, rng)}]{{{target.id}}}")
        for s in m.symbols:
            arity = rng.choice(["", "[1]", "[2]"])
            stmts.append(rf"\symdef{{{s}}}{arity}{{\mathrm{{{s}}}}}")
            if rng.random() < 0.6:
                words = " ".join(rng.choice(VOCAB + [w.capitalize() for w in VOCAB]) for _ in range(rng.randint(0, 6)))
                stmts.append(
                    rf"\begin{{definition}}[for={s}]" + "\n    " + words + "\n  " + r"\end{definition}"
                )
        for _ in range(rng.randint(1, 2)):
            stmts.insert(rng.randint(0, len(stmts)), "%cursor")
        bodies[m.file].append(
            rf"\begin{{module}}[id={m.id}]" + "\n" + "".join(f"  {s}\n" for s in stmts) + r"\end{module}" + "\n"
        )
    files = {}
    cursors = {}
    for p in paths:
        text = "".join(bodies[p]) or "plain text only\n"
        files[p] = text
        offs = []
        start = 0
        while (i := text.find("%cursor", start)) >= 0:
            offs.append(i)
            start = i + 1
        cursors[p] = offs
    keywords = [[rng.choice(VOCAB)] for _ in range(2)] + [rng.sample(VOCAB, 2)]
    return GenWorkspace(files, cursors, keywords)
