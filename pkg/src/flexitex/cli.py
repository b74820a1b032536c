"""``flexitex`` command line.

Exit codes: 0 when everything went fine (warnings allowed), 1 when errors
were found in the documents, 2 for usage errors and tool failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from flexitex import build as buildmod
from flexitex.complete import complete_at
from flexitex.diagnostics import Diagnostic, line_col, validate
from flexitex.highlight import highlight, render_ansi
from flexitex.index.store import QueryError, Var, ide, parse_patterns, rdf, to_ntriples
from flexitex.registry import RegistryError
from flexitex.search import search_definitions
from flexitex.service import LanguageService
from flexitex.workspace import Workspace, WorkspaceError

log = logging.getLogger("flexitex")

EXIT_OK, EXIT_ERRORS, EXIT_FAILURE = 0, 1, 2


class CliError(Exception):
    pass


def _emit_json(data) -> None:
    json.dump(data, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")


def _service(args) -> LanguageService:
    return LanguageService(Workspace(args.root, args.config))


def _file(service: LanguageService, path: str) -> str:
    rel = service.workspace.rel(path)
    if rel.startswith("../"):
        raise CliError(f"{path} is outside the workspace {service.workspace.root}")
    if not service.workspace.exists(rel):
        raise CliError(f"no such file: {path}")
    return rel


def _format_diag(service: LanguageService, d: Diagnostic) -> str:
    file = d.span.file
    where = file
    if file and service.workspace.exists(file):
        line, col = line_col(service.workspace.read(file), d.span.start)
        where = f"{file}:{line}:{col}"
    return f"{where}: {d.severity}: {d.message} [{d.code}]"


def _term_json(term):
    return term.value


# ----------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    service = _service(args)
    file = _file(service, args.file)
    doc = service.document(file)
    if args.json:
        _emit_json({"file": file, "ast": doc.root.to_dict(), "diagnostics": [d.to_dict() for d in doc.diagnostics]})
    else:
        stack = [(doc.root, 0)]
        while stack:
            node, depth = stack.pop()
            label = node.kind
            if node.name:
                label += f" \\{node.name}"
            if node.delimiter:
                label += f" {node.delimiter}"
            if node.text:
                label += f" {node.text!r}"
            print(f"{'  ' * depth}{label} [{node.span.start},{node.span.end})")
            stack.extend((c, depth + 1) for c in reversed(node.children))
        for d in doc.diagnostics:
            print(_format_diag(service, d), file=sys.stderr)
    return EXIT_ERRORS if any(d.severity == "error" for d in doc.diagnostics) else EXIT_OK


def cmd_highlight(args) -> int:
    service = _service(args)
    file = _file(service, args.file)
    doc = service.document(file)
    spans = highlight(doc, service.registry)
    if args.json:
        _emit_json([h.to_dict() for h in spans])
    elif args.ansi:
        sys.stdout.write(render_ansi(doc.source, spans))
    else:
        for h in spans:
            text = doc.source[h.span.start : h.span.end]
            print(f"{h.span.start}-{h.span.end}\t{h.description}\t{text}")
    return EXIT_OK


def _lint_targets(service: LanguageService, paths: list[str]) -> list[str]:
    if not paths:
        return service.workspace.files()
    files = []
    every = service.workspace.files()
    for p in paths:
        rel = service.workspace.rel(p)
        if Path(p).is_dir():
            prefix = "" if rel == "." else rel.rstrip("/") + "/"
            files.extend(f for f in every if f.startswith(prefix))
        else:
            files.append(_file(service, p))
    return sorted(set(files))


def cmd_lint(args) -> int:
    service = _service(args)
    found: list[Diagnostic] = []
    for file in _lint_targets(service, args.paths):
        found.extend(validate(service, file))
    if args.json:
        _emit_json([d.to_dict() for d in found])
    for d in found:
        print(_format_diag(service, d), file=sys.stderr)
    if not args.json:
        errors = sum(d.severity == "error" for d in found)
        warnings = sum(d.severity == "warning" for d in found)
        print(f"{errors} error(s), {warnings} warning(s)")
    return EXIT_ERRORS if any(d.severity == "error" for d in found) else EXIT_OK


def cmd_complete(args) -> int:
    service = _service(args)
    file = _file(service, args.file)
    try:
        items = complete_at(service, file, args.offset, args.prefix)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.json:
        _emit_json([i.to_dict() for i in items])
    else:
        for i in items:
            detail = f"\t{i.detail}" if i.detail else ""
            print(f"{i.kind}\t{i.label}{detail}")
    return EXIT_OK


def cmd_index(args) -> int:
    service = _service(args)
    files = _lint_targets(service, args.paths)
    report = []
    for file in files:
        root = service.get_index(file)
        report.append({"file": file, "root": root.value, "triples": len(service.store.by_file[file])})
    if args.json:
        _emit_json({"files": report, "total": len(service.store)})
    else:
        for r in report:
            print(f"{r['file']}\t{r['triples']} triples")
        print(f"total\t{len(service.store)} triples")
    return EXIT_OK


ROOT_ALIAS = "<root>"


def cmd_query(args) -> int:
    service = _service(args)
    if args.q is not None:
        text = args.q
    elif args.pattern_file:
        text = sys.stdin.read() if args.pattern_file == "-" else Path(args.pattern_file).read_text()
    else:
        raise CliError("query needs -q TEXT or a pattern file")
    if args.file:
        files = [_file(service, args.file)]
        for f in files:
            service.get_index(f)
        patterns = parse_patterns(text, aliases={ROOT_ALIAS: service.store.roots[files[0]]})
    else:
        service.index_all()
        root_var = Var("_root")
        patterns = parse_patterns(text, aliases={ROOT_ALIAS: root_var})
        if any(root_var in p for p in patterns):
            patterns.insert(0, (root_var, rdf("type"), ide("Document")))
    rows = service.store.query(patterns)
    out = [{k: _term_json(v) for k, v in sorted(row.items()) if not k.startswith("_")} for row in rows]
    # bindings are JSON whether or not --json was given
    _emit_json(out)
    return EXIT_OK


def cmd_export(args) -> int:
    service = _service(args)
    file = _file(service, args.file)
    service.get_index(file)
    sys.stdout.write(to_ntriples(service.store.by_file[file]))
    return EXIT_OK


def cmd_search(args) -> int:
    service = _service(args)
    try:
        hits = search_definitions(service, args.keywords)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.json:
        _emit_json([h.to_dict() for h in hits])
    else:
        for h in hits:
            line, _ = line_col(service.workspace.read(h.file), h.span.start)
            title = f" ({h.title})" if h.title else ""
            print(f"{h.file}:{line}\t{h.definiendum}{title}\tscore={h.score}\t{h.snippet}")
    return EXIT_OK


def cmd_build(args) -> int:
    service = _service(args)
    file = _file(service, args.file)
    config = buildmod.BuildConfig(service.workspace.config)
    source = str(service.workspace.abspath(file))

    def once() -> int:
        doc = service.document(file)
        workflow = buildmod.select_workflow(args.target, doc, config)
        plan = buildmod.plan(workflow, source, config.programs)
        if args.dry_run:
            if args.json:
                _emit_json({"workflow": list(workflow.steps), "plan": plan.to_dict()})
            else:
                print("workflow: " + " -> ".join(workflow.steps))
                for line in plan.describe():
                    print(line)
            return EXIT_OK
        result = buildmod.execute(
            plan,
            doc.source,
            out_dir=args.out_dir,
            keep_temps=args.keep_temps,
            diagnostics_file=file,
        )
        if args.json:
            _emit_json(
                {
                    "artifacts": result.artifacts,
                    "steps": [{"program": s.program, "exit": s.exit_code} for s in result.steps],
                    "diagnostics": [d.to_dict() for d in result.diagnostics],
                    "workdir": result.workdir,
                }
            )
        else:
            for s in result.steps:
                print(f"{s.program}: exit {s.exit_code}")
            for a in result.artifacts:
                print(f"artifact: {a}")
            if result.workdir:
                print(f"kept temporary files in {result.workdir}")
        for d in result.diagnostics:
            print(_format_diag(service, d), file=sys.stderr)
        return EXIT_OK if result.ok else EXIT_ERRORS

    if not args.watch:
        return once()
    try:
        buildmod.watch(
            lambda: buildmod.file_digest(source),
            once,
            debounce=args.debounce / 1000.0,
        )
    except KeyboardInterrupt:
        pass
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--root", default=".", help="workspace root (default: current directory)")
    common.add_argument("--config", default=None, help="path to flexitex.json (overrides FLEXITEX_CONFIG)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="flexitex", description="Language tools for sTeX documents.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("parse", parents=[common], help="print the syntax tree of a file")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("highlight", parents=[common], help="semantic highlighting spans")
    p.add_argument("file")
    p.add_argument("--ansi", action="store_true", help="print the file with terminal colors")
    p.set_defaults(func=cmd_highlight)

    p = sub.add_parser("lint", parents=[common], help="report diagnostics")
    p.add_argument("paths", nargs="*", help="files or directories (default: whole workspace)")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("complete", parents=[common], help="completion candidates at an offset")
    p.add_argument("file")
    p.add_argument("--offset", type=int, required=True, help="character offset of the cursor")
    p.add_argument("--prefix", default=None, help="override the prefix taken from the text")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("index", parents=[common], help="index files and report triple counts")
    p.add_argument("paths", nargs="*")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", parents=[common], help="run a conjunctive triple-pattern query")
    p.add_argument("pattern_file", nargs="?", help="file with patterns ('-' for stdin)")
    p.add_argument("-q", help='patterns inline, e.g. "<root> IDE:hasModule ?y; ?y rdf:id ?m"')
    p.add_argument("--file", help="bind <root> to this file's index root (default: every document)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", parents=[common], help="dump a file's index")
    p.add_argument("--ntriples", action="store_true", required=True, help="N-Triples output")
    p.add_argument("file")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("search", parents=[common], help="keyword search over definitions")
    p.add_argument("keywords", nargs="+")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("build", parents=[common], help="plan and run a build")
    p.add_argument("file")
    p.add_argument("--target", choices=buildmod.TARGETS, default="pdf")
    p.add_argument("--dry-run", action="store_true", help="print the execution plan only")
    p.add_argument("--keep-temps", action="store_true")
    p.add_argument("--out-dir", default=None, help="where artifacts go (default: next to the source)")
    p.add_argument("--watch", action="store_true", help="rebuild when the file changes")
    p.add_argument("--debounce", type=int, default=500, help="quiet period in ms before rebuilding")
    p.set_defaults(func=cmd_build)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_FAILURE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (CliError, WorkspaceError, QueryError, buildmod.BuildError, RegistryError, OSError) as exc:
        print(f"flexitex: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
