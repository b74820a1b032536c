"""Build pipelines: program capabilities, execution plans, execution.

Each program declares how it can read its input (``stdin``, ``file``) and
produce its output (``stdout``, ``file``, ``multi-file``).  Between two
adjacent steps the planner picks

* ``pipe``      when the producer writes stdout and the consumer reads stdin,
* ``workdir``   when the producer leaves several files behind and the
                consumer reads files (both run in one working directory),
* ``temp-file`` when the consumer reads a file and the producer can
                write one or its stdout can be captured into one.

Anything else cannot be connected and is a planning error.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from flexitex.diagnostics import SEVERITIES, Diagnostic, SourceSpan
from flexitex.syntax import COMMAND, Document

log = logging.getLogger(__name__)

INPUT_CAPS = frozenset({"stdin", "file"})
OUTPUT_CAPS = frozenset({"stdout", "file", "multi-file"})
TARGETS = ("pdf", "xhtml", "omdoc")
BIBLIOGRAPHY_COMMANDS = frozenset({"bibliography", "addbibresource"})


class BuildError(Exception):
    pass


class PlanError(BuildError):
    pass


@dataclass(frozen=True)
class OutputRule:
    """Regex over a step's output; named groups ``line``, ``message``, ``file``."""

    pattern: str
    severity: str = "error"

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise BuildError(f"unknown severity {self.severity!r} in output rule")
        try:
            re.compile(self.pattern)
        except re.error as exc:
            raise BuildError(f"bad output rule pattern {self.pattern!r}: {exc}") from exc


@dataclass(frozen=True)
class ProgramHandler:
    id: str
    command: tuple[str, ...]
    input_caps: frozenset
    output_caps: frozenset
    output_parser: tuple[OutputRule, ...] = ()
    suffix: str = ""
    # programs like pdflatex always compile the original source and only
    # pick up side files from earlier steps in the working directory
    reads_source: bool = False

    def __post_init__(self):
        if not self.command:
            raise BuildError(f"program {self.id!r} has an empty command")
        if not self.input_caps or not self.input_caps <= INPUT_CAPS:
            raise BuildError(f"program {self.id!r}: input must be a non-empty subset of {sorted(INPUT_CAPS)}")
        if not self.output_caps or not self.output_caps <= OUTPUT_CAPS:
            raise BuildError(
                f"program {self.id!r}: output must be a non-empty subset of {sorted(OUTPUT_CAPS)}"
            )

    @classmethod
    def from_dict(cls, data: dict) -> "ProgramHandler":
        try:
            command = data["command"]
            if isinstance(command, str):
                command = command.split()
            return cls(
                id=data["id"],
                command=tuple(command),
                input_caps=frozenset(data["input"]),
                output_caps=frozenset(data["output"]),
                output_parser=tuple(OutputRule(**r) for r in data.get("parsers", ())),
                suffix=data.get("suffix", ""),
                reads_source=bool(data.get("reads_source", False)),
            )
        except (KeyError, TypeError) as exc:
            raise BuildError(f"invalid program declaration {data!r}: {exc}") from exc

    def parse_output(self, text: str, source: str, file: str) -> list[Diagnostic]:
        found = []
        for rule in self.output_parser:
            for m in re.finditer(rule.pattern, text, re.MULTILINE):
                groups = m.groupdict()
                message = (groups.get("message") or m.group(0)).strip() or m.group(0)
                where = groups.get("file")
                span = SourceSpan(0, 0, where or file)
                if groups.get("line") and (not where or Path(where).name == Path(file).name):
                    span = _line_span(source, int(groups["line"]), file)
                found.append(Diagnostic(rule.severity, f"{self.id}: {message}", span, "build-output"))
        return found


def _line_span(source: str, line: int, file: str) -> SourceSpan:
    lines = source.splitlines(keepends=True)
    if not 1 <= line <= len(lines):
        return SourceSpan(0, 0, file)
    start = sum(len(x) for x in lines[: line - 1])
    return SourceSpan(start, start + len(lines[line - 1].rstrip("\r\n")), file)


_TEX_ERRORS = (
    OutputRule(r"^(?P<file>[^:\n]+\.tex):(?P<line>\d+): (?P<message>.*)$", "error"),
    OutputRule(r"^LaTeX Warning: (?P<message>.*?)(?: on input line (?P<line>\d+))?\.?$", "warning"),
)

DEFAULT_PROGRAMS = {
    p.id: p
    for p in (
        ProgramHandler(
            "pdflatex",
            ("pdflatex", "-interaction=nonstopmode", "-file-line-error", "-jobname={jobname}", "{in}"),
            frozenset({"file"}),
            frozenset({"multi-file"}),
            _TEX_ERRORS,
            ".pdf",
            reads_source=True,
        ),
        ProgramHandler(
            "bibtex",
            ("bibtex", "{jobname}"),
            frozenset({"file"}),
            frozenset({"multi-file"}),
            (OutputRule(r"^Warning--(?P<message>.*)$", "warning"),),
            ".bbl",
        ),
        ProgramHandler(
            "latexml",
            ("latexml", "{in}"),
            frozenset({"file"}),
            frozenset({"stdout"}),
            (OutputRule(r"^Error:(?P<message>.*)$", "error"), OutputRule(r"^Warning:(?P<message>.*)$", "warning")),
            ".xml",
        ),
        ProgramHandler(
            "latexmlpost",
            ("latexmlpost", "--destination={out}", "{in}"),
            frozenset({"file"}),
            frozenset({"file"}),
            (OutputRule(r"^Error:(?P<message>.*)$", "error"),),
            ".xhtml",
        ),
        ProgramHandler(
            "xslt",
            ("xsltproc", "omdoc.xsl", "{in}"),
            frozenset({"file"}),
            frozenset({"stdout"}),
            (),
            ".omdoc",
        ),
    )
}

DEFAULT_WORKFLOWS = {
    "pdf": ("pdflatex",),
    "pdf-bibtex": ("pdflatex", "bibtex", "pdflatex"),
    "xhtml": ("latexml", "latexmlpost"),
    "omdoc": ("latexml", "latexmlpost", "xslt"),
}


@dataclass(frozen=True)
class Workflow:
    target: str
    steps: tuple[str, ...]

    def __post_init__(self):
        if not self.steps:
            raise BuildError(f"workflow for {self.target!r} has no steps")


class BuildConfig:
    """Programs and workflows: the defaults overlaid with the ``flexitex.json`` entries."""

    def __init__(self, config: dict | None = None):
        config = config or {}
        self.programs = dict(DEFAULT_PROGRAMS)
        for entry in config.get("programs", []):
            program = ProgramHandler.from_dict(entry)
            self.programs[program.id] = program
        self.workflows = dict(DEFAULT_WORKFLOWS)
        for name, steps in config.get("workflows", {}).items():
            self.workflows[name] = tuple(steps)
        for name, steps in self.workflows.items():
            missing = [s for s in steps if s not in self.programs]
            if missing:
                raise BuildError(f"workflow {name!r} uses unknown programs {missing}")


def has_bibliography(doc: Document) -> bool:
    return any(n.kind == COMMAND and n.name in BIBLIOGRAPHY_COMMANDS for n in doc.root.walk())


def select_workflow(target: str, doc: Document, config: BuildConfig | None = None) -> Workflow:
    config = config or BuildConfig()
    if target not in TARGETS:
        raise BuildError(f"unknown target {target!r} (expected one of {', '.join(TARGETS)})")
    key = "pdf-bibtex" if target == "pdf" and has_bibliography(doc) else target
    return Workflow(target, config.workflows[key])


# ------------------------------------------------------------------ planning


@dataclass(frozen=True)
class Binding:
    kind: str  # pipe | temp-file | workdir
    path: str | None = None


@dataclass(frozen=True)
class PlanStep:
    program: ProgramHandler
    input_mode: str  # stdin | file
    input_path: str | None  # relative to the working directory, or the source
    output_mode: str  # stdout | file | multi-file
    output_path: str | None


@dataclass
class ExecutionPlan:
    source: str
    jobname: str
    steps: list[PlanStep]
    bindings: list[Binding]
    source_binding: str  # stdin | file
    artifact: str

    def describe(self) -> list[str]:
        lines = [f"source {self.source} -> {self.steps[0].program.id} via {self.source_binding}"]
        for k, b in enumerate(self.bindings):
            a, c = self.steps[k].program.id, self.steps[k + 1].program.id
            lines.append(f"{a} -> {c}: {b.kind}" + (f" ({b.path})" if b.path else ""))
        lines.append(f"artifact {self.artifact}")
        return lines

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "source_binding": self.source_binding,
            "steps": [
                {
                    "program": s.program.id,
                    "input": s.input_mode,
                    "output": s.output_mode,
                    "command": list(_command(s, self.jobname, "<workdir>")),
                }
                for s in self.steps
            ],
            "bindings": [{"kind": b.kind, "path": b.path} for b in self.bindings],
            "artifact": self.artifact,
        }


def choose_binding(producer: ProgramHandler, consumer: ProgramHandler) -> str | None:
    """The binding kind for one adjacent pair, or None when none is legal."""
    out, inp = producer.output_caps, consumer.input_caps
    if "stdout" in out and "stdin" in inp:
        return "pipe"
    if "file" in inp:
        if "multi-file" in out:
            return "workdir"
        if out & {"stdout", "file"}:
            return "temp-file"
    return None


def plan(workflow: Workflow, source_file: str, programs: dict[str, ProgramHandler]) -> ExecutionPlan:
    try:
        handlers = [programs[s] for s in workflow.steps]
    except KeyError as exc:
        raise PlanError(f"unknown program {exc.args[0]!r}") from None
    jobname = Path(source_file).stem or "job"
    kinds = []
    for a, b in zip(handlers, handlers[1:]):
        kind = choose_binding(a, b)
        if kind is None:
            raise PlanError(
                f"cannot connect {a.id!r} (output: {', '.join(sorted(a.output_caps))}) "
                f"to {b.id!r} (input: {', '.join(sorted(b.input_caps))})"
            )
        kinds.append(kind)

    # input side of every step
    in_modes = ["file" if "file" in handlers[0].input_caps else "stdin"]
    in_modes += ["stdin" if k == "pipe" else "file" for k in kinds]
    # output side: what the binding needs, or the best artifact form at the end
    out_modes = []
    for k, kind in enumerate(kinds + [None]):
        caps = handlers[k].output_caps
        if kind == "pipe":
            out_modes.append("stdout")
        elif kind == "workdir":
            out_modes.append("multi-file")
        else:
            out_modes.append(next(m for m in ("file", "stdout", "multi-file") if m in caps))

    bindings: list[Binding] = []
    out_paths: list[str | None] = []
    for k, h in enumerate(handlers):
        last = k == len(handlers) - 1
        if out_modes[k] == "multi-file":
            out_paths.append(f"{jobname}{h.suffix}")
        elif last:
            out_paths.append(f"{jobname}{h.suffix or '.out'}")
        elif kinds[k] == "temp-file":
            out_paths.append(f"{jobname}.step{k + 1}{h.suffix or '.tmp'}")
        else:
            out_paths.append(None)
    for k, kind in enumerate(kinds):
        bindings.append(Binding(kind, out_paths[k] if kind != "pipe" else None))

    steps = []
    for k, h in enumerate(handlers):
        if h.reads_source or k == 0:
            in_path = source_file if in_modes[k] == "file" else None
        elif in_modes[k] == "file":
            in_path = out_paths[k - 1]
        else:
            in_path = None
        steps.append(PlanStep(h, in_modes[k], in_path, out_modes[k], out_paths[k]))
    return ExecutionPlan(source_file, jobname, steps, bindings, in_modes[0], out_paths[-1])


# ----------------------------------------------------------------- execution


@dataclass
class StepResult:
    program: str
    exit_code: int
    command: list[str]


@dataclass
class BuildResult:
    artifacts: list[str] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    steps: list[StepResult] = field(default_factory=list)
    workdir: str | None = None

    @property
    def ok(self) -> bool:
        return all(s.exit_code == 0 for s in self.steps) and not any(
            d.severity == "error" for d in self.diagnostics
        )


def _command(step: PlanStep, jobname: str, workdir: str) -> list[str]:
    def where(path):
        if path is None:
            return "-"
        return path if os.path.isabs(path) else os.path.join(workdir, path)

    values = {
        "in": where(step.input_path) if step.input_mode == "file" else "-",
        "out": workdir if step.output_mode == "multi-file" else (
            where(step.output_path) if step.output_mode == "file" else "-"
        ),
        "jobname": jobname,
        "workdir": workdir,
    }
    return [part.format(**values) for part in step.program.command]


def execute(
    plan_: ExecutionPlan,
    source_text: str | None = None,
    out_dir: str | None = None,
    keep_temps: bool = False,
    env: dict | None = None,
    diagnostics_file: str | None = None,
) -> BuildResult:
    """Run the steps in order and collect diagnostics from their output.

    Stops after the first step that exits nonzero.  The working directory
    is removed afterwards unless ``keep_temps`` is set.
    """
    source_path = Path(plan_.source)
    if source_text is None:
        source_text = source_path.read_text(encoding="utf-8", errors="replace")
    file = diagnostics_file or plan_.source
    out_dir = Path(out_dir) if out_dir else source_path.resolve().parent
    workdir = tempfile.mkdtemp(prefix=f"flexitex-{plan_.jobname}-")
    result = BuildResult(workdir=workdir if keep_temps else None)
    data: bytes | None = None
    if plan_.source_binding == "stdin":
        data = source_path.read_bytes()
    try:
        for k, step in enumerate(plan_.steps):
            step = _absolute_source(step, plan_.source)
            cmd = _command(step, plan_.jobname, workdir)
            log.info("running %s", " ".join(cmd))
            try:
                proc = subprocess.run(
                    cmd,
                    cwd=workdir,
                    input=data if step.input_mode == "stdin" else None,
                    stdin=None if step.input_mode == "stdin" else subprocess.DEVNULL,
                    capture_output=True,
                    env=None if env is None else {**os.environ, **env},
                )
            except OSError as exc:
                raise BuildError(f"cannot start {step.program.id!r} ({cmd[0]}): {exc}") from exc
            result.steps.append(StepResult(step.program.id, proc.returncode, cmd))
            report = proc.stderr.decode("utf-8", "replace")
            if step.output_mode != "stdout":
                report = proc.stdout.decode("utf-8", "replace") + report
            result.diagnostics.extend(step.program.parse_output(report, source_text, file))
            if proc.returncode != 0:
                result.diagnostics.append(
                    Diagnostic(
                        "error",
                        f"{step.program.id} exited with status {proc.returncode}",
                        SourceSpan(0, 0, file),
                        "build-failure",
                    )
                )
                break
            data = proc.stdout if step.output_mode == "stdout" else None
            last = k == len(plan_.steps) - 1
            if step.output_mode == "stdout" and (last or plan_.bindings[k].kind == "temp-file"):
                Path(workdir, step.output_path).write_bytes(proc.stdout)
        else:
            final = Path(workdir, plan_.artifact)
            if final.exists():
                out_dir.mkdir(parents=True, exist_ok=True)
                target = out_dir / plan_.artifact
                shutil.copyfile(final, target)
                result.artifacts.append(str(target))
    finally:
        if not keep_temps:
            shutil.rmtree(workdir, ignore_errors=True)
    return result


def _absolute_source(step: PlanStep, source: str) -> PlanStep:
    if step.input_path == source:
        return PlanStep(
            step.program, step.input_mode, str(Path(source).resolve()), step.output_mode, step.output_path
        )
    return step


# --------------------------------------------------------------------- watch


def file_digest(path: str) -> str | None:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return None


def watch(
    state: Callable[[], object],
    run: Callable[[], object],
    debounce: float = 0.5,
    poll: float = 0.1,
    sleep: Callable[[float], None] = time.sleep,
    clock: Callable[[], float] = time.monotonic,
    should_stop: Callable[[], bool] = lambda: False,
) -> int:
    """Run once, then again whenever ``state()`` changes and stays put for ``debounce`` seconds.

    Returns the number of runs.  ``sleep``/``clock``/``should_stop`` exist
    so tests can drive the loop without real time passing.
    """
    last = state()
    run()
    runs = 1
    changed_at = None
    while not should_stop():
        sleep(poll)
        current = state()
        if current != last:
            last = current
            changed_at = clock()
        elif changed_at is not None and clock() - changed_at >= debounce:
            run()
            runs += 1
            changed_at = None
    return runs
