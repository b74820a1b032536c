"""Workspace: a root directory, its ``*.tex`` files and ``flexitex.json``."""

from __future__ import annotations

import json
import os
import posixpath
from pathlib import Path

CONFIG_NAME = "flexitex.json"
CONFIG_ENV = "FLEXITEX_CONFIG"


class WorkspaceError(Exception):
    pass


def resolve_import(from_file: str, path: str) -> str:
    """Resolve an import path relative to the importing file's directory."""
    if not path.endswith(".tex"):
        path += ".tex"
    return posixpath.normpath(posixpath.join(posixpath.dirname(from_file), path))


class Workspace:
    def __init__(self, root: str | os.PathLike, config_path: str | os.PathLike | None = None):
        self.root = Path(root).resolve()
        if not self.root.is_dir():
            raise WorkspaceError(f"workspace root {root} is not a directory")
        self.overlay: dict[str, str] = {}
        if config_path is None:
            config_path = os.environ.get(CONFIG_ENV) or self.root / CONFIG_NAME
        self.config_path = Path(config_path)
        self.config = self._load_config()
        self.pattern = self.config.get("files", "**/*.tex")

    def _load_config(self) -> dict:
        if not self.config_path.is_file():
            return {}
        try:
            data = json.loads(self.config_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise WorkspaceError(f"cannot read {self.config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise WorkspaceError(f"{self.config_path}: top level must be an object")
        return data

    # paths are workspace-relative posix strings
    def rel(self, path: str | os.PathLike) -> str:
        p = Path(path)
        if not p.is_absolute():
            p = Path.cwd() / p
        return posixpath.normpath(os.path.relpath(p.resolve(), self.root).replace(os.sep, "/"))

    def abspath(self, file: str) -> Path:
        return self.root / file

    def files(self) -> list[str]:
        found = {self.rel(p) for p in self.root.glob(self.pattern) if p.is_file()}
        found.update(f for f in self.overlay if not f.startswith("../"))
        return sorted(found)

    def exists(self, file: str) -> bool:
        return file in self.overlay or self.abspath(file).is_file()

    def is_dir(self, file: str) -> bool:
        return self.abspath(file).is_dir()

    def read(self, file: str) -> str:
        if file in self.overlay:
            return self.overlay[file]
        try:
            return self.abspath(file).read_text(encoding="utf-8", errors="surrogateescape")
        except OSError as exc:
            raise WorkspaceError(f"cannot read {file}: {exc}") from exc

    def set_text(self, file: str, text: str) -> None:
        """Shadow a file with unsaved editor contents."""
        self.overlay[file] = text

    def write(self, file: str, text: str) -> None:
        path = self.abspath(file)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.overlay.pop(file, None)

    def resolve(self, from_file: str, path: str) -> str:
        return resolve_import(from_file, path)

    def listdir(self, directory: str) -> list[tuple[str, bool]]:
        """(name, is_dir) entries of a workspace-relative directory."""
        path = self.abspath(directory) if directory else self.root
        if not path.is_dir():
            return []
        return sorted((e.name, e.is_dir()) for e in path.iterdir())
