import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flexitex.service import LanguageService  # noqa: E402
from flexitex.workspace import Workspace  # noqa: E402


def write_files(root: Path, files: dict) -> None:
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


@pytest.fixture
def make_service(tmp_path):
    """Write ``files`` under a fresh root and return a service over it."""
    counter = {"n": 0}

    def make(files: dict, registry=None, config: str | None = None):
        counter["n"] += 1
        root = tmp_path / f"ws{counter['n']}"
        root.mkdir()
        write_files(root, files)
        if config is not None:
            (root / "flexitex.json").write_text(config)
        return LanguageService(Workspace(root), registry)

    return make


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])
