import gzip
from pathlib import Path

import pytest


def write_dump(directory, name, lines, gz=None):
    """Write a pagecounts file; gzip when the name ends in .gz unless told otherwise."""
    path = Path(directory) / name
    data = "".join(line if line.endswith("\n") else line + "\n" for line in lines).encode("utf-8")
    if gz is None:
        gz = name.endswith(".gz")
    if gz:
        with gzip.open(path, "wb") as fh:
            fh.write(data)
    else:
        path.write_bytes(data)
    return path


@pytest.fixture
def dump_dir(tmp_path):
    d = tmp_path / "dumps"
    d.mkdir()
    return d


ACCEPTANCE_LOG = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome and assert it."""
    def check(name, ok, detail=""):
        ACCEPTANCE_LOG.append((name, "PASS" if ok else "FAIL", detail))
        assert ok, f"{name}: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"[{status}] {name}" + (f" -- {detail}" if detail else ""))
