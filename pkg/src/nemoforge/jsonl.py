"""JSONL reading and writing with line-accurate error reporting."""

from __future__ import annotations

import json
import os
from typing import Any, Iterable, Iterator

from .errors import JsonlParseError


def read_records(path: str | os.PathLike) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, record) for each non-blank line of a JSONL file.

    Raises JsonlParseError naming the path and 1-based line number on the
    first malformed line.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                record = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise JsonlParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise JsonlParseError(path, line_no, "expected a JSON object")
            yield line_no, record


def dumps_record(record: dict) -> str:
    """Serialize one record to a canonical single-line JSON string."""
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


def write_records(path: str | os.PathLike, records: Iterable[dict]) -> int:
    """Write records as UTF-8 JSONL, one object per line. Returns the count."""
    path = os.fspath(path)
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record))
            fh.write("\n")
            count += 1
    return count


def append_record(path: str | os.PathLike, record: dict, fsync: bool = False) -> None:
    """Append one record to a JSONL file, optionally fsyncing for durability."""
    path = os.fspath(path)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(dumps_record(record))
        fh.write("\n")
        fh.flush()
        if fsync:
            os.fsync(fh.fileno())


def load_json_value(raw: str, path: str, line_no: int) -> Any:
    """Parse a JSON value with positional error context."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise JsonlParseError(path, line_no, f"invalid JSON: {exc.msg}") from exc
