"""JSON Lines helpers and deterministic float serialization."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Tuple


class JsonlError(ValueError):
    """Malformed JSON Lines input; message carries the line number."""


def read_jsonl(path) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield (line_number, object) for each non-blank line, 1-based."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JsonlError(f"{path}: malformed JSON at line {lineno}: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise JsonlError(f"{path}: line {lineno} is not a JSON object")
            yield lineno, obj


def write_jsonl(path, records: Iterable[Dict[str, Any]]) -> int:
    """Write one object per line; returns the number of lines written."""
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def round_floats(obj: Any, sig: int = 6) -> Any:
    """Recursively cap floats at `sig` significant digits.

    Reports and JSONL emitted by the CLI pass through this so reruns are
    byte-identical and diffs stay readable.
    """
    if isinstance(obj, float):
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, sig) for v in obj]
    return obj


def dump_report(obj: Any, path=None, sig: int = 6) -> str:
    """Serialize a report deterministically; write to `path` when given."""
    text = json.dumps(round_floats(obj, sig), ensure_ascii=False, indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
