"""File operation utilities."""

import csv
import io
import json
from pathlib import Path
from typing import Any


def canonical_json(data: Any) -> str:
    """Serialize with sorted keys and fixed indentation so equal data gives equal bytes."""
    return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def write_file(file_path: str | Path, content: str | bytes) -> Path:
    full_path = Path(file_path)
    tmp_path = full_path.with_name(full_path.name + ".tmp")
    try:
        full_path.parent.mkdir(parents=True, exist_ok=True)
        # Use atomic writes to avoid partially written outputs.
        if isinstance(content, bytes):
            with tmp_path.open("wb") as f:
                f.write(content)
        else:
            with tmp_path.open("w", encoding="utf-8", newline="\n") as f:
                f.write(content)
        tmp_path.replace(full_path)
    except OSError as e:
        tmp_path.unlink(missing_ok=True)
        raise OSError(f"Failed to write file {full_path}: {e}") from e
    return full_path


def write_json(file_path: str | Path, data: Any) -> Path:
    return write_file(file_path, canonical_json(data))


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def table_to_csv(header: list[str] | tuple[str, ...], rows) -> str:
    """Comma-separated table with a header row; floats keep full precision, ``None`` is blank."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([format_cell(value) for value in row] for row in rows)
    return buffer.getvalue()


def load_json_data(file_path: str | Path, raise_not_found: bool = True) -> dict[str, Any] | None:
    json_file = Path(file_path)
    if not json_file.exists():
        if raise_not_found:
            raise FileNotFoundError(f"File not found: {json_file}")
        return None

    with json_file.open("r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in {json_file}: {e}") from e
