"""CSV/JSON helpers shared by loaders and report writers."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .models import ValidationError


def read_csv(path, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield ``(line_number, row)`` pairs after checking the header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ValidationError(f"missing columns: {', '.join(missing)}", path=path, line=1)
        for row in reader:
            if None in row:
                raise ValidationError("row has more fields than the header", path=path, line=reader.line_num)
            yield reader.line_num, {k: (v if v is not None else "") for k, v in row.items()}


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt(value) -> str:
    """Fixed six-decimal rendering with round-half-even; ``None`` renders empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        # float formatting rounds the exact binary value half-to-even
        out = f"{value:.6f}"
        return "0.000000" if out == "-0.000000" else out
    return str(value)


def json_value(value):
    if isinstance(value, float):
        return float(fmt(value))
    return value


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], *, manifest: str | None = None,
              preamble: Sequence[tuple[str, object]] = ()) -> Path:
    """Write a CSV, optionally prefixed by ``#`` comment lines.

    The first comment carries the manifest digest of the run that produced
    the file; further ``preamble`` pairs follow as ``#key,value`` lines.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        if manifest is not None:
            fh.write(f"# manifest_sha256={manifest}\n")
        for key, value in preamble:
            fh.write(f"#{key},{fmt(value)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path, payload, *, manifest: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if manifest is not None:
        payload = {"manifest_sha256": manifest, **payload}
    text = json.dumps(payload, indent=2, sort_keys=False, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_csv_output(path) -> list[dict[str, str]]:
    """Read back a CSV written by :func:`write_csv`, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
