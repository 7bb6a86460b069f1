"""Machine-readable report serialization.

Every command emits a list of flat records. Two encodings are supported
and must agree field-by-field:

* JSON: an array of objects, serialized canonically (sorted keys,
  two-space indent, trailing newline, shortest-roundtrip floats). The
  same records always produce the same bytes.
* CSV: a versioned comment line ``# systolab-csv v1 kind=<kind>``, the
  fixed header row for that record kind, then one row per record.
  Multi-valued ``flags`` cells are semicolon-joined.

The per-record JSON schemas live in SCHEMAS; ``array_schema`` wraps one
for a whole file.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping, Sequence

CSV_VERSION_LINE = "# systolab-csv v1"

# Fixed column orders. Changing any of these is a format break and must
# bump the version line above.
RECORD_KINDS: dict[str, tuple[str, ...]] = {
    "slice": ("xhat", "det", "sys1", "diameter", "s", "t", "loewner"),
    "cylinder": (
        "j",
        "volume",
        "area_m",
        "mass2_lower",
        "sys1_estimate",
        "diam1_bound",
        "psi_residual",
        "closedness_residual",
        "comass_residual",
        "flags",
    ),
    "freedom": ("j", "volume", "sys1_estimate", "sys2_lower", "ratio", "flags"),
    "t4": ("j", "volume4", "sys2_lower4", "ratio4", "flags"),
    "lp": (
        "j",
        "nx",
        "ny",
        "nz",
        "z_plane",
        "mass",
        "lower_bound",
        "gap",
        "pairing_lower",
        "reference_mass",
        "converged",
        "certificate_ok",
    ),
    "verify": ("number", "name", "passed", "detail"),
}

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_J = {"type": "integer", "minimum": 1}
_FLAGS = {"type": "array", "items": {"type": "string"}}
_BOOL = {"type": "boolean"}
_STR = {"type": "string"}

_FIELD_SCHEMAS: dict[str, dict[str, dict]] = {
    "slice": {
        "xhat": {"type": "number", "minimum": 0},
        "det": _POSITIVE,
        "sys1": _POSITIVE,
        "diameter": _POSITIVE,
        "s": _NUMBER,
        "t": _POSITIVE,
        "loewner": _POSITIVE,
    },
    "cylinder": {
        "j": _J,
        "volume": _POSITIVE,
        "area_m": _POSITIVE,
        "mass2_lower": _POSITIVE,
        "sys1_estimate": _POSITIVE,
        "diam1_bound": _POSITIVE,
        "psi_residual": {"type": "number", "minimum": 0},
        "closedness_residual": {"type": "number", "minimum": 0},
        "comass_residual": {"type": "number", "minimum": 0},
        "flags": _FLAGS,
    },
    "freedom": {
        "j": _J,
        "volume": _POSITIVE,
        "sys1_estimate": _POSITIVE,
        "sys2_lower": _POSITIVE,
        "ratio": _POSITIVE,
        "flags": _FLAGS,
    },
    "t4": {
        "j": _J,
        "volume4": _POSITIVE,
        "sys2_lower4": _POSITIVE,
        "ratio4": _POSITIVE,
        "flags": _FLAGS,
    },
    "lp": {
        "j": _J,
        "nx": {"type": "integer", "minimum": 1},
        "ny": {"type": "integer", "minimum": 1},
        "nz": {"type": "integer", "minimum": 1},
        "z_plane": {"type": "integer", "minimum": 0},
        "mass": _POSITIVE,
        "lower_bound": _NUMBER,
        "gap": _NUMBER,
        "pairing_lower": _NUMBER,
        "reference_mass": _POSITIVE,
        "converged": _BOOL,
        "certificate_ok": _BOOL,
    },
    "verify": {
        "number": {"type": "integer", "minimum": 1},
        "name": _STR,
        "passed": _BOOL,
        "detail": _STR,
    },
}

SCHEMAS: dict[str, dict] = {
    kind: {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"systolab {kind} record",
        "type": "object",
        "properties": _FIELD_SCHEMAS[kind],
        "required": list(columns),
        "additionalProperties": False,
    }
    for kind, columns in RECORD_KINDS.items()
}


def array_schema(kind: str) -> dict:
    """Schema for a whole report file: an array of records of one kind."""
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": f"systolab {kind} report",
        "type": "array",
        "items": SCHEMAS[kind],
    }


def _check_records(records: Sequence[Mapping], kind: str) -> tuple[str, ...]:
    if kind not in RECORD_KINDS:
        raise ValueError(f"unknown record kind {kind!r}")
    columns = RECORD_KINDS[kind]
    expected = set(columns)
    for idx, rec in enumerate(records):
        if set(rec.keys()) != expected:
            raise ValueError(
                f"record {idx} has fields {sorted(rec.keys())}, "
                f"expected exactly {sorted(expected)}"
            )
    return columns


def to_json(records: Sequence[Mapping], kind: str) -> str:
    """Canonical JSON for a record list: stable bytes for stable inputs."""
    columns = _check_records(records, kind)
    payload = [{c: rec[c] for c in columns} for rec in records]
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(records: Sequence[Mapping], kind: str) -> str:
    columns = _check_records(records, kind)
    buf = io.StringIO()
    buf.write(f"{CSV_VERSION_LINE} kind={kind}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_csv_cell(rec[c]) for c in columns])
    return buf.getvalue()


def _parse_cell(text: str, schema: dict):
    kind = schema["type"]
    if kind == "integer":
        return int(text)
    if kind == "number":
        return float(text)
    if kind == "boolean":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean cell {text!r}")
        return text == "true"
    if kind == "array":
        return [part for part in text.split(";") if part]
    return text


def from_csv(text: str, kind: str) -> list[dict]:
    """Parse a CSV report back into records (inverse of to_csv)."""
    if kind not in RECORD_KINDS:
        raise ValueError(f"unknown record kind {kind!r}")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CSV_VERSION_LINE):
        raise ValueError("missing systolab-csv version line")
    if f"kind={kind}" not in lines[0]:
        raise ValueError(f"version line {lines[0]!r} does not declare kind={kind}")
    reader = csv.reader(lines[1:])
    header = next(reader, None)
    columns = RECORD_KINDS[kind]
    if header is None or tuple(header) != columns:
        raise ValueError(f"header {header!r} does not match {columns}")
    fields = _FIELD_SCHEMAS[kind]
    out = []
    for row in reader:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
        out.append({c: _parse_cell(cell, fields[c]) for c, cell in zip(columns, row)})
    return out


def render(records: Sequence[Mapping], kind: str, fmt: str) -> str:
    if fmt == "json":
        return to_json(records, kind)
    if fmt == "csv":
        return to_csv(records, kind)
    raise ValueError(f"unknown format {fmt!r} (expected json or csv)")


def freedom_record(rep) -> dict:
    return {
        "j": rep.j,
        "volume": rep.volume,
        "sys1_estimate": rep.sys1_estimate,
        "sys2_lower": rep.sys2_lower,
        "ratio": rep.ratio,
        "flags": list(rep.flags),
    }


def t4_record(rep) -> dict:
    return {
        "j": rep.j,
        "volume4": rep.volume4,
        "sys2_lower4": rep.sys2_lower4,
        "ratio4": rep.ratio4,
        "flags": list(rep.flags),
    }
