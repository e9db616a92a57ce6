"""Reading and writing decision traces as JSONL (canonical) and CSV (import).

Canonical file layout: UTF-8 JSONL whose first line is a header object
``{"schema": "trace/1", "alphabet": [...]}``; every following line is one
record using the DecisionRecord field names verbatim. Optional fields are
omitted when absent, unknown fields are preserved, and
``read_jsonl(write_jsonl(t))`` reproduces ``t`` field-for-field.
"""

from __future__ import annotations

import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, BinaryIO, NamedTuple, Optional, Sequence, Union

from .records import (
    FIELDS,
    PARTITION_KEYS,
    POLICIES,
    RISK_LEVELS,
    Trace,
    TraceValidationError,
    validate_trace,
)

SCHEMA_VERSION = "trace/1"

_REQUIRED_FIELDS = ("case_id", "ground_truth", "human_initial", "ai_prediction", "human_final")
_LABEL_FIELDS = ("ground_truth", "human_initial", "ai_prediction", "human_final")
_BOOL_FIELDS = ("rollback", "escalated", "feedback_observed")
_STRING_FIELDS = ("risk", "policy") + PARTITION_KEYS

Source = Union[bytes, str, Path, BinaryIO]


class IOIssue(NamedTuple):
    line: int  # 1-based line (JSONL) or row (CSV) in the input
    reason: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.reason}"


class TraceIOError(ValueError):
    """Raised on malformed trace files; carries per-line issues."""

    def __init__(self, issues: Sequence[IOIssue]):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues[:20])
        more = f" (+{len(self.issues) - 20} more)" if len(self.issues) > 20 else ""
        super().__init__(f"{len(self.issues)} input issue(s): {lines}{more}")


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _parse_header(line: bytes, lineno: int) -> tuple[list[str], dict[str, Any]]:
    try:
        header = json.loads(line)
    except ValueError as e:
        raise TraceIOError([IOIssue(lineno, f"malformed header: {e}")]) from None
    if not isinstance(header, dict) or "schema" not in header:
        raise TraceIOError([IOIssue(lineno, "missing header: first line must declare a schema")])
    if header["schema"] != SCHEMA_VERSION:
        raise TraceIOError([IOIssue(lineno, f"unknown schema version {header['schema']!r}; expected {SCHEMA_VERSION!r}")])
    alphabet = header.get("alphabet")
    if not isinstance(alphabet, list) or not alphabet:
        raise TraceIOError([IOIssue(lineno, "header must declare a non-empty alphabet list")])
    metadata = {k: v for k, v in header.items() if k not in ("schema", "alphabet")}
    return [str(a) for a in alphabet], metadata


def read_jsonl(source: Source) -> tuple[list[dict[str, Any]], list[str], dict[str, Any]]:
    """Parse a JSONL trace file into (raw records, alphabet, metadata).

    Records come back in file order as plain mappings, ready for
    :func:`teamtrace.records.validate_trace`. Malformed lines are collected and
    raised together with their 1-based line numbers.
    """
    data = _read_bytes(source)
    if not data.strip():
        raise TraceIOError([IOIssue(1, "missing header: file is empty")])
    lines = data.split(b"\n")
    if lines and not lines[-1].strip():
        lines.pop()
    alphabet, metadata = _parse_header(lines[0], 1)

    records: list[dict[str, Any]] = []
    issues: list[IOIssue] = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            issues.append(IOIssue(i, "malformed line: blank"))
            continue
        try:
            obj = json.loads(line)
        except ValueError as e:
            issues.append(IOIssue(i, f"malformed line: {e}"))
            continue
        if not isinstance(obj, dict):
            issues.append(IOIssue(i, "malformed line: record must be a JSON object"))
            continue
        records.append(obj)
    if issues:
        raise TraceIOError(issues)
    return records, alphabet, metadata


def write_jsonl(trace: Trace) -> bytes:
    """Serialize a trace to canonical JSONL bytes.

    Absent optional fields and false booleans are omitted; unknown fields from
    ingestion are written back. Output is deterministic for equal traces.
    """
    header: dict[str, Any] = {"schema": SCHEMA_VERSION, "alphabet": sorted(trace.alphabet)}
    for k, v in trace.metadata.items():
        if k not in ("schema", "alphabet"):
            header[k] = v
    out = [json.dumps(header, separators=(",", ":"))]
    cols = {f: trace.column(f) for f in FIELDS}
    for i in range(len(trace)):
        obj: dict[str, Any] = {}
        for f in FIELDS[:-1]:  # extra handled below
            v = cols[f][i]
            if v is None or v is False:
                continue
            obj[f] = v
        extra = cols["extra"][i]
        if extra:
            obj.update(extra)
        out.append(json.dumps(obj, separators=(",", ":")))
    return ("\n".join(out) + "\n").encode("utf-8")


def _parse_timestamp_cell(cell: str) -> int:
    try:
        return int(cell)
    except ValueError:
        pass
    text = cell.replace("Z", "+00:00") if cell.endswith("Z") else cell
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


def read_csv(
    source: Source,
    mapping: dict[str, str],
    *,
    alphabet: Optional[Sequence[str]] = None,
) -> tuple[list[dict[str, Any]], list[str], dict[str, Any]]:
    """Parse a CSV export into (raw records, alphabet, metadata).

    ``mapping`` assigns trace field names to CSV column names and must cover
    every required field. Booleans are encoded true/false, timestamps as
    integer epoch-milliseconds or RFC 3339 strings. The alphabet may be given
    explicitly (or under a reserved "alphabet" mapping key); otherwise it is
    inferred from the labels present. Row numbers in errors count the header
    as row 1.
    """
    import csv

    mapping = dict(mapping)
    declared = mapping.pop("alphabet", None)
    if alphabet is None and declared is not None:
        if not isinstance(declared, list):
            raise TraceIOError([IOIssue(1, "mapping key 'alphabet' must be a list of labels")])
        alphabet = [str(a) for a in declared]

    unknown = sorted(set(mapping) - set(FIELDS[:-1]))
    if unknown:
        raise TraceIOError([IOIssue(1, f"mapping refers to unknown trace field(s): {', '.join(unknown)}")])
    missing = [f for f in _REQUIRED_FIELDS if f not in mapping]
    if missing:
        raise TraceIOError([IOIssue(1, f"unmapped required field(s): {', '.join(missing)}")])

    text = _read_bytes(source).decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        columns = next(reader)
    except StopIteration:
        raise TraceIOError([IOIssue(1, "missing header row")]) from None
    col_index = {name: i for i, name in enumerate(columns)}
    absent = sorted(c for c in mapping.values() if c not in col_index)
    if absent:
        raise TraceIOError([IOIssue(1, f"mapped column(s) not in CSV header: {', '.join(absent)}")])
    mapped_cols = set(mapping.values())
    extra_cols = [c for c in columns if c not in mapped_cols]

    records: list[dict[str, Any]] = []
    issues: list[IOIssue] = []
    for rowno, row in enumerate(reader, start=2):
        rec: dict[str, Any] = {}
        for field, colname in mapping.items():
            idx = col_index[colname]
            cell = row[idx] if idx < len(row) else ""
            if cell == "":
                continue
            try:
                if field == "confidence":
                    rec[field] = float(cell)
                elif field in ("t_ai_shown", "t_final"):
                    rec[field] = _parse_timestamp_cell(cell)
                elif field in _BOOL_FIELDS:
                    if cell == "true":
                        rec[field] = True
                    elif cell == "false":
                        rec[field] = False
                    else:
                        raise ValueError("boolean cells must be 'true' or 'false'")
                else:
                    rec[field] = cell
            except ValueError as e:
                issues.append(IOIssue(rowno, f"column {colname!r}: unparseable cell {cell!r} for {field}: {e}"))
        for colname in extra_cols:
            idx = col_index[colname]
            cell = row[idx] if idx < len(row) else ""
            if cell != "":
                rec[colname] = cell
        records.append(rec)
    if issues:
        raise TraceIOError(issues)

    if alphabet is None:
        seen: set[str] = set()
        for rec in records:
            for f in _LABEL_FIELDS:
                v = rec.get(f)
                if v is not None:
                    seen.add(str(v))
        alphabet = sorted(seen)
    return records, list(alphabet), {}


def load_trace(source: Source) -> Trace:
    """Read and validate a canonical JSONL trace.

    Large well-formed files take a vectorized bulk path; anything irregular
    falls back to the row-by-row reference path, so diagnostics and results are
    identical either way.
    """
    data = _read_bytes(source)
    try:
        return _bulk_load(data)
    except _BulkFallback:
        records, alphabet, metadata = read_jsonl(data)
        return validate_trace(records, alphabet, metadata=metadata)


class _BulkFallback(Exception):
    pass


def _bulk_load(data: bytes) -> Trace:
    if not data.strip():
        raise _BulkFallback
    newline = data.find(b"\n")
    if newline < 0:
        raise _BulkFallback
    alphabet, metadata = _parse_header(data[:newline], 1)  # raises TraceIOError like the slow path
    body = data[newline + 1 :]
    if not body.strip():
        raise _BulkFallback  # header-only file: defer to reference path for the empty-trace error

    try:
        import polars as pl
    except ImportError:  # pragma: no cover - polars is a declared dependency
        raise _BulkFallback from None

    try:
        df = pl.read_ndjson(io.BytesIO(body), infer_schema_length=None)
    except Exception:
        raise _BulkFallback from None

    n = df.height
    cols: dict[str, list] = {}
    alpha = set(alphabet)

    def reject() -> "_BulkFallback":
        # Let the reference path recompute exact per-record diagnostics.
        return _BulkFallback()

    if "case_id" not in df.columns or df.schema["case_id"] != pl.Utf8:
        raise reject()
    if df["case_id"].null_count() or df["case_id"].n_unique() != n:
        raise reject()

    for f in _LABEL_FIELDS:
        if f not in df.columns:
            raise reject()
        dtype = df.schema[f]
        if dtype == pl.Int64:
            df = df.with_columns(pl.col(f).cast(pl.Utf8))
        elif dtype != pl.Utf8:
            raise reject()
        s = df[f]
        if s.null_count() or not set(s.unique().to_list()) <= alpha:
            raise reject()

    if "confidence" in df.columns and df.schema["confidence"] != pl.Null:
        dtype = df.schema["confidence"]
        if dtype == pl.Int64:
            df = df.with_columns(pl.col("confidence").cast(pl.Float64))
        elif dtype != pl.Float64:
            raise reject()
        c = df["confidence"]
        if bool(((c < 0.0) | (c > 1.0)).any()):
            raise reject()

    for f in ("t_ai_shown", "t_final"):
        if f in df.columns and df.schema[f] not in (pl.Int64, pl.Null):
            raise reject()
    if "t_ai_shown" in df.columns and "t_final" in df.columns:
        both = df.select((pl.col("t_final") < pl.col("t_ai_shown")).any().alias("inv"))
        if bool(both["inv"][0]):
            raise reject()

    if "risk" in df.columns and df.schema["risk"] != pl.Null:
        if df.schema["risk"] != pl.Utf8:
            raise reject()
        if not set(df["risk"].drop_nulls().unique().to_list()) <= set(RISK_LEVELS):
            raise reject()
    if "policy" in df.columns and df.schema["policy"] != pl.Null:
        if df.schema["policy"] != pl.Utf8:
            raise reject()
        if not set(df["policy"].drop_nulls().unique().to_list()) <= set(POLICIES):
            raise reject()
        df = df.with_columns(pl.col("policy").replace({"none": None}))

    for f in _BOOL_FIELDS:
        if f in df.columns and df.schema[f] not in (pl.Boolean, pl.Null):
            raise reject()
    for f in PARTITION_KEYS:
        if f in df.columns and df.schema[f] not in (pl.Utf8, pl.Null):
            raise reject()

    if "t_ai_shown" in df.columns and df["t_ai_shown"].null_count() == 0 and n:
        key = df.select(pl.struct(["t_ai_shown", "case_id"]).alias("k"))["k"]
        if not key.is_sorted():
            df = df.sort(["t_ai_shown", "case_id"])

    for f in FIELDS[:-1]:
        if f in df.columns and df.schema[f] != pl.Null:
            col = df[f].to_list()
            if f in _BOOL_FIELDS:
                col = [False if v is None else v for v in col]
            cols[f] = col
        else:
            default = False if f in _BOOL_FIELDS else None
            cols[f] = [default] * n

    extra_names = [c for c in df.columns if c not in FIELDS]
    if extra_names:
        extra_lists = [df[c].to_list() for c in extra_names]
        extras: list[Optional[dict[str, Any]]] = []
        for values in zip(*extra_lists):
            d = {k: v for k, v in zip(extra_names, values) if v is not None}
            extras.append(d or None)
        cols["extra"] = extras
    else:
        cols["extra"] = [None] * n

    return Trace(cols, alphabet, metadata)
