"""Problem files, trace files and run artifacts.

Two problem formats are understood:

``native-json``
    ``{"form": "dual"|"standard", "m": int, "n": int, "A": [[...]], "b": [...], "c": [...]}``
    with ``A`` row-major.

``dense-csv``
    A header line ``m,n,form`` followed by the ``m`` rows of ``A``, one row
    holding ``b`` and one holding ``c``.

Floats are written with Python's shortest round-trip representation, so
writing and re-reading a problem or trace is exact.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .model import DualLP, StandardLP, dual_of
from .solver import SolveOutcome, TraceRecord

FORMATS = ("native-json", "dense-csv")
FORMS = ("dual", "standard")
TRACE_FIELDS = TraceRecord._fields


class ParseError(ValueError):
    """Malformed problem text; ``location`` names the offending line or field."""

    def __init__(self, message: str, location: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class IoError(OSError):
    """A trace or report file could not be written or read."""


@dataclasses.dataclass(frozen=True)
class ProblemFile:
    format: str
    form: str
    problem: DualLP | StandardLP

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}")

    @property
    def dual(self) -> DualLP:
        """The problem in the form the solver consumes."""
        return dual_of(self.problem) if self.form == "standard" else self.problem


@dataclasses.dataclass(frozen=True)
class RunArtifacts:
    outcome: SolveOutcome
    trace_path: Path | None = None
    report_path: Path | None = None


def format_for_path(path) -> str:
    return "dense-csv" if str(path).lower().endswith(".csv") else "native-json"


def _build(form: str, A, b, c) -> DualLP | StandardLP:
    cls = StandardLP if form == "standard" else DualLP
    return cls(A, b, c)


# -- native JSON -------------------------------------------------------------


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _number_list(v, length: int, field: str) -> list:
    if not isinstance(v, list):
        raise ParseError("expected a list", f"field {field!r}")
    if len(v) != length:
        raise ParseError(f"expected {length} entries, got {len(v)}", f"field {field!r}")
    for i, e in enumerate(v):
        if not _is_number(e):
            raise ParseError(f"entry {i} is not a number", f"field {field!r}")
    return v


def _parse_json(text: str) -> ProblemFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", "document")
    for key in ("form", "m", "n", "A", "b", "c"):
        if key not in obj:
            raise ParseError("missing", f"field {key!r}")
    form = obj["form"]
    if form not in FORMS:
        raise ParseError(f"must be one of {FORMS}, got {form!r}", "field 'form'")
    for key in ("m", "n"):
        v = obj[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ParseError("must be a positive integer", f"field {key!r}")
    m, n = obj["m"], obj["n"]
    A = obj["A"]
    if not isinstance(A, list) or len(A) != m:
        raise ParseError(f"expected a list of {m} rows", "field 'A'")
    for i, row in enumerate(A):
        _number_list(row, n, f"A[{i}]")
    b = _number_list(obj["b"], m, "b")
    c = _number_list(obj["c"], n, "c")
    return ProblemFile("native-json", form, _build(form, A, b, c))


def _json_text(form: str, p) -> str:
    doc = {
        "form": form,
        "m": p.m,
        "n": p.n,
        "A": p.A.tolist(),
        "b": p.b.tolist(),
        "c": p.c.tolist(),
    }
    return json.dumps(doc) + "\n"


# -- dense CSV ---------------------------------------------------------------


def _csv_numbers(row: list[str], length: int, lineno: int) -> list[float]:
    if len(row) != length:
        raise ParseError(f"expected {length} values, got {len(row)}", f"line {lineno}")
    out = []
    for j, cell in enumerate(row):
        try:
            out.append(float(cell))
        except ValueError:
            raise ParseError(f"column {j + 1} is not a number: {cell!r}", f"line {lineno}") from None
    return out


def _parse_csv(text: str) -> ProblemFile:
    rows = [
        (i + 1, [cell.strip() for cell in row])
        for i, row in enumerate(csv.reader(io.StringIO(text)))
        if any(cell.strip() for cell in row)
    ]
    if not rows:
        raise ParseError("empty file", "line 1")
    lineno, head = rows[0]
    if len(head) != 3:
        raise ParseError("header must be 'm,n,form'", f"line {lineno}")
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("m and n must be integers", f"line {lineno}") from None
    if m < 1 or n < 1:
        raise ParseError("m and n must be positive", f"line {lineno}")
    form = head[2]
    if form not in FORMS:
        raise ParseError(f"form must be one of {FORMS}, got {form!r}", f"line {lineno}")
    body = rows[1:]
    if len(body) != m + 2:
        last = rows[-1][0]
        raise ParseError(f"expected {m + 2} data rows after the header, got {len(body)}",
                         f"line {last}")
    A = [_csv_numbers(row, n, ln) for ln, row in body[:m]]
    b = _csv_numbers(body[m][1], m, body[m][0])
    c = _csv_numbers(body[m + 1][1], n, body[m + 1][0])
    return ProblemFile("dense-csv", form, _build(form, A, b, c))


def _csv_text(form: str, p) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([p.m, p.n, form])
    for row in p.A:
        w.writerow([repr(float(v)) for v in row])
    w.writerow([repr(float(v)) for v in p.b])
    w.writerow([repr(float(v)) for v in p.c])
    return buf.getvalue()


# -- public problem API ------------------------------------------------------


def parse_problem(data: bytes | str, format: str) -> ProblemFile:
    """Parse problem text; raises :class:`ParseError` or a validation error."""
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}")
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("not valid UTF-8", f"byte {exc.start}") from exc
    return _parse_json(data) if format == "native-json" else _parse_csv(data)


def serialize_problem(p: DualLP | StandardLP, format: str) -> str:
    form = "standard" if isinstance(p, StandardLP) else "dual"
    if format == "native-json":
        return _json_text(form, p)
    if format == "dense-csv":
        return _csv_text(form, p)
    raise ValueError(f"unknown format {format!r}")


def read_problem(path, format: str | None = None) -> ProblemFile:
    path = Path(path)
    return parse_problem(path.read_bytes(), format or format_for_path(path))


# -- atomic files and traces -------------------------------------------------


def write_text_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _trace_line(rec: TraceRecord) -> str:
    return json.dumps({name: getattr(rec, name) for name in TRACE_FIELDS}) + "\n"


def write_trace(records: Iterable[TraceRecord], path) -> None:
    """One JSON object per line, keys in :data:`TRACE_FIELDS` order."""
    write_text_atomic(path, "".join(_trace_line(r) for r in records))


def read_trace(path) -> list[TraceRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rec = TraceRecord(
                k=int(obj["k"]),
                ell=int(obj["ell"]),
                **{name: float(obj[name]) for name in TRACE_FIELDS[2:]},
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad trace record ({exc})", f"line {lineno}") from exc
        out.append(rec)
    return out


def jsonable(v):
    """Convert numpy values and non-finite floats into plain JSON values (NaN/inf -> null)."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v
