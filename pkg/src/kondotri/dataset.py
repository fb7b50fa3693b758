"""Dataset persistence: the sweep CSV schema and its JSON metadata sidecar.

The CSV is the package's exchange format; externally produced tables (e.g.
from a matrix-product solver at sizes we cannot reach) are accepted as long
as they match the documented header.  Reals carry 17 significant digits so a
write/read cycle is lossless for float64.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import DatasetParseError
from .sweep import SweepRecord

CSV_COLUMNS = (
    "model", "j_prime", "control", "n_total", "energy",
    "e1", "e2", "pi_a", "pi_b", "pi_c",
    "n_a_bc", "n_b_ac", "n_c_ab", "n_ab", "n_ac", "n_bc",
    "converged",
)

_MODELS = ("2ikm", "2ckm")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def dataset_text(records) -> str:
    """The CSV serialization of a record list, as one string."""
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        row = [
            r.model, _fmt(r.j_prime), _fmt(r.control), str(r.n_total), _fmt(r.energy),
            _fmt(r.e1), _fmt(r.e2), _fmt(r.pi_a), _fmt(r.pi_b), _fmt(r.pi_c),
            _fmt(r.n_a_bc), _fmt(r.n_b_ac), _fmt(r.n_c_ab),
            _fmt(r.n_ab), _fmt(r.n_ac), _fmt(r.n_bc),
            "true" if r.converged else "false",
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_dataset(records, path: str | Path, metadata: dict | None = None) -> Path:
    """Write records as CSV; optional metadata goes to a .meta.json sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dataset_text(records), encoding="utf-8")
    if metadata is not None:
        sidecar_path(path).write_text(
            json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return path


def parse_dataset_text(text: str, source: str = "<string>") -> list[SweepRecord]:
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetParseError(f"{source}: empty file") from None
    if tuple(header) != CSV_COLUMNS:
        for got, want in zip(header, CSV_COLUMNS):
            if got != want:
                raise DatasetParseError(
                    f"{source}: header field {got!r} where {want!r} expected"
                )
        raise DatasetParseError(
            f"{source}: header has {len(header)} columns, schema has {len(CSV_COLUMNS)}"
        )
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise DatasetParseError(
                f"{source}:{lineno}: {len(row)} fields, expected {len(CSV_COLUMNS)}"
            )
        values = dict(zip(CSV_COLUMNS, row))
        if values["model"] not in _MODELS:
            raise DatasetParseError(
                f"{source}:{lineno}: unknown model {values['model']!r}"
            )
        conv = values["converged"].strip().lower()
        if conv not in ("true", "false"):
            raise DatasetParseError(
                f"{source}:{lineno}: converged must be true/false, got {values['converged']!r}"
            )
        floats = {}
        for name in CSV_COLUMNS:
            if name in ("model", "n_total", "converged"):
                continue
            try:
                floats[name] = float(values[name])
            except ValueError:
                raise DatasetParseError(
                    f"{source}:{lineno}: field {name!r} is not a number: {values[name]!r}"
                ) from None
        try:
            n_total = int(values["n_total"])
        except ValueError:
            raise DatasetParseError(
                f"{source}:{lineno}: field 'n_total' is not an integer: {values['n_total']!r}"
            ) from None
        records.append(SweepRecord(
            model=values["model"], n_total=n_total, converged=conv == "true", **floats
        ))
    return records


def read_dataset(path: str | Path) -> list[SweepRecord]:
    path = Path(path)
    return parse_dataset_text(path.read_text(encoding="utf-8"), source=str(path))


def _float_eq(a: float, b: float) -> bool:
    return (math.isnan(a) and math.isnan(b)) or a == b


def records_equal(a, b) -> bool:
    """Field-wise equality of two record lists, treating NaN == NaN."""
    a, b = list(a), list(b)
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        if (ra.model, ra.n_total, ra.converged) != (rb.model, rb.n_total, rb.converged):
            return False
        for name in CSV_COLUMNS:
            if name in ("model", "n_total", "converged"):
                continue
            if not _float_eq(getattr(ra, name), getattr(rb, name)):
                return False
    return True
