"""CSV ingestion and deterministic JSON/CSV artifact writing."""
import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

MISSING = {"", "na", "nan", "null", "none"}


class IngestError(ValueError):
    pass


@dataclass
class Dataset:
    names: list
    values: np.ndarray
    source: str = None
    transforms: list = field(default_factory=list)
    index: list = None

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


def ingest_csv(path, missing="error", index_col=None):
    """Read a header-plus-numeric-body CSV into a ``Dataset``.

    ``missing="drop-row"`` discards rows with empty or non-numeric cells and
    logs how many were dropped; ``"error"`` raises on the first such cell.
    ``index_col`` names a label column (e.g. a date) kept out of the values.
    """
    if missing not in ("error", "drop-row"):
        raise ValueError(f"unknown missing policy {missing!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        idx = None
        if index_col is not None:
            if index_col not in header:
                raise IngestError(f"{path}: no column named {index_col!r}")
            idx = header.index(index_col)
        names = [h for j, h in enumerate(header) if j != idx]
        rows, labels, dropped = [], [], 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestError(f"{path}: line {lineno} has {len(row)} fields, "
                                  f"expected {len(header)}")
            cells = [c.strip() for j, c in enumerate(row) if j != idx]
            try:
                vals = [float(c) if c.lower() not in MISSING else math.nan for c in cells]
            except ValueError as exc:
                if missing == "error":
                    raise IngestError(f"{path}: line {lineno}: {exc}") from None
                dropped += 1
                continue
            if any(math.isnan(v) for v in vals):
                if missing == "error":
                    raise IngestError(f"{path}: line {lineno} has a missing value")
                dropped += 1
                continue
            rows.append(vals)
            if idx is not None:
                labels.append(row[idx].strip())
    if dropped:
        log.warning("%s: dropped %d rows with missing or non-numeric cells", path, dropped)
    if not rows:
        raise IngestError(f"{path}: no data rows")
    values = np.array(rows, dtype=float)
    return Dataset(names, values, str(path), [], labels if idx is not None else None)


def fmt_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON with every float written at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(obj))


def write_csv(path, header, rows, labels=None, label_name="index"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(([label_name] if labels is not None else []) + list(header))
        for i, row in enumerate(rows):
            cells = [fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row]
            w.writerow(([labels[i]] if labels is not None else []) + cells)


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
