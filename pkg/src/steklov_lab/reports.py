"""JSON and CSV serialization for report dataclasses."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any, Iterable, Mapping

import numpy as np


def to_plain(obj: Any) -> Any:
    """Convert dataclasses/numpy values into JSON-compatible Python objects."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Mapping):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return to_plain(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # enums
        return obj.value
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_plain(obj), indent=2, sort_keys=True)


def csv_text(rows: Iterable[Mapping[str, Any]]) -> str:
    rows = [to_plain(r) for r in rows]
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0].keys())
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def from_plain(cls, data: Mapping[str, Any]):
    """Rebuild a flat report dataclass from :func:`to_plain` output.

    Nested report dataclasses are rebuilt when the field type names one in
    ``cls.NESTED``; everything else stays as plain lists/dicts.
    """
    nested = getattr(cls, "NESTED", {})
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        v = data[f.name]
        if f.name in nested and v is not None:
            sub = nested[f.name]
            v = [from_plain(sub, x) for x in v] if isinstance(v, list) else from_plain(sub, v)
        kwargs[f.name] = v
    return cls(**kwargs)
