"""Deterministic CSV and key=value formatting."""
from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

SIG_DIGITS = 12


def fmt(x) -> str:
    """Locale-independent text for one cell: 12 significant digits for reals."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, f".{SIG_DIGITS}g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def fields_text(fields: dict) -> str:
    return "".join(f"{k}={fmt(v)}\n" for k, v in fields.items())
