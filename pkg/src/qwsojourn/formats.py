"""CSV/JSON rendering helpers and atomic file output."""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

from .algebra import ExactComplex, Mat2

__all__ = [
    "fmt17",
    "scalar_json",
    "scalar_from_json",
    "mat_json",
    "mat_from_json",
    "csv_text",
    "json_text",
    "write_output",
    "sidecar_path",
]


def fmt17(x: float) -> str:
    """Decimal rendering with 17 significant digits (``-0`` folded to ``0``)."""
    x = float(x) + 0.0
    return format(x, ".17g")


def scalar_json(x) -> dict:
    """
    JSON form of a scalar.

    Always carries ``"float": [re, im]``; exact values additionally carry
    ``"exact": [x1, x2, x3, x4]`` as decimal-string rationals for
    ``(x1 + x2*sqrt2) + i*(x3 + x4*sqrt2)``.
    """
    c = complex(x)
    out = {"float": [c.real + 0.0, c.imag + 0.0]}
    if isinstance(x, ExactComplex):
        out["exact"] = [str(p) for p in x.parts()]
    return out


def scalar_from_json(obj: dict):
    if "exact" in obj:
        return ExactComplex.from_parts(*(Fraction(s) for s in obj["exact"]))
    re, im = obj["float"]
    return complex(re, im)


def mat_json(m: Mat2) -> list[dict]:
    """Row-major list of the four entries in :func:`scalar_json` form."""
    return [scalar_json(x) for x in m]


def mat_from_json(entries: list[dict]) -> Mat2:
    return Mat2(*(scalar_from_json(e) for e in entries))


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_output(path: str, text: str) -> None:
    """Write ``text`` to ``path`` atomically (temp file + rename); ``-`` is stdout."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".qwsojourn-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(output: str, suffix: str) -> str | None:
    """Sidecar file name next to ``output`` (``None`` when writing to stdout)."""
    if output == "-":
        return None
    return output + suffix
