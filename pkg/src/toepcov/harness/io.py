"""Text interchange formats and CSV tables.

Matrices are written one row per line, every entry as ``re im`` with 17
significant digits, which is enough for a bit-exact float64 round trip::

    hermitian_matrix n=2
    2 0 1 1
    1 -1 4 0

Rectangular data (snapshot sets) use the header ``complex_matrix rows=R cols=C``.
"""

import csv
import math
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .config import read_config, write_config  # noqa: F401  (re-exported)

HERMITIAN_TOL = 1e-12


def _fmt(x):
    return f"{x:.17g}"


def _format_rows(m):
    return [
        " ".join(f"{_fmt(v.real)} {_fmt(v.imag)}" for v in row) for row in m
    ]


def format_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return "\n".join([f"hermitian_matrix n={m.shape[0]}"] + _format_rows(m)) + "\n"


def write_matrix(m, path):
    Path(path).write_text(format_matrix(m))


def write_complex_matrix(m, path):
    m = np.asarray(m, dtype=np.complex128)
    head = f"complex_matrix rows={m.shape[0]} cols={m.shape[1]}"
    Path(path).write_text("\n".join([head] + _format_rows(m)) + "\n")


def _header(line, kind, keys):
    parts = line.split()
    if not parts or parts[0] != kind:
        raise ParseError(f"expected '{kind}' header", line=1)
    values = {}
    for item in parts[1:]:
        key, sep, val = item.partition("=")
        if not sep or key not in keys:
            raise ParseError("unexpected header item", line=1, field=item)
        try:
            values[key] = int(val)
        except ValueError:
            raise ParseError("not an integer", line=1, field=key) from None
        if values[key] < 1:
            raise ParseError("must be positive", line=1, field=key)
    for key in keys:
        if key not in values:
            raise ParseError("missing header field", line=1, field=key)
    return values


def _parse_rows(lines, rows, cols, size_field):
    body = [(i + 2, text) for i, text in enumerate(lines[1:]) if text.strip()]
    if len(body) != rows:
        raise ParseError(f"header promises {rows} rows, found {len(body)}",
                         field=size_field)
    out = np.empty((rows, cols), dtype=np.complex128)
    for r, (lineno, text) in enumerate(body):
        tokens = text.split()
        if len(tokens) != 2 * cols:
            raise ParseError(f"expected {2 * cols} numbers, found {len(tokens)}",
                             line=lineno, field=size_field)
        try:
            vals = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        out[r] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out


def parse_matrix(text):
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    n = _header(lines[0], "hermitian_matrix", ("n",))["n"]
    m = _parse_rows(lines, n, n, "n")
    if not np.all(np.isfinite(m)):
        raise ParseError("non-finite entry")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
        raise ParseError("matrix is not Hermitian")
    return m


def read_matrix(path):
    return parse_matrix(Path(path).read_text())


def read_complex_matrix(path):
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    head = _header(lines[0], "complex_matrix", ("rows", "cols"))
    return _parse_rows(lines, head["rows"], head["cols"], "rows")


def read_any_matrix(path):
    """Either format; returns ``(kind, array)``."""
    first = Path(path).read_text().split(maxsplit=1)
    kind = first[0] if first else ""
    if kind == "complex_matrix":
        return kind, read_complex_matrix(path)
    return "hermitian_matrix", read_matrix(path)


# --- histograms and tables -----------------------------------------------------

HISTOGRAM_FIELDS = ("bin_left", "bin_right", "count")


def emit_histogram(values, bins=50):
    """Equal-width histogram over ``[min, max]`` of the finite *values*.

    Returns a list of ``(bin_left, bin_right, count)`` rows. A constant input
    is binned over ``[v - 0.5, v + 0.5]``, and so is one whose spread is too
    small to split into *bins* distinct floats; an empty input gives no rows.
    """
    if bins < 1:
        raise ValueError("bins must be at least 1")
    v = np.asarray(values, dtype=np.float64).ravel()
    v = v[np.isfinite(v)]
    if v.size == 0:
        return []
    lo, hi = float(v.min()), float(v.max())
    if hi - lo <= 4 * bins * np.finfo(np.float64).eps * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        lo, hi = mid - 0.5, mid + 0.5
    counts, edges = np.histogram(v, bins=bins, range=(lo, hi))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def write_csv(rows, fieldnames, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow(
                [_fmt(v) if isinstance(v, float) and math.isfinite(v) else v for v in row]
            )


def write_histogram(rows, path):
    write_csv(rows, HISTOGRAM_FIELDS, path)
