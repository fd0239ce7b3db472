"""Round-trip-exact CSV helpers shared by the file formats."""
import csv
import math

import numpy as np


def fmt(value) -> str:
    # repr of a Python float is the shortest string that parses back exactly
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_rows(path, header, rows, comments=()):
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_rows(path):
    """Return (header, rows) skipping ``#`` comment lines; cells stay strings."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise ValueError(f"{path}: empty CSV")
    return header, [row for row in reader]


def column_groups(header, prefixes):
    """Map each prefix to the header indices ``prefix1, prefix2, ...`` in order."""
    out = {}
    for p in prefixes:
        idx = []
        n = 1
        while f"{p}{n}" in header:
            idx.append(header.index(f"{p}{n}"))
            n += 1
        out[p] = idx
    return out


def read_matrix(path) -> np.ndarray:
    """Numeric CSV without header (comment lines allowed)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    rows = list(csv.reader(lines))
    try:
        return np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric cell ({exc})") from None


def write_matrix(path, mat):
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in mat:
            w.writerow([fmt(v) for v in row])
