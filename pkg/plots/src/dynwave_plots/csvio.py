"""Readers for the dynwave CSV contracts.

Strict by design: the header must match exactly and every cell must parse,
so a malformed file fails loudly with its row number instead of producing a
silently wrong figure.  All readers are read-only consumers.
"""

from __future__ import annotations

import csv

import numpy as np


class CsvFormatError(Exception):
    """Malformed CSV; the message names the file and the offending row."""


def read_table(path, expected_header: list[str], allow_empty: set[str] = frozenset()):
    """Read a CSV into a dict of float arrays (empty cells become NaN).

    Raises ``CsvFormatError`` on a header mismatch, a short row, or an
    unparsable cell, naming the 1-based data row.
    """
    columns: dict[str, list[float]] = {name: [] for name in expected_header}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise CsvFormatError(
                f"{path}: expected header {','.join(expected_header)}, got "
                f"{','.join(header) if header else 'empty file'}"
            )
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise CsvFormatError(
                    f"{path}: row {i} has {len(row)} fields, expected {len(expected_header)}"
                )
            for name, cell in zip(expected_header, row):
                if cell == "" and name in allow_empty:
                    columns[name].append(np.nan)
                    continue
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {i}, column {name}: cannot parse {cell!r}"
                    ) from None
    if not next(iter(columns.values())):
        raise CsvFormatError(f"{path}: no data rows")
    return {name: np.asarray(vals) for name, vals in columns.items()}


def read_snapshots(path):
    """Read snapshots.csv into (times, x, U) with U of shape (n_times, K+1)."""
    cols = read_table(path, ["n", "t", "k", "x", "u"])
    n = cols["n"].astype(int)
    order = np.lexsort((cols["k"].astype(int), n))
    n = n[order]
    times_idx, first = np.unique(n, return_index=True)
    n_times = len(times_idx)
    width = len(n) // n_times
    if width * n_times != len(n):
        raise CsvFormatError(f"{path}: snapshot blocks have unequal length")
    u = cols["u"][order].reshape(n_times, width)
    x = cols["x"][order].reshape(n_times, width)[0]
    t = cols["t"][order].reshape(n_times, width)[:, 0]
    return t, x, u


def read_energy(path):
    """Read energy.csv into (t, J)."""
    cols = read_table(path, ["n", "t", "J", "delta", "drift"])
    return cols["t"], cols["J"]


def read_convergence(path):
    """Read convergence.csv; observed_order may be empty on the first row."""
    return read_table(
        path,
        ["level", "K", "N", "dx", "dt", "err_l2", "err_h1", "err_composite", "observed_order"],
        allow_empty={"observed_order"},
    )
