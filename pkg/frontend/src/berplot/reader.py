"""Parser for the simulator's BER result CSV.

The expected layout is the one written by ``onebit-mimo simulate``: optional
``#``-prefixed metadata lines, the fixed header, then one row per
(snr, detector, T) cell. Any deviation raises :class:`MalformedCsvError`
carrying the 1-based line number of the offending line.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

EXPECTED_HEADER = [
    "snr_db",
    "detector",
    "T",
    "blocks",
    "total_bits",
    "bit_errors",
    "ber",
    "mean_em_iterations",
    "wall_seconds",
]


class MalformedCsvError(ValueError):
    """A results CSV that does not conform to the simulator schema."""

    def __init__(self, line_no, reason):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class BerPoint:
    """One data row: the fields a BER curve needs, plus its source line."""

    snr_db: float
    detector: str
    T: int
    ber: float
    line_no: int


def _parse_row(line_no, cells):
    if len(cells) != len(EXPECTED_HEADER):
        raise MalformedCsvError(
            line_no, f"expected {len(EXPECTED_HEADER)} fields, got {len(cells)}"
        )
    row = dict(zip(EXPECTED_HEADER, cells))
    try:
        snr_db = float(row["snr_db"])
        T = int(row["T"])
        for name in ("blocks", "total_bits", "bit_errors"):
            if int(row[name]) < 0:
                raise ValueError(f"{name} must be non-negative")
        ber = float(row["ber"])
        if row["mean_em_iterations"]:
            float(row["mean_em_iterations"])
        float(row["wall_seconds"])
    except ValueError as exc:
        raise MalformedCsvError(line_no, str(exc)) from None
    if not row["detector"]:
        raise MalformedCsvError(line_no, "empty detector name")
    if not 0.0 <= ber <= 1.0:
        raise MalformedCsvError(line_no, f"ber {ber} outside [0, 1]")
    return BerPoint(snr_db=snr_db, detector=row["detector"], T=T, ber=ber, line_no=line_no)


def read_ber_points(path):
    """All data rows of a results CSV, in file order."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    points = []
    header_seen = False
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = next(csv.reader([line]))
        if not header_seen:
            if cells != EXPECTED_HEADER:
                raise MalformedCsvError(
                    line_no, f"expected header {','.join(EXPECTED_HEADER)}"
                )
            header_seen = True
            continue
        points.append(_parse_row(line_no, cells))
    if not header_seen:
        raise MalformedCsvError(len(lines) + 1, "missing header line")
    return points


def group_series(points):
    """Group points by (detector, T), preserving file order within each series."""
    series = {}
    for p in points:
        series.setdefault((p.detector, p.T), []).append(p)
    return series
