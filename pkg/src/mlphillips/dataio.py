"""Loading, validating and binning yearly unemployment/inflation records."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from typing import Iterable, TextIO, Union

HEADER = ("year", "unemployment_rate", "inflation_rate")
EMBEDDED_LABELS = ("france", "germany")


class DataError(ValueError):
    """Raised for malformed or invalid input data."""


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DataError):
    pass


@dataclass(frozen=True)
class EconRecord:
    year: int
    unemployment: float
    inflation: float


@dataclass(frozen=True)
class DataSet:
    label: str
    records: tuple[EconRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise ValidationError(f"dataset {self.label!r} has no records")
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.year <= prev.year:
                raise ValidationError(
                    f"dataset {self.label!r}: years must be strictly increasing "
                    f"({prev.year} then {cur.year})"
                )
        for rec in self.records:
            if not rec.unemployment > 0:
                raise ValidationError(
                    f"dataset {self.label!r}: unemployment must be positive in {rec.year}"
                )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(r.unemployment, r.inflation) for r in self.records]


@dataclass(frozen=True)
class AveragedPoint:
    level_low: float
    level_high: float
    mean_unemployment: float
    mean_inflation: float
    count: int

    @property
    def point(self) -> tuple[float, float]:
        return (self.mean_unemployment, self.mean_inflation)


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"cannot parse {what} {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"{what} must be finite, got {text!r}", line)
    return value


def parse_dataset(text: Union[str, TextIO], label: str = "data") -> DataSet:
    """Parse CSV with header ``year,unemployment_rate,inflation_rate``.

    Blank lines are skipped.  Errors carry the 1-based line number.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    reader = csv.reader(text)
    header = None
    records = []
    seen = {}
    for row in reader:
        line = reader.line_num
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells):
            continue
        if header is None:
            header = tuple(c.lower() for c in cells)
            if header != HEADER:
                raise ParseError(f"expected header {','.join(HEADER)!r}, got {','.join(cells)!r}", line)
            continue
        if len(cells) != 3:
            raise ParseError(f"expected 3 fields, got {len(cells)}", line)
        try:
            year = int(cells[0])
        except ValueError:
            raise ParseError(f"cannot parse year {cells[0]!r}", line) from None
        unemployment = _parse_float(cells[1], "unemployment_rate", line)
        inflation = _parse_float(cells[2], "inflation_rate", line)
        if unemployment <= 0:
            raise ValidationError(f"line {line}: unemployment must be positive, got {unemployment}")
        if year in seen:
            raise ValidationError(f"line {line}: duplicate year {year} (first on line {seen[year]})")
        seen[year] = line
        records.append(EconRecord(year, unemployment, inflation))
    if header is None:
        raise ParseError("empty input, missing header", 1)
    return DataSet(label, tuple(records))


def load_dataset(path, label: str | None = None) -> DataSet:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_dataset(fh, label or str(path))


def embedded_datasets() -> dict[str, DataSet]:
    """The built-in 1980-2011 records for France and Germany."""
    out = {}
    pkg = resources.files("mlphillips") / "data"
    for label in EMBEDDED_LABELS:
        out[label] = parse_dataset((pkg / f"{label}.csv").read_text(encoding="utf-8"), label)
    return out


def bin_average(data: Union[DataSet, Iterable[EconRecord]], bin_width: float = 1.0) -> list[AveragedPoint]:
    """Average records per unemployment level [k*w, (k+1)*w), lower bound included.

    Empty levels are omitted; the result is ordered by level.
    """
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    records = data.records if isinstance(data, DataSet) else tuple(data)
    bins: dict[int, list[EconRecord]] = {}
    for rec in records:
        k = math.floor(rec.unemployment / bin_width)
        # guard against rounding of the division at a bin edge
        if rec.unemployment < k * bin_width:
            k -= 1
        elif rec.unemployment >= (k + 1) * bin_width:
            k += 1
        bins.setdefault(k, []).append(rec)
    out = []
    for k in sorted(bins):
        members = bins[k]
        n = len(members)
        out.append(
            AveragedPoint(
                level_low=k * bin_width,
                level_high=(k + 1) * bin_width,
                mean_unemployment=math.fsum(r.unemployment for r in members) / n,
                mean_inflation=math.fsum(r.inflation for r in members) / n,
                count=n,
            )
        )
    return out


def _round_half_up(x: float, ndigits: int) -> float:
    # decimal rounding of the shortest repr, so 5.7265 -> 5.727 as printed
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def round_averages(points: Iterable[AveragedPoint], ndigits: int = 3) -> list[AveragedPoint]:
    """Round the bin means half-up to ``ndigits`` decimals, as the averaged table is printed."""
    return [
        AveragedPoint(p.level_low, p.level_high, _round_half_up(p.mean_unemployment, ndigits),
                      _round_half_up(p.mean_inflation, ndigits), p.count)
        for p in points
    ]
