"""Loading, validation, CPI normalization and summary statistics."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import (
    DegenerateSampleError,
    DomainError,
    InputError,
    RowParseError,
    SchemaError,
)

__all__ = [
    "LossRecord",
    "CpiSeries",
    "IndicatorTable",
    "StatsSummary",
    "LOSS_COLUMNS",
    "INDICATOR_CRITERIA",
    "INDICATOR_BENEFIT",
    "load_loss_csv",
    "load_cpi_csv",
    "load_indicator_csv",
    "load_exceedance_counts",
    "normalize_cpi",
    "empirical_quantile",
    "descriptive_stats",
    "correlation",
    "annual_counts",
    "losses",
    "precipitation",
]

# field name -> CSV column name
LOSS_COLUMNS = {
    "event_id": "event_id",
    "year": "year",
    "province": "province",
    "loss": "loss_billion",
    "max_point_precip": "precip_mm",
}

INDICATOR_CRITERIA = tuple(f"X{j}" for j in range(1, 14))
# X1-X6 measure risk exposure (larger is more vulnerable); X7-X13 measure
# economic development (larger is less vulnerable).
INDICATOR_BENEFIT = (True,) * 6 + (False,) * 7


@dataclass(frozen=True)
class LossRecord:
    """One flood event.

    ``price_year`` is the year whose prices ``loss`` is expressed in. It is
    ``None`` for nominal figures, meaning the event year itself.
    """

    event_id: str
    year: int
    province: str
    loss: float
    max_point_precip: float
    price_year: int | None = None

    @property
    def basis_year(self) -> int:
        return self.year if self.price_year is None else self.price_year


@dataclass(frozen=True)
class CpiSeries:
    """Consumer price index by calendar year."""

    index: Mapping[int, float]

    def __post_init__(self):
        bad = [y for y, v in self.index.items() if not v > 0]
        if bad:
            raise DomainError(f"CPI must be positive; offending years {sorted(bad)}")

    def __contains__(self, year):
        return year in self.index

    def __getitem__(self, year):
        try:
            return self.index[year]
        except KeyError:
            raise DomainError(f"no CPI value for year {year}") from None

    def ratio(self, year: int, base_year: int) -> float:
        """Price-level factor converting ``year`` money into ``base_year`` money."""
        return self[base_year] / self[year]


@dataclass(frozen=True)
class IndicatorTable:
    """Provinces by the 13 vulnerability criteria."""

    provinces: tuple[str, ...]
    values: np.ndarray
    criteria: tuple[str, ...] = INDICATOR_CRITERIA
    benefit: tuple[bool, ...] = INDICATOR_BENEFIT

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.provinces), len(self.criteria)):
            raise DomainError(
                f"indicator values have shape {vals.shape}, expected "
                f"({len(self.provinces)}, {len(self.criteria)})"
            )
        if len(self.benefit) != len(self.criteria):
            raise DomainError("one orientation flag is needed per criterion")
        if not np.all(np.isfinite(vals)):
            raise DomainError("indicator table has missing or non-finite cells")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class StatsSummary:
    size: int
    min: float
    median: float
    mean: float
    max: float
    skewness: float
    kurtosis: float

    def as_dict(self):
        return dataclasses.asdict(self)


def _open_rows(path, required: Iterable[str]):
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row expected") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}; header is {header}")
        rows = [(i, r) for i, r in enumerate(reader, start=2) if any(c.strip() for c in r)]
    return path, header, rows


def _num(text, name, cast=float):
    try:
        value = cast(text.strip())
    except (ValueError, AttributeError):
        raise ValueError(f"{name}={text!r} is not numeric") from None
    if cast is float and not math.isfinite(value):
        raise ValueError(f"{name}={text!r} is not finite")
    return value


def load_loss_csv(
    path,
    schema: Mapping[str, str] | None = None,
    year_range: tuple[int, int] = (1900, 2100),
) -> list[LossRecord]:
    """Read flood events from a CSV file.

    Parameters
    ----------
    path : path-like
        UTF-8, comma-delimited file with one header row.
    schema : mapping, optional
        Maps ``LossRecord`` field names to column names. Missing keys fall
        back to :data:`LOSS_COLUMNS`.
    year_range : (int, int)
        Inclusive bounds for the event year.

    Returns
    -------
    list of LossRecord
        Nominal records in file order.

    Raises
    ------
    SchemaError
        A declared column is absent from the header.
    RowParseError
        Any row fails to parse or violates a record invariant. All bad rows
        are collected before raising.
    """
    cols = dict(LOSS_COLUMNS)
    if schema:
        unknown = set(schema) - set(cols)
        if unknown:
            raise SchemaError(f"unknown loss fields in column map: {sorted(unknown)}")
        cols.update(schema)
    path, header, rows = _open_rows(path, cols.values())
    pos = {k: header.index(v) for k, v in cols.items()}
    lo, hi = year_range
    records, errors = [], []
    for line, row in rows:
        try:
            if len(row) < len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            year = _num(row[pos["year"]], cols["year"], int)
            loss = _num(row[pos["loss"]], cols["loss"])
            precip = _num(row[pos["max_point_precip"]], cols["max_point_precip"])
            if not lo <= year <= hi:
                raise ValueError(f"year {year} outside [{lo}, {hi}]")
            if not loss > 0:
                raise ValueError(f"loss must be positive, got {loss}")
            if precip < 0:
                raise ValueError(f"precipitation must be nonnegative, got {precip}")
            records.append(
                LossRecord(
                    event_id=row[pos["event_id"]].strip(),
                    year=year,
                    province=row[pos["province"]].strip(),
                    loss=loss,
                    max_point_precip=precip,
                )
            )
        except ValueError as exc:
            errors.append((line, str(exc)))
    if errors:
        raise RowParseError(path, errors)
    return records


def load_cpi_csv(path) -> CpiSeries:
    """Read a ``year,index`` CPI table."""
    path, header, rows = _open_rows(path, ("year", "index"))
    iy, ii = header.index("year"), header.index("index")
    index, errors = {}, []
    for line, row in rows:
        try:
            year = _num(row[iy], "year", int)
            value = _num(row[ii], "index")
            if not value > 0:
                raise ValueError(f"index must be positive, got {value}")
            if year in index:
                raise ValueError(f"duplicate year {year}")
            index[year] = value
        except (ValueError, IndexError) as exc:
            errors.append((line, str(exc)))
    if errors:
        raise RowParseError(path, errors)
    return CpiSeries(index)


def load_indicator_csv(path) -> IndicatorTable:
    """Read a ``province,X1..X13`` indicator table."""
    path, header, rows = _open_rows(path, ("province",) + INDICATOR_CRITERIA)
    ip = header.index("province")
    ic = [header.index(c) for c in INDICATOR_CRITERIA]
    names, values, errors = [], [], []
    for line, row in rows:
        try:
            values.append([_num(row[j], header[j]) for j in ic])
            names.append(row[ip].strip())
        except (ValueError, IndexError) as exc:
            errors.append((line, str(exc)))
    if errors:
        raise RowParseError(path, errors)
    if len(set(names)) != len(names):
        raise SchemaError(f"{path}: duplicate province names")
    return IndicatorTable(tuple(names), np.array(values, dtype=float).reshape(len(names), 13))


def load_exceedance_counts(path) -> tuple[list[int], list[int]]:
    """Read a ``year,count`` table of annual exceedance counts."""
    path, header, rows = _open_rows(path, ("year", "count"))
    iy, ic = header.index("year"), header.index("count")
    years, counts, errors = [], [], []
    for line, row in rows:
        try:
            years.append(_num(row[iy], "year", int))
            counts.append(_num(row[ic], "count", int))
        except (ValueError, IndexError) as exc:
            errors.append((line, str(exc)))
    if errors:
        raise RowParseError(path, errors)
    return years, counts


def normalize_cpi(
    records: Sequence[LossRecord], cpi: CpiSeries, base_year: int
) -> list[LossRecord]:
    """Restate losses in ``base_year`` prices.

    Each record remembers its price basis, so applying the same base year
    twice leaves the losses unchanged.
    """
    if base_year not in cpi:
        raise DomainError(f"no CPI value for base year {base_year}")
    missing = sorted({r.basis_year for r in records if r.basis_year not in cpi})
    if missing:
        raise DomainError(f"no CPI value for year(s) {missing}")
    return [
        dataclasses.replace(
            r, loss=r.loss * cpi.ratio(r.basis_year, base_year), price_year=base_year
        )
        for r in records
    ]


def losses(records: Sequence[LossRecord]) -> np.ndarray:
    return np.array([r.loss for r in records], dtype=float)


def precipitation(records: Sequence[LossRecord]) -> np.ndarray:
    return np.array([r.max_point_precip for r in records], dtype=float)


def empirical_quantile(sample, q):
    """Linear-interpolation quantile between order statistics.

    Uses position ``q(n-1)+1`` in the sorted sample (Hyndman-Fan type 7),
    which is numpy's default rule. ``q`` may be a scalar or an array.
    """
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise DomainError("quantile of an empty sample")
    qa = np.asarray(q, dtype=float)
    if np.any(~((qa >= 0) & (qa <= 1))):
        raise DomainError(f"quantile level must lie in [0, 1], got {q}")
    out = np.quantile(x, qa, method="linear")
    return float(out) if out.ndim == 0 else out


def descriptive_stats(sample) -> StatsSummary:
    """Size, location and moment statistics of a sample.

    Skewness is the moment ratio m3/m2^1.5 and kurtosis the raw ratio
    m4/m2^2 (3 for a normal law), both with population moments. They are
    reported as NaN when the sample is too small (fewer than 3 or 4 points).

    Raises
    ------
    DegenerateSampleError
        All values are equal, so the standardized moments are undefined.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("summary of an empty sample")
    n = x.size
    skew = kurt = float("nan")
    if n >= 3:
        if np.all(x == x[0]):
            raise DegenerateSampleError("constant sample: skewness and kurtosis undefined")
        skew = float(stats.skew(x, bias=True))
        if n >= 4:
            kurt = float(stats.kurtosis(x, fisher=False, bias=True))
    return StatsSummary(
        size=n,
        min=float(x.min()),
        median=float(np.median(x)),
        mean=float(x.mean()),
        max=float(x.max()),
        skewness=skew,
        kurtosis=kurt,
    )


def correlation(x, y) -> float:
    """Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("correlation needs two equal-length samples of size >= 2")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise DegenerateSampleError("correlation with a constant sample is undefined")
    return float(np.corrcoef(x, y)[0, 1])


def annual_counts(years, values, threshold, span: tuple[int, int] | None = None) -> dict:
    """Count values strictly above ``threshold`` per calendar year.

    Years in ``span`` (inclusive) without any exceedance are reported as 0.
    """
    years = np.asarray(years, dtype=int)
    values = np.asarray(values, dtype=float)
    lo, hi = span if span is not None else (int(years.min()), int(years.max()))
    counts = {y: 0 for y in range(lo, hi + 1)}
    for y in years[values > threshold]:
        if lo <= y <= hi:
            counts[int(y)] += 1
    return counts
