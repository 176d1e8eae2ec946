"""Ingestion of FRED-MD style monthly panels.

The layout expected by :func:`parse_csv` is the one distributed by the
FRED-MD project: a header row with series mnemonics, a row of transform
codes, then one row per month. The recession indicator may live in the
same file (``schema.target_column``) or be supplied separately.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlignmentError, DomainError, ParseError, SchemaError
from .fredmd import DEFAULT_EXCLUSIONS, DEFAULT_SIGN_OVERRIDES, SECTOR_OF, Sector
from .months import month_index, parse_month

logger = logging.getLogger(__name__)

TCODES = range(1, 8)


@dataclass(frozen=True)
class CsvSchema:
    """Column layout of an input file.

    ``tcode_row`` counts rows after the header (1 = the row directly below
    it). Rows between the header and the transform-code row are skipped.
    """

    tcode_row: int = 1
    date_column: int = 0
    target_column: str | None = "USREC"


@dataclass(frozen=True)
class RawPanel:
    dates: tuple[str, ...]
    series: dict[str, np.ndarray]
    tcodes: dict[str, int]
    target: np.ndarray | None = None

    @property
    def ids(self) -> list[str]:
        return list(self.series)


@dataclass(frozen=True)
class SeriesMeta:
    series_id: str
    sector: Sector
    sign: int = 1
    excluded: bool = False

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "sector", Sector.parse(self.sector))


@dataclass(frozen=True)
class PanelMatrix:
    """Aligned, stationarised panel with its recession indicator."""

    dates: tuple[str, ...]
    values: np.ndarray
    meta: tuple[SeriesMeta, ...]
    y: np.ndarray
    tcodes: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        y = np.asarray(self.y)
        if values.ndim != 2 or values.shape != (len(self.dates), len(self.meta)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.meta)} series"
            )
        if y.shape != (len(self.dates),):
            raise ValueError("target length must equal the number of dates")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("target must be 0/1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "y", y.astype(np.int8))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "meta", tuple(self.meta))

    @property
    def ids(self) -> list[str]:
        return [m.series_id for m in self.meta]

    @property
    def signs(self) -> np.ndarray:
        return np.array([m.sign for m in self.meta], dtype=float)

    @property
    def sectors(self) -> list[Sector]:
        return [m.sector for m in self.meta]

    def __len__(self) -> int:
        return len(self.dates)

    def rows_through(self, stamp: str) -> int:
        """Number of rows dated on or before ``stamp``."""
        target = month_index(stamp)
        return sum(1 for d in self.dates if month_index(d) <= target)

    def index_of(self, stamp: str) -> int:
        try:
            return self.dates.index(stamp)
        except ValueError:
            raise KeyError(f"{stamp} not in panel ({self.dates[0]}..{self.dates[-1]})") from None

    def head(self, n: int) -> "PanelMatrix":
        """First ``n`` rows."""
        return replace(self, dates=self.dates[:n], values=self.values[:n], y=self.y[:n])

    def between(self, start: str | None = None, end: str | None = None) -> "PanelMatrix":
        lo = 0 if start is None else len(self) - sum(
            1 for d in self.dates if month_index(d) >= month_index(start)
        )
        hi = len(self) if end is None else self.rows_through(end)
        if lo >= hi:
            raise AlignmentError(f"no rows between {start} and {end}")
        return replace(self, dates=self.dates[lo:hi], values=self.values[lo:hi], y=self.y[lo:hi])

    def select(self, ids: Iterable[str]) -> "PanelMatrix":
        ids = list(ids)
        pos = {sid: j for j, sid in enumerate(self.ids)}
        missing = [sid for sid in ids if sid not in pos]
        if missing:
            raise KeyError(f"series not in panel: {missing}")
        cols = [pos[sid] for sid in ids]
        return replace(self, values=self.values[:, cols], meta=tuple(self.meta[j] for j in cols))

    def with_meta(self, meta: Sequence[SeriesMeta]) -> "PanelMatrix":
        return replace(self, meta=tuple(meta))


def _parse_float(cell: str, row: int, col: str) -> float:
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"non-numeric value {cell!r} at row {row}, column {col!r}") from None


def parse_csv(path: str | Path, schema: CsvSchema = CsvSchema()) -> RawPanel:
    """Read a FRED-MD style CSV.

    Row numbers in error messages are 1-based file lines. Missing cells
    become NaN.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(rows) <= schema.tcode_row:
        raise SchemaError(f"{path}: missing transform-code row")
    ids = [h for j, h in enumerate(header) if j != schema.date_column]
    if len(set(ids)) != len(ids):
        raise SchemaError(f"{path}: duplicate series ids in header")
    col_pos = [j for j in range(len(header)) if j != schema.date_column]

    code_row = rows[schema.tcode_row]
    line = schema.tcode_row + 1
    first = code_row[schema.date_column] if len(code_row) > schema.date_column else ""
    try:
        parse_month(first)
        raise SchemaError(f"{path}: row {line} is a data row; transform-code row missing")
    except ValueError:
        pass

    tcodes: dict[str, int] = {}
    for sid, j in zip(ids, col_pos):
        cell = code_row[j].strip() if j < len(code_row) else ""
        if sid == schema.target_column:
            continue
        if cell == "":
            raise SchemaError(f"{path}: no transform code for series {sid!r}")
        try:
            code = float(cell)
        except ValueError:
            raise SchemaError(f"{path}: transform code {cell!r} for series {sid!r} is not an integer") from None
        if code != int(code) or int(code) not in TCODES:
            raise SchemaError(f"{path}: transform code {cell!r} for series {sid!r} outside 1..7")
        tcodes[sid] = int(code)

    dates: list[str] = []
    columns: list[list[float]] = [[] for _ in ids]
    for r, row in enumerate(rows[schema.tcode_row + 1:], start=schema.tcode_row + 2):
        if not any(c.strip() for c in row):
            continue
        try:
            stamp = parse_month(row[schema.date_column])
        except (ValueError, IndexError):
            raise ParseError(f"{path}: malformed date at row {r}: {row[:1]!r}") from None
        if dates and month_index(stamp) != month_index(dates[-1]) + 1:
            raise ParseError(f"{path}: row {r}: {stamp} does not follow {dates[-1]} by one month")
        dates.append(stamp)
        for k, (sid, j) in enumerate(zip(ids, col_pos)):
            columns[k].append(_parse_float(row[j] if j < len(row) else "", r, sid))

    series = {sid: np.array(col, dtype=float) for sid, col in zip(ids, columns)}
    target = None
    if schema.target_column is not None and schema.target_column in series:
        target = series.pop(schema.target_column)
    return RawPanel(dates=tuple(dates), series=series, tcodes=tcodes, target=target)


def write_csv(raw: RawPanel, path: str | Path, target_column: str = "USREC") -> None:
    """Inverse of :func:`parse_csv` for the default schema."""
    ids = raw.ids
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        extra = [target_column] if raw.target is not None else []
        w.writerow(["sasdate", *ids, *extra])
        w.writerow(["Transform:", *(raw.tcodes[s] for s in ids), *([""] if extra else [])])
        for t, stamp in enumerate(raw.dates):
            cells = [raw.series[s][t] for s in ids]
            if raw.target is not None:
                cells.append(raw.target[t])
            w.writerow([stamp, *("" if math.isnan(v) else repr(float(v)) for v in cells)])


def read_target_csv(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a two-column ``date,value`` recession indicator file."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    dates, values = [], []
    for r, row in enumerate(rows, start=1):
        try:
            stamp = parse_month(row[0])
        except (ValueError, IndexError):
            if r == 1:
                continue  # header
            raise ParseError(f"{path}: malformed date at row {r}") from None
        dates.append(stamp)
        values.append(_parse_float(row[1] if len(row) > 1 else "", r, "target"))
    return tuple(dates), np.array(values, dtype=float)


def apply_tcode(x, code: int, *, name: str = "series", dates: Sequence[str] | None = None) -> np.ndarray:
    """Stationarising transform of one series by FRED-MD code.

    1 level, 2 first difference, 3 second difference, 4 log, 5 log first
    difference, 6 log second difference, 7 first difference of the simple
    growth rate. NaN inputs propagate; differencing leaves leading NaNs.
    """
    x = np.asarray(x, dtype=float)
    if code not in TCODES:
        raise DomainError(f"{name}: transform code {code} outside 1..7")
    if code in (4, 5, 6):
        bad = np.flatnonzero(x <= 0)
        if bad.size:
            where = dates[bad[0]] if dates is not None else f"position {bad[0]}"
            raise DomainError(f"{name}: non-positive value {x[bad[0]]} at {where} under log transform {code}")
    if code == 7:
        # growth rates can change sign (e.g. NONBORRES); only a zero base is undefined
        bad = np.flatnonzero(x[:-1] == 0)
        if bad.size:
            where = dates[bad[0]] if dates is not None else f"position {bad[0]}"
            raise DomainError(f"{name}: zero value at {where} under growth-rate transform")

    def diff(v: np.ndarray) -> np.ndarray:
        out = np.full_like(v, np.nan)
        out[1:] = v[1:] - v[:-1]
        return out

    if code == 1:
        return x.copy()
    if code == 2:
        return diff(x)
    if code == 3:
        return diff(diff(x))
    if code == 4:
        return np.log(x)
    if code == 5:
        return diff(np.log(x))
    if code == 6:
        return diff(diff(np.log(x)))
    growth = np.full_like(x, np.nan)
    growth[1:] = x[1:] / x[:-1] - 1.0
    return diff(growth)


def _resolve_sector(sid: str, sectors: Mapping[str, Sector | str] | None) -> Sector | None:
    if sectors is not None and sid in sectors:
        return Sector.parse(sectors[sid])
    return SECTOR_OF.get(sid)


def exclude_and_align(
    raw: RawPanel,
    exclusions: Iterable[str] = DEFAULT_EXCLUSIONS,
    *,
    target: np.ndarray | None = None,
    sectors: Mapping[str, Sector | str] | None = None,
) -> PanelMatrix:
    """Transform, drop excluded series and trim to the common window.

    The retained window runs from the latest first observation to the
    earliest last observation across all series and the target. Gaps inside
    that window are an error; nothing is imputed.
    """
    exclusions = list(dict.fromkeys(exclusions))
    unknown = [sid for sid in exclusions if sid not in raw.series]
    for sid in unknown:
        logger.warning("exclusion %r not present in panel; ignored", sid)
    keep = [sid for sid in raw.series if sid not in set(exclusions)]
    if not keep:
        raise AlignmentError("no series left after exclusions")

    y = raw.target if target is None else np.asarray(target, dtype=float)
    if y is None:
        raise SchemaError("no recession indicator: set schema.target_column or pass target=")
    if len(y) != len(raw.dates):
        raise SchemaError("target length differs from the number of dates")

    missing_sector = [sid for sid in keep if _resolve_sector(sid, sectors) is None]
    if missing_sector:
        raise SchemaError(f"no sector assignment for series {missing_sector}; pass sectors=")

    transformed = {
        sid: apply_tcode(raw.series[sid], raw.tcodes[sid], name=sid, dates=raw.dates) for sid in keep
    }
    columns = [*transformed.values(), y]
    names = [*keep, "<target>"]
    starts, ends = [], []
    for name, col in zip(names, columns):
        valid = np.flatnonzero(~np.isnan(col))
        if valid.size == 0:
            raise AlignmentError(f"series {name!r} has no valid observations")
        starts.append(valid[0])
        ends.append(valid[-1])
    lo, hi = max(starts), min(ends)
    if lo > hi:
        a = names[int(np.argmax(starts))]
        b = names[int(np.argmin(ends))]
        raise AlignmentError(f"empty common window: {a!r} starts after {b!r} ends")

    values = np.column_stack([transformed[sid][lo:hi + 1] for sid in keep])
    gaps = np.argwhere(np.isnan(values))
    if gaps.size:
        t, j = gaps[0]
        raise AlignmentError(
            f"series {keep[j]!r} has an interior missing value at {raw.dates[lo + t]}; "
            "interior gaps are not imputed"
        )
    yw = y[lo:hi + 1]
    if not np.isin(yw, (0, 1)).all():
        raise SchemaError("target must contain only 0/1 inside the common window")
    meta = tuple(SeriesMeta(sid, _resolve_sector(sid, sectors)) for sid in keep)
    return PanelMatrix(
        dates=raw.dates[lo:hi + 1],
        values=values,
        meta=meta,
        y=yw.astype(np.int8),
        tcodes={sid: raw.tcodes[sid] for sid in keep},
    )


def cyclical_correlations(panel: PanelMatrix, train_end: str) -> np.ndarray:
    """Pearson correlation of each series with the target on rows <= train_end.

    NaN where either side has zero variance.
    """
    n = panel.rows_through(train_end)
    x = panel.values[:n]
    y = panel.y[:n].astype(float)
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    denom = np.sqrt((xc**2).sum(axis=0) * (yc**2).sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = (xc * yc[:, None]).sum(axis=0) / denom
    corr[denom == 0] = np.nan
    return corr


def classify_cyclicality(
    panel: PanelMatrix,
    train_end: str,
    cutoff: float = -0.10,
    overrides: Mapping[str, int] | None = DEFAULT_SIGN_OVERRIDES,
) -> tuple[SeriesMeta, ...]:
    """Assign cyclical orientation signs.

    A series is counter-cyclical (-1) when its training-window correlation
    with the recession indicator is below ``cutoff``. Entries of
    ``overrides`` win over the data rule.
    """
    corr = cyclical_correlations(panel, train_end)
    overrides = dict(overrides or {})
    meta = []
    for m, c in zip(panel.meta, corr):
        if m.series_id in overrides:
            sign = int(overrides[m.series_id])
        elif np.isnan(c):
            logger.warning("correlation undefined for %s (zero variance); treating as pro-cyclical", m.series_id)
            sign = 1
        else:
            sign = -1 if c < cutoff else 1
        meta.append(replace(m, sign=sign))
    return tuple(meta)


def shift_target(y, h: int) -> tuple[np.ndarray, np.ndarray]:
    """Pair each origin ``t`` (0-based) with the label ``y[t + h]``.

    The last ``h`` origins have no label and are dropped.
    """
    if h <= 0:
        raise ValueError(f"horizon must be positive, got {h}")
    y = np.asarray(y)
    n = max(len(y) - h, 0)
    return np.arange(n), y[h:h + n].copy()
