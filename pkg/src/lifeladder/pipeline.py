"""Loading, filtering, imputing and splitting the happiness panel.

The raw input is a delimited text file with one row per (country, year)
and the thirteen panel variables under configurable header aliases. The
pipeline narrows the panel to the 2016-2019 window, drops countries with
too little coverage, fills the remaining gaps with a three-stage mean
cascade and finally splits into a 2016-2018 training part and a 2019
hold-out.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    DataError,
    DuplicateKeyError,
    ImputationError,
    SchemaError,
    SplitError,
)
from . import variables as V

#: Countries surveyed only in 2019 or only in 2018-2019; excluded by name
#: so the panel keeps a uniform 2016-2019 coverage.
EXCLUDED_COUNTRIES = frozenset(
    {
        "Burundi",
        "Jamaica",
        "Somalia",
        "Maldives",
        "Trinidad and Tobago",
        "Congo (Kinshasa)",
        "Malaysia",
        "Comoros",
        "Central African Republic",
        "South Sudan",
        "Swaziland",
        "Bahrain",
    }
)

#: Minimum number of window years a country must have to be retained.
MIN_YEARS = 3


@dataclass(frozen=True)
class RawRow:
    country: str
    year: int
    values: Mapping[str, Optional[float]]


@dataclass(frozen=True)
class RawTable:
    """Panel rows as loaded; cells may be missing (None)."""

    rows: tuple[RawRow, ...]
    variables: tuple[str, ...] = field(default=V.ALL_VARIABLES)

    def __len__(self) -> int:
        return len(self.rows)

    def countries(self) -> tuple[str, ...]:
        return tuple(sorted({r.country for r in self.rows}))


@dataclass(frozen=True)
class FeatureRow:
    country: str
    year: int
    values: Mapping[str, float]


@dataclass(frozen=True)
class FeatureTable:
    """Complete (no missing cells) continuous panel."""

    rows: tuple[FeatureRow, ...]
    variables: tuple[str, ...] = field(default=V.ALL_VARIABLES)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def country_count(self) -> int:
        return len({r.country for r in self.rows})

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(sorted({r.year for r in self.rows}))

    def matrix(self, variables: Sequence[str] = V.PREDICTORS) -> np.ndarray:
        """Values as an (n_rows, len(variables)) float matrix."""
        return np.array(
            [[row.values[v] for v in variables] for row in self.rows],
            dtype=np.float64,
        )

    def target(self, variable: str = V.LIFE_LADDER) -> np.ndarray:
        return np.array([row.values[variable] for row in self.rows], dtype=np.float64)

    def fingerprint(self) -> str:
        """Content hash of the table, for model provenance."""
        digest = hashlib.sha256()
        for row in sorted(self.rows, key=lambda r: (r.country, r.year)):
            digest.update(row.country.encode("utf-8"))
            digest.update(str(row.year).encode("ascii"))
            for v in self.variables:
                digest.update(repr(row.values[v]).encode("ascii"))
        return digest.hexdigest()


@dataclass(frozen=True)
class SplitSpec:
    """Year-based train/test partition of the window."""

    train_years: frozenset[int] = frozenset({2016, 2017, 2018})
    test_year: int = 2019

    def __post_init__(self):
        if self.test_year in self.train_years:
            raise SplitError(
                f"test year {self.test_year} overlaps the training years"
            )


# -- alias configuration ------------------------------------------------------

def read_aliases(path) -> dict[str, str]:
    """Read a [columns] INI section mapping canonical names to file headers.

    Keys are the canonical variable names plus ``country`` and ``year``;
    values are the header spellings used in the input file. Unlisted
    names default to their canonical spelling.
    """
    parser = configparser.ConfigParser(delimiters=("=",))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    if not parser.has_section("columns"):
        raise SchemaError(f"no [columns] section in {path}")
    aliases = dict(parser.items("columns"))
    known = set(V.ALL_VARIABLES) | {"country", "year"}
    for key in aliases:
        if key not in known:
            raise SchemaError(f"unknown canonical column in alias config: {key!r}")
    return aliases


def _parse_cell(text: str) -> Optional[float]:
    # Blank and "NA" cells are missing; so is anything unparseable or
    # non-finite under a locale-independent decimal point.
    text = text.strip()
    if text == "" or text.upper() == "NA":
        return None
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _read_delimited(path):
    """Read a comma-delimited file, skipping leading '#' comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        records = []
        for cells in reader:
            if not cells or (cells[0].startswith("#") and header is None):
                continue
            if header is None:
                header = cells
            else:
                records.append(cells)
    if header is None:
        raise DataError(f"empty file: {path}")
    return header, records


def load_raw(path, aliases: Mapping[str, str] | None = None) -> RawTable:
    """Load the raw panel from a delimited text file.

    ``aliases`` maps canonical column names (plus ``country``/``year``)
    to the header spellings used in the file; omitted names default to
    the canonical spelling. Extra columns are ignored. Unparseable
    numeric cells become missing values.
    """
    aliases = dict(aliases or {})
    header, records = _read_delimited(path)
    positions = {name: i for i, name in enumerate(header)}

    def column(canonical: str) -> int:
        actual = aliases.get(canonical, canonical)
        if actual not in positions:
            raise SchemaError(
                f"missing required column: {canonical!r} (header {actual!r})"
            )
        return positions[actual]

    country_col = column("country")
    year_col = column("year")
    var_cols = {v: column(v) for v in V.ALL_VARIABLES}

    rows = []
    seen: set[tuple[str, int]] = set()
    for cells in records:
        country = cells[country_col].strip()
        try:
            year = int(cells[year_col].strip())
        except ValueError:
            raise DataError(
                f"unparseable year {cells[year_col]!r} for country {country!r}"
            ) from None
        if year not in V.SURVEY_YEARS:
            raise DataError(f"year {year} outside the survey range for {country!r}")
        key = (country, year)
        if key in seen:
            raise DuplicateKeyError(f"duplicate row for {key}")
        seen.add(key)
        values = {v: _parse_cell(cells[c]) for v, c in var_cols.items()}
        rows.append(RawRow(country=country, year=year, values=values))
    return RawTable(rows=tuple(rows))


def filter_countries(raw: RawTable) -> RawTable:
    """Narrow to the 2016-2019 window and drop thin countries.

    The named late-start countries are removed outright; any other
    country with fewer than three window years is dropped too, so every
    retained country has at least three of the four years.
    """
    window = [r for r in raw.rows if r.year in V.WINDOW_YEARS]
    years_per_country: dict[str, set[int]] = {}
    for r in window:
        years_per_country.setdefault(r.country, set()).add(r.year)
    keep = {
        c
        for c, years in years_per_country.items()
        if c not in EXCLUDED_COUNTRIES and len(years) >= MIN_YEARS
    }
    return RawTable(
        rows=tuple(r for r in window if r.country in keep),
        variables=raw.variables,
    )


def impute(raw: RawTable) -> FeatureTable:
    """Fill every missing cell with the mean cascade.

    Preference order per cell: the country's own mean over its observed
    window years for that variable (this also covers variables absent
    for a whole year, such as the governance scores in 2019); failing
    that, the mean over every observed cell of the variable across all
    countries in the window. A variable observed nowhere is an error.

    Non-missing cells are never altered, and the fill values do not
    depend on row order.
    """
    by_country: dict[tuple[str, str], list[float]] = {}
    by_variable: dict[str, list[float]] = {v: [] for v in raw.variables}
    for row in raw.rows:
        for v in raw.variables:
            x = row.values[v]
            if x is not None:
                by_country.setdefault((row.country, v), []).append(x)
                by_variable[v].append(x)

    # Sorting before summation pins the floating-point rounding, so the
    # fills are bit-identical under any row order.
    country_mean = {k: sum(sorted(vals)) / len(vals) for k, vals in by_country.items()}
    global_mean = {}
    for v, vals in by_variable.items():
        if not vals and raw.rows:
            raise ImputationError(f"variable {v!r} has no observed value anywhere")
        if vals:
            global_mean[v] = sum(sorted(vals)) / len(vals)

    rows = []
    for row in raw.rows:
        values = {}
        for v in raw.variables:
            x = row.values[v]
            if x is None:
                x = country_mean.get((row.country, v), global_mean.get(v))
            values[v] = x
        rows.append(FeatureRow(country=row.country, year=row.year, values=values))
    return FeatureTable(rows=tuple(rows), variables=raw.variables)


def split(ft: FeatureTable, spec: SplitSpec = SplitSpec()) -> tuple[FeatureTable, FeatureTable]:
    """Partition a complete table into train and test by year."""
    train = tuple(r for r in ft.rows if r.year in spec.train_years)
    test = tuple(r for r in ft.rows if r.year == spec.test_year)
    if not train:
        raise SplitError("split leaves the training partition empty")
    if not test:
        raise SplitError("split leaves the test partition empty")
    return (
        FeatureTable(rows=train, variables=ft.variables),
        FeatureTable(rows=test, variables=ft.variables),
    )


# -- delimited serialization ---------------------------------------------------

def write_feature_csv(ft: FeatureTable, path, provenance: str | None = None):
    """Write a complete table: canonical column order, 6 decimal places."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "year", *ft.variables])
        for row in sorted(ft.rows, key=lambda r: (r.country, r.year)):
            cells = [row.country, str(row.year)]
            cells += [f"{row.values[v]:.6f}" for v in ft.variables]
            writer.writerow(cells)


def read_feature_csv(path) -> FeatureTable:
    """Read a table previously written by :func:`write_feature_csv`."""
    header, records = _read_delimited(path)
    if header[:2] != ["country", "year"]:
        raise SchemaError(f"expected country,year leading columns in {path}")
    variables = tuple(header[2:])
    rows = []
    for rec in records:
        values = {}
        for v, cell in zip(variables, rec[2:]):
            x = _parse_cell(cell)
            if x is None:
                raise DataError(
                    f"missing or unparseable cell for {v!r} in {rec[0]!r}/{rec[1]}"
                )
            values[v] = x
        rows.append(FeatureRow(country=rec[0], year=int(rec[1]), values=values))
    return FeatureTable(rows=tuple(rows), variables=variables)
