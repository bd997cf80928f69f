"""Three-level discretization of the continuous panel.

Every variable is mapped onto the ordered levels Low < Medium < High
using fixed bin edges. The built-in scheme (:func:`default_scheme`)
carries the hand-tuned edges for the thirteen panel variables; bins are
left-closed, the top bin is right-closed, and values outside the edge
range clamp to the nearest extreme level so future observations still
discretize.
"""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InvalidValueError, ParameterError, SchemaError
from .pipeline import FeatureTable
from . import variables as V


class Level(enum.IntEnum):
    """Ordered categorical level of a discretized variable."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, text: str) -> "Level":
        try:
            return _BY_LABEL[text.strip().lower()]
        except KeyError:
            raise ParameterError(
                f"unknown level {text!r}; expected one of Low, Medium, High"
            ) from None


_LABELS = {Level.LOW: "Low", Level.MEDIUM: "Medium", Level.HIGH: "High"}
_BY_LABEL = {"low": Level.LOW, "medium": Level.MEDIUM, "high": Level.HIGH}

LEVELS = (Level.LOW, Level.MEDIUM, Level.HIGH)
N_LEVELS = 3


@dataclass(frozen=True)
class DiscretizationScheme:
    """Per-variable bin edges (low_edge, cut1, cut2, high_edge).

    The three bins are [low_edge, cut1) -> Low, [cut1, cut2) -> Medium
    and [cut2, high_edge] -> High. Edges must be strictly increasing.
    """

    edges: Mapping[str, tuple[float, float, float, float]]

    def __post_init__(self):
        for var, e in self.edges.items():
            if len(e) != 4:
                raise ParameterError(f"{var}: expected 4 edges, got {len(e)}")
            if not (e[0] < e[1] < e[2] < e[3]):
                raise ParameterError(
                    f"{var}: edges must be strictly increasing, got {e}"
                )

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.edges)

    def __contains__(self, variable: str) -> bool:
        return variable in self.edges

    def __getitem__(self, variable: str) -> tuple[float, float, float, float]:
        return self.edges[variable]


def default_scheme() -> DiscretizationScheme:
    """The built-in three-level scheme for the thirteen panel variables."""
    return DiscretizationScheme(
        edges={
            V.LOG_GDP: (6.81, 8.57, 9.94, 11.46),
            V.GINI: (0.19, 0.38, 0.57, 0.85),
            V.GENEROSITY: (-0.33, -0.09, 0.19, 0.66),
            V.POSITIVE_AFFECT: (0.32, 0.62, 0.75, 0.92),
            V.NEGATIVE_AFFECT: (0.09, 0.25, 0.36, 0.59),
            V.CORRUPTION: (0.04, 0.51, 0.77, 0.97),
            V.CONFIDENCE: (0.07, 0.41, 0.66, 0.99),
            V.HEALTHY_LIFE_EXPECTANCY: (46.59, 60.62, 69.13, 77.11),
            V.DEMOCRATIC_QUALITY: (-2.38, -0.92, 0.32, 1.58),
            V.DELIVERY_QUALITY: (-1.93, -0.47, 0.67, 2.10),
            V.FREEDOM: (0.30, 0.66, 0.82, 0.99),
            V.SOCIAL_SUPPORT: (0.41, 0.71, 0.85, 0.98),
            V.LIFE_LADDER: (2.37, 4.83, 6.18, 7.86),
        }
    )


def bin_of(value: float, variable: str, scheme: DiscretizationScheme) -> Level:
    """Map one value to its level under ``scheme``.

    Values below the low edge clamp to Low, values above the high edge
    clamp to High. NaN has no level.
    """
    if variable not in scheme:
        raise SchemaError(f"variable not in scheme: {variable!r}")
    if math.isnan(value):
        raise InvalidValueError(f"cannot discretize NaN for {variable!r}")
    _, cut1, cut2, _ = scheme[variable]
    if value < cut1:
        return Level.LOW
    if value < cut2:
        return Level.MEDIUM
    return Level.HIGH


@dataclass(frozen=True)
class DiscreteRow:
    country: str
    year: int
    values: Mapping[str, Level]


@dataclass(frozen=True)
class DiscreteTable:
    """Row-per-(country, year) table of levels, one per variable."""

    rows: tuple[DiscreteRow, ...]
    variables: tuple[str, ...] = field(default=V.ALL_VARIABLES)

    def __len__(self) -> int:
        return len(self.rows)

    def codes(self):
        """Integer level codes as an (n_rows, n_variables) int8 matrix."""
        import numpy as np

        return np.array(
            [[int(row.values[v]) for v in self.variables] for row in self.rows],
            dtype=np.int8,
        )


def discretize(ft: FeatureTable, scheme: DiscretizationScheme) -> DiscreteTable:
    """Discretize a complete continuous table elementwise.

    Row count and row identity are preserved; every variable present in
    the table must be covered by the scheme.
    """
    for var in ft.variables:
        if var not in scheme:
            raise SchemaError(f"variable not in scheme: {var!r}")
    rows = tuple(
        DiscreteRow(
            country=row.country,
            year=row.year,
            values={v: bin_of(row.values[v], v, scheme) for v in ft.variables},
        )
        for row in ft.rows
    )
    return DiscreteTable(rows=rows, variables=ft.variables)


# -- serialization -----------------------------------------------------------

def write_scheme(scheme: DiscretizationScheme, path, provenance: str | None = None):
    """Write a scheme as a human-editable INI file."""
    parser = configparser.ConfigParser(delimiters=("=",))
    parser.optionxform = str
    parser["bins"] = {
        var: ", ".join(repr(e) for e in edges)
        for var, edges in scheme.edges.items()
    }
    with open(path, "w", encoding="utf-8") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        parser.write(fh)


def read_scheme(path) -> DiscretizationScheme:
    parser = configparser.ConfigParser(delimiters=("=",))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    if not parser.has_section("bins"):
        raise SchemaError(f"no [bins] section in {path}")
    edges = {}
    for var, text in parser.items("bins"):
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if len(parts) != 4:
            raise SchemaError(f"{var}: expected 4 comma-separated edges")
        edges[var] = tuple(float(p) for p in parts)
    return DiscretizationScheme(edges=edges)


def write_discrete_csv(dt: DiscreteTable, path, provenance: str | None = None):
    """Serialize a discrete table with levels spelled Low/Medium/High."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        if provenance:
            fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "year", *dt.variables])
        for row in sorted(dt.rows, key=lambda r: (r.country, r.year)):
            cells = [row.country, str(row.year)]
            cells += [row.values[v].label for v in dt.variables]
            writer.writerow(cells)


def read_discrete_csv(path) -> DiscreteTable:
    from .pipeline import _read_delimited  # shared comment-aware reader

    header, records = _read_delimited(path)
    if header[:2] != ["country", "year"]:
        raise SchemaError(f"expected country,year leading columns in {path}")
    variables = tuple(header[2:])
    rows = []
    for rec in records:
        values = {
            v: Level.from_label(cell) for v, cell in zip(variables, rec[2:])
        }
        rows.append(DiscreteRow(country=rec[0], year=int(rec[1]), values=values))
    return DiscreteTable(rows=tuple(rows), variables=variables)
