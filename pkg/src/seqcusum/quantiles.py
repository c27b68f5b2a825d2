"""Quantile table: entries, CSV persistence, lookup, and the shipped default."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .detectors import DetectorKind
from .errors import ConfigurationError, TableError

HEADER = ["kind", "eta", "gamma", "alpha", "quantile", "stderr", "provenance"]
PROVENANCES = ("simulated", "shipped")
TABLE_ENV = "SEQCUSUM_TABLE"


@dataclass(frozen=True)
class QuantileEntry:
    kind: DetectorKind
    eta: float
    gamma: float
    alpha: float
    quantile: float
    stderr: float = 0.0
    provenance: str = "simulated"

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DetectorKind.parse(self.kind))
        if not self.kind.uses_eta:
            object.__setattr__(self, "eta", 0.0)

    @property
    def key(self) -> tuple[str, float, float, float]:
        return (self.kind.value, float(self.eta), float(self.gamma), float(self.alpha))


def _fmt(v: float) -> str:
    # shortest repr that round-trips exactly
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


class QuantileTable:
    """Collection of :class:`QuantileEntry` with unique ``(kind, eta, gamma, alpha)`` keys."""

    def __init__(self, entries: Iterable[QuantileEntry] = ()) -> None:
        self._entries: list[QuantileEntry] = []
        for e in entries:
            self.add(e)

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def add(self, entry: QuantileEntry, replace: bool = False) -> None:
        for i, e in enumerate(self._entries):
            if e.kind is entry.kind and all(_same(a, b) for a, b in zip(e.key[1:], entry.key[1:])):
                if not replace:
                    raise TableError(f"duplicate quantile cell {_describe(entry)}")
                self._entries[i] = entry
                return
        self._entries.append(entry)

    def find(self, kind, eta: float, gamma: float, alpha: float) -> QuantileEntry | None:
        kind = DetectorKind.parse(kind)
        if not kind.uses_eta:
            eta = 0.0
        for e in self._entries:
            if e.kind is kind and _same(e.eta, eta) and _same(e.gamma, gamma) and _same(e.alpha, alpha):
                return e
        return None

    def lookup(self, kind, eta: float, gamma: float, alpha: float) -> QuantileEntry:
        """Exact cell lookup; no interpolation across ``(eta, gamma)``."""
        found = self.find(kind, eta, gamma, alpha)
        if found is not None:
            return found
        kind = DetectorKind.parse(kind)
        near = sorted(
            (e for e in self._entries if e.kind is kind),
            key=lambda e: (abs(e.alpha - alpha), abs(e.eta - eta) + abs(e.gamma - gamma)),
        )[:4]
        hint = ", ".join(_describe(e) for e in near) or "none for this detector"
        raise ConfigurationError(
            f"no quantile cell for kind={kind.value} eta={eta:g} gamma={gamma:g} alpha={alpha:g}; "
            f"nearest available: {hint}"
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for e in self._entries:
            w.writerow([e.kind.value, _fmt(e.eta), _fmt(e.gamma), _fmt(e.alpha), _fmt(e.quantile), _fmt(e.stderr), e.provenance])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> QuantileTable:
        rows = csv.reader(io.StringIO(text))
        table = cls()
        header_seen = False
        for lineno, row in enumerate(rows, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if not header_seen:
                if [c.strip() for c in row] != HEADER:
                    raise TableError(f"line {lineno}: expected header {','.join(HEADER)}")
                header_seen = True
                continue
            if len(row) != len(HEADER):
                raise TableError(f"line {lineno}: expected {len(HEADER)} fields, got {len(row)}")
            try:
                kind = DetectorKind.parse(row[0])
                eta, gamma, alpha, q, se = (float(c) for c in row[1:6])
            except (ValueError, ConfigurationError) as exc:
                raise TableError(f"line {lineno}: {exc}") from None
            prov = row[6].strip()
            if prov not in PROVENANCES:
                raise TableError(f"line {lineno}: unknown provenance {prov!r}")
            if not (q > 0 and math.isfinite(q)) or not (0 < alpha < 0.5) or not se >= 0:
                raise TableError(f"line {lineno}: invalid quantile/alpha/stderr values")
            entry = QuantileEntry(kind, eta, gamma, alpha, q, se, prov)
            try:
                table.add(entry)
            except TableError as exc:
                raise TableError(f"line {lineno}: {exc}") from None
        if not header_seen:
            raise TableError("line 1: empty quantile table")
        return table


def _describe(e: QuantileEntry) -> str:
    return f"(kind={e.kind.value}, eta={e.eta:g}, gamma={e.gamma:g}, alpha={e.alpha:g})"


def table_store(entries: Iterable[QuantileEntry], path) -> None:
    table = entries if isinstance(entries, QuantileTable) else QuantileTable(entries)
    Path(path).write_text(table.to_csv())


def table_load(path) -> QuantileTable:
    return QuantileTable.from_csv(Path(path).read_text())


def default_table() -> QuantileTable:
    """The table named by ``$SEQCUSUM_TABLE``, else the one shipped with the package."""
    env = os.environ.get(TABLE_ENV)
    if env:
        return table_load(env)
    return shipped_table()


def shipped_table() -> QuantileTable:
    text = resources.files("seqcusum.data").joinpath("quantiles.csv").read_text()
    return QuantileTable.from_csv(text)
