"""Durable per-prime order cache and report rendering."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

log = logging.getLogger(__name__)

CACHE_ENV = "SUPPORT_LAB_CACHE"


class CacheError(OSError):
    pass


@dataclass(frozen=True)
class CacheRecord:
    curve: str
    point: str
    p: int
    group_order: int
    point_order: int

    @property
    def key(self):
        return (self.curve, self.point, self.p)

    def to_line(self):
        return f"{self.curve}|{self.point}|{self.p}|{self.group_order}|{self.point_order}\n"

    @classmethod
    def from_line(cls, line):
        curve, point, p, n, m = line.rstrip("\n").split("|")
        if len(curve.split(",")) != 5 or len(point.split(":")) != 3:
            raise ValueError("bad fingerprint")
        [int(c) for c in curve.split(",")]
        [int(c) for c in point.split(":")]
        rec = cls(curve, point, int(p), int(n), int(m))
        if rec.p < 2 or rec.point_order < 1 or rec.group_order % rec.point_order:
            raise ValueError("inconsistent orders")
        return rec


class OrderCache:
    """Append-only record store, mirrored in memory.

    With ``path=None`` the cache lives only in memory.  Duplicate keys are
    allowed on disk; the last record read wins.  Lines that fail to parse are
    skipped and counted in ``corrupt_lines``.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self.corrupt_lines = 0
        self._records: dict[tuple[str, str, int], CacheRecord] = {}
        self._lock = threading.Lock()
        if self.path is not None:
            self._load()

    def _load(self):
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch(exist_ok=True)
            text = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CacheError(f"cache path {self.path} is not usable: {exc}") from exc
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                rec = CacheRecord.from_line(line)
            except ValueError:
                self.corrupt_lines += 1
                continue
            self._records[rec.key] = rec
        if self.corrupt_lines:
            log.warning("skipped %d corrupt cache line(s) in %s", self.corrupt_lines, self.path)

    def __len__(self):
        return len(self._records)

    def records(self):
        return list(self._records.values())

    def get(self, curve: str, point: str, p: int) -> CacheRecord | None:
        return self._records.get((curve, point, p))

    def put(self, record: CacheRecord):
        self.put_many([record])

    def put_many(self, records):
        records = list(records)
        with self._lock:
            for rec in records:
                self._records[rec.key] = rec
            if self.path is not None and records:
                try:
                    with self.path.open("a", encoding="utf-8", newline="\n") as fh:
                        fh.writelines(rec.to_line() for rec in records)
                except OSError as exc:
                    raise CacheError(f"cannot write cache {self.path}: {exc}") from exc


def default_cache_path():
    return os.environ.get(CACHE_ENV) or None


# -- rendering -------------------------------------------------------------


def format_value(v):
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if v is None:
        return ""
    return str(v)


def decimal6(q: Fraction | None) -> str:
    """Exact rational rounded half-up to six places."""
    if q is None:
        return "undefined"
    scaled = q * 10**6
    n = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 10**6}.{n % 10**6:06d}"


def render_report(report, fmt: str = "csv") -> bytes:
    """Serialize any report exposing ``columns`` and ``table()``.

    CSV has a header line and LF endings; json-lines has one object per row
    with keys in column order.
    """
    columns = list(report.columns)
    rows = list(report.table())
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(v) for v in row])
        return buf.getvalue().encode("utf-8")
    if fmt == "json-lines":
        out = []
        for row in rows:
            obj = {}
            for k, v in zip(columns, row):
                obj[k] = v if isinstance(v, (int, str)) and not isinstance(v, bool) else format_value(v)
            out.append(json.dumps(obj, separators=(",", ":")) + "\n")
        return "".join(out).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")
