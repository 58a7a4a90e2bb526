"""Tick CSV ingestion.

Format: header ``time,asset,log_price``; ``time`` is decimal seconds from
the session open (or an ISO-8601 timestamp, converted relative to
``session_open``); ``asset`` is any string id; ``log_price`` is a
log-price, or a raw price when ``raw_prices`` is set.

Rows of different assets may interleave out of time order by up to
``reorder_horizon`` seconds; within one asset, times must be strictly
increasing.
"""
from __future__ import annotations

import csv
import heapq
import math
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator

from .errors import IngestionError, OrderingError

__all__ = ["TickRecord", "read_ticks", "reorder", "write_ticks", "HEADER"]

HEADER = ("time", "asset", "log_price")


@dataclass(frozen=True)
class TickRecord:
    time: float
    asset: int
    log_price: float
    line: int = 0


_FRACTION = re.compile(r"(T?\d{2}:\d{2}:\d{2})\.(\d+)")


def _parse_iso(text):
    # datetime.fromisoformat before 3.11 wants 3 or 6 fractional digits and no "Z"
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    text = _FRACTION.sub(lambda m: f"{m.group(1)}.{m.group(2)[:6].ljust(6, '0')}", text)
    return datetime.fromisoformat(text)


class _Clock:
    def __init__(self, session_open):
        self.origin = _parse_iso(session_open) if session_open else None

    def seconds(self, text):
        try:
            return float(text)
        except ValueError:
            pass
        stamp = _parse_iso(text)
        if self.origin is None:
            self.origin = stamp
        return (stamp - self.origin).total_seconds()


def read_ticks(lines: Iterable[str], assets=None, raw_prices=False, session_open=None, names=None) -> Iterator[TickRecord]:
    """Parse tick rows lazily.

    ``assets`` fixes the asset-id to index map; unknown ids are then an
    error.  Without it, ids are indexed in order of first appearance and
    appended to ``names`` (if given) as they are discovered.
    """
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestionError("empty tick file: missing header", 1) from None
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise IngestionError(f"expected header {','.join(HEADER)}, got {','.join(header)}", 1)
    index = {a: i for i, a in enumerate(assets)} if assets is not None else {}
    fixed = assets is not None
    last = {}
    clock = _Clock(session_open)
    seen_rows = False
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise IngestionError(f"expected 3 fields, got {len(row)}", lineno)
        t_txt, asset, p_txt = (c.strip() for c in row)
        try:
            t = clock.seconds(t_txt)
            price = float(p_txt)
        except (ValueError, TypeError) as exc:
            raise IngestionError(f"unparsable value: {exc}", lineno) from None
        if raw_prices:
            if not price > 0:
                raise IngestionError(f"raw price must be positive, got {p_txt}", lineno)
            price = math.log(price)
        if not (math.isfinite(t) and math.isfinite(price)):
            raise IngestionError("non-finite time or price", lineno)
        if asset not in index:
            if fixed:
                raise IngestionError(f"unknown asset {asset!r}", lineno)
            index[asset] = len(index)
            if names is not None:
                names.append(asset)
        k = index[asset]
        if k in last and t <= last[k]:
            raise IngestionError(f"asset {asset!r}: time {t_txt} not after previous tick", lineno)
        last[k] = t
        seen_rows = True
        yield TickRecord(t, k, price, lineno)
    if not seen_rows:
        raise IngestionError("tick file contains no ticks", reader.line_num or 1)


def reorder(records: Iterable[TickRecord], horizon: float = 0.0):
    """Merge records into time-ordered ``(time, [(asset, price), ...])`` groups.

    A record is released once a record at least ``horizon`` seconds later
    has been read; memory is bounded by the ticks inside that window.
    """
    heap = []
    released = -math.inf
    seq = 0

    def pop_group():
        t, _, k, p = heapq.heappop(heap)
        group = [(k, p)]
        while heap and heap[0][0] == t:
            _, _, k2, p2 = heapq.heappop(heap)
            group.append((k2, p2))
        return t, group

    for rec in records:
        if rec.time <= released:
            raise OrderingError(
                f"line {rec.line}: tick at {rec.time!r} arrived after ticks up to {released!r} were released; "
                "increase reorder_horizon"
            )
        heapq.heappush(heap, (rec.time, seq, rec.asset, rec.log_price))
        seq += 1
        cutoff = rec.time - horizon
        while heap and heap[0][0] < cutoff:
            t, group = pop_group()
            released = t
            yield t, group
    while heap:
        t, group = pop_group()
        yield t, group


def write_ticks(fh, streams, asset_names=None) -> None:
    """Write tick streams as one time-ordered CSV (17 significant digits)."""
    from .sync import merge_ticks

    names = asset_names or [str(k + 1) for k in range(len(streams))]
    writer = csv.writer(fh)
    writer.writerow(HEADER)
    for t, group in merge_ticks(streams):
        for k, p in sorted(group):
            writer.writerow([f"{t:.17g}", names[k], f"{p:.17g}"])
