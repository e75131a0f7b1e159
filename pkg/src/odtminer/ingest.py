"""Trip ingestion and aggregation.

CSV trip records are discretized into timeslots and summed into the atomic
support table; the atomic-pattern set is the top fraction of that table by
support. Also holds the file loaders (graph, aggregated table, instance
bundle) and the duration-dispersion statistic.
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from math import fsum
from pathlib import Path
from typing import Iterable, Mapping

from .model import RegionGraph, ValidationError, as_fraction

PERIOD_MINUTES = 24 * 60
TRIP_COLUMNS = ("origin", "destination", "time", "flow")


@dataclass(frozen=True)
class TripRecord:
    """One validated trip: atomic origin/destination, start minute, flow."""

    origin: int
    destination: int
    start_minute: int
    flow: int


@dataclass(frozen=True)
class SupportTable:
    """Aggregated flow per atomic (origin, destination, timeslot) triple.

    Only nonzero entries are stored; keys with no recorded flow have support 0.
    """

    entries: Mapping[tuple[int, int, int], int]
    n_regions: int
    n_slots: int

    def __len__(self) -> int:
        return len(self.entries)

    def total_flow(self) -> int:
        return sum(self.entries.values())

    def restrict(self, v_o, v_d, t_range) -> "SupportTable":
        """Keep only entries with origin in v_o, destination in v_d, slot in t_range."""
        lo, hi = t_range
        kept = {
            k: s
            for k, s in self.entries.items()
            if k[0] in v_o and k[1] in v_d and lo <= k[2] <= hi
        }
        return SupportTable(kept, self.n_regions, self.n_slots)


@dataclass(frozen=True)
class AtomicPatternSet:
    """Atomic triples whose support clears the realized top-fraction cutoff.

    ``dest_masks[r]`` / ``src_masks[r]`` are region bitmasks: bit d of
    ``dest_masks[r]`` is set iff some member (r, d, t) exists, bit o of
    ``src_masks[r]`` iff some member (o, r, t) exists.
    """

    members: frozenset[tuple[int, int, int]]
    minsup: int
    dest_masks: tuple[int, ...]
    src_masks: tuple[int, ...]
    n_regions: int
    n_slots: int

    def dests(self, region: int) -> set[int]:
        return _mask_to_set(self.dest_masks[region])

    def srcs(self, region: int) -> set[int]:
        return _mask_to_set(self.src_masks[region])


def _mask_to_set(mask: int) -> set[int]:
    out = set()
    i = 0
    while mask:
        if mask & 1:
            out.add(i)
        mask >>= 1
        i += 1
    return out


def select_atomic_patterns(table: SupportTable, s_a) -> AtomicPatternSet:
    """Pick the top ``s_a`` fraction of recorded triples by support.

    The realized cutoff is the support of the ceil(s_a * n)-th largest entry;
    everything at or above the cutoff is kept, so boundary ties are included
    and the result does not depend on input order.
    """
    s_a = as_fraction(s_a)
    if not 0 < s_a <= 1:
        raise ValidationError("s_a must be in (0, 1]")
    if not table.entries:
        raise ValidationError("no atomic triples")
    supports = sorted(table.entries.values(), reverse=True)
    rank = math.ceil(s_a * len(supports))
    minsup = supports[rank - 1]
    members = frozenset(k for k, s in table.entries.items() if s >= minsup)
    dest_masks = [0] * table.n_regions
    src_masks = [0] * table.n_regions
    for o, d, _t in members:
        dest_masks[o] |= 1 << d
        src_masks[d] |= 1 << o
    return AtomicPatternSet(
        members, minsup, tuple(dest_masks), tuple(src_masks), table.n_regions, table.n_slots
    )


def map_to_slot(minutes: int, slot_minutes: int, period_minutes: int = PERIOD_MINUTES) -> int:
    """Floor-divide a minute offset into its timeslot index."""
    if slot_minutes <= 0 or period_minutes % slot_minutes:
        raise ValidationError("slot width must divide the period length")
    if not 0 <= minutes < period_minutes:
        raise ValidationError(f"minute {minutes} outside [0, {period_minutes})")
    return minutes // slot_minutes


def parse_time(text) -> int:
    """Accept 'HH:MM' (single-digit hours included) or a plain minute count."""
    s = str(text).strip()
    if ":" in s:
        hh, mm = s.split(":", 1)
        h, m = int(hh), int(mm)
        if h < 0 or not 0 <= m < 60:
            raise ValueError(f"bad clock time: {text!r}")
        return h * 60 + m
    return int(s)


def aggregate(
    rows: Iterable,
    slot_minutes: int,
    n_regions: int,
    period_minutes: int = PERIOD_MINUTES,
) -> tuple[SupportTable, Counter]:
    """Aggregate raw (origin, destination, time, flow) rows into a table.

    Malformed rows are skipped and tallied by reason instead of aborting; the
    support of each key is the exact integer flow sum of the rows mapped to it.
    Returns the table and the per-reason rejection tally.
    """
    if slot_minutes <= 0 or period_minutes % slot_minutes:
        raise ValidationError("slot width must divide the period length")
    rejected: Counter = Counter()
    entries: dict[tuple[int, int, int], int] = {}
    for row in rows:
        try:
            o_raw, d_raw, t_raw, f_raw = row
            o, d, flow = int(o_raw), int(d_raw), int(f_raw)
            minutes = parse_time(t_raw)
        except (TypeError, ValueError):
            rejected["parse"] += 1
            continue
        if not (0 <= o < n_regions and 0 <= d < n_regions):
            rejected["bad-region"] += 1
            continue
        if o == d:
            rejected["self-trip"] += 1
            continue
        if flow <= 0:
            rejected["bad-flow"] += 1
            continue
        if not 0 <= minutes < period_minutes:
            rejected["bad-time"] += 1
            continue
        key = (o, d, minutes // slot_minutes)
        entries[key] = entries.get(key, 0) + flow
    table = SupportTable(entries, n_regions, period_minutes // slot_minutes)
    return table, rejected


def aggregate_csv(
    path,
    slot_minutes: int,
    n_regions: int,
    period_minutes: int = PERIOD_MINUTES,
) -> tuple[SupportTable, Counter]:
    """Aggregate a headered trips CSV (origin,destination,time,flow)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != list(TRIP_COLUMNS):
            raise ValidationError(
                f"trips file must start with header {','.join(TRIP_COLUMNS)}"
            )
        return aggregate(reader, slot_minutes, n_regions, period_minutes)


def write_support_csv(table: SupportTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["o", "d", "t", "support"])
        for (o, d, t), s in sorted(table.entries.items()):
            writer.writerow([o, d, t, s])


def load_support_csv(path, n_regions: int | None = None, n_slots: int | None = None) -> SupportTable:
    """Load an aggregated table; region/slot counts are inferred when absent."""
    entries: dict[tuple[int, int, int], int] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["o", "d", "t", "support"]:
            raise ValidationError("aggregated file must start with header o,d,t,support")
        for lineno, row in enumerate(reader, start=2):
            try:
                o, d, t, s = (int(x) for x in row)
            except (TypeError, ValueError):
                raise ValidationError(f"{path}: line {lineno}: malformed row {row!r}") from None
            if o == d:
                raise ValidationError(f"{path}: line {lineno}: origin equals destination")
            if t < 0 or o < 0 or d < 0 or s <= 0:
                raise ValidationError(f"{path}: line {lineno}: out-of-range value")
            if n_regions is not None and max(o, d) >= n_regions:
                raise ValidationError(
                    f"{path}: line {lineno}: region id {max(o, d)} outside 0..{n_regions - 1}"
                )
            if n_slots is not None and t >= n_slots:
                raise ValidationError(
                    f"{path}: line {lineno}: slot {t} outside 0..{n_slots - 1}"
                )
            key = (o, d, t)
            if key in entries:
                raise ValidationError(f"{path}: line {lineno}: duplicate key {key}")
            entries[key] = s
    if not entries:
        raise ValidationError("no atomic triples")
    if n_regions is None:
        n_regions = max(max(o, d) for o, d, _ in entries) + 1
    if n_slots is None:
        n_slots = max(t for _, _, t in entries) + 1
    return SupportTable(entries, n_regions, n_slots)


def load_region_graph(edge_list: Iterable[tuple[int, int]], n_regions: int) -> RegionGraph:
    """Build the region graph from (u, v) pairs; duplicates and both
    orientations collapse to one undirected edge."""
    return RegionGraph.from_edges(edge_list, n_regions)


def read_graph_file(path, n_regions: int | None = None) -> RegionGraph:
    """Parse whitespace-separated ``u v`` edge lines; errors name the line."""
    pairs: list[tuple[int, int]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}: line {lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValidationError(f"{path}: line {lineno}: non-integer ids {line!r}") from None
            if u == v:
                raise ValidationError(f"{path}: line {lineno}: self-loop on region {u}")
            pairs.append((u, v))
    if n_regions is None:
        if not pairs:
            raise ValidationError(f"{path}: no edges and no explicit region count")
        n_regions = max(max(u, v) for u, v in pairs) + 1
    return load_region_graph(pairs, n_regions)


def write_graph_file(graph: RegionGraph, path) -> None:
    with open(path, "w") as fh:
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")


def write_instance(table: SupportTable, graph: RegionGraph, path) -> None:
    """Write the self-contained instance bundle (graph plus support table)."""
    obj = {
        "n_regions": table.n_regions,
        "n_slots": table.n_slots,
        "edges": [list(e) for e in graph.edges()],
        "supports": [[o, d, t, s] for (o, d, t), s in sorted(table.entries.items())],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, separators=(",", ":"))
        fh.write("\n")


def load_instance(path) -> tuple[SupportTable, RegionGraph]:
    """Load an instance bundle written by :func:`write_instance`."""
    with open(path) as fh:
        obj = json.load(fh)
    try:
        n_regions = int(obj["n_regions"])
        n_slots = int(obj["n_slots"])
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
        supports = [(int(o), int(d), int(t), int(s)) for o, d, t, s in obj["supports"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed instance bundle: {exc}") from None
    graph = load_region_graph(edges, n_regions)
    entries: dict[tuple[int, int, int], int] = {}
    for o, d, t, s in supports:
        if o == d or not (0 <= o < n_regions and 0 <= d < n_regions and 0 <= t < n_slots) or s <= 0:
            raise ValidationError(f"{path}: bad support row {(o, d, t, s)}")
        entries[(o, d, t)] = s
    return SupportTable(entries, n_regions, n_slots), graph


def duration_mad(samples_by_key: Mapping) -> dict:
    """Mean absolute deviation around the mean, per key.

    MAD(X) = sum(|x - mean(X)|) / |X|. Keys with no samples are skipped.
    """
    out = {}
    for key, xs in samples_by_key.items():
        if not xs:
            continue
        mu = fsum(xs) / len(xs)
        out[key] = fsum(abs(x - mu) for x in xs) / len(xs)
    return out


def mean_duration_mad(samples_by_key: Mapping) -> float:
    """Unweighted mean of the per-key MAD values."""
    mads = duration_mad(samples_by_key)
    if not mads:
        raise ValidationError("no duration samples")
    return fsum(mads.values()) / len(mads)
