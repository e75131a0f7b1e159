"""Reproducible synthetic instances with planted hot flow boxes.

A synthetic instance is a region graph plus a trip list.  Most trips are
uniform background noise; on top of that, a configurable number of "hot
boxes" — a connected origin block, a disjoint connected destination block,
and a short slot range — receive heavy flow on every cell.  Mining the
aggregated table should recover the planted boxes (or sub-boxes of them),
which makes these instances convenient ground truth for tests and benchmarks.

All randomness is drawn from `random.Random` seeded with strings derived
from `SyntheticSpec.seed`, so the emitted files are byte-identical across
runs and platforms.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from pathlib import Path

from .ingest import (
    PERIOD_MINUTES,
    TRIP_COLUMNS,
    SupportTable,
    TripRecord,
    aggregate,
    write_graph_file,
    write_instance,
)
from .model import RegionGraph, ValidationError

GRAPH_KINDS = ("grid", "path", "random")

_MAX_DEGREE = 4  # keep random graphs road-network-ish rather than dense


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic instance."""

    kind: str = "grid"
    n_regions: int = 9
    n_slots: int = 8
    hotspots: int = 1
    intensity: int = 40
    background_trips: int = 120
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in GRAPH_KINDS:
            raise ValidationError(
                f"unknown graph kind {self.kind!r}; expected one of {', '.join(GRAPH_KINDS)}"
            )
        if self.n_regions < 2:
            raise ValidationError("need at least two regions")
        if self.n_slots < 1 or PERIOD_MINUTES % self.n_slots:
            raise ValidationError(
                f"number of slots must divide {PERIOD_MINUTES} minutes evenly"
            )
        if self.hotspots < 0:
            raise ValidationError("hotspots must be >= 0")
        if self.intensity < 1:
            raise ValidationError("intensity must be >= 1")
        if self.background_trips < 0:
            raise ValidationError("background trips must be >= 0")

    @property
    def slot_minutes(self) -> int:
        return PERIOD_MINUTES // self.n_slots


@dataclass(frozen=True)
class HotBox:
    """One planted block of heavy flow: origins x destinations x slot range."""

    origins: tuple[int, ...]
    dests: tuple[int, ...]
    t_start: int
    t_end: int

    @property
    def n_cells(self) -> int:
        return len(self.origins) * len(self.dests) * (self.t_end - self.t_start + 1)


@dataclass(frozen=True)
class SyntheticInstance:
    """A generated instance: graph, trip list, planted boxes, aggregated table."""

    spec: SyntheticSpec
    graph: RegionGraph
    trips: tuple[TripRecord, ...]
    boxes: tuple[HotBox, ...]
    table: SupportTable


def _grid_rows(n: int) -> int:
    """Largest divisor of n that is at most sqrt(n), so the grid is near-square."""
    best = 1
    for r in range(1, int(math.isqrt(n)) + 1):
        if n % r == 0:
            best = r
    return best


def build_graph(spec: SyntheticSpec) -> RegionGraph:
    """Build the region graph for a spec; deterministic given the seed."""
    n = spec.n_regions
    edges: list[tuple[int, int]] = []
    if spec.kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif spec.kind == "grid":
        rows = _grid_rows(n)
        cols = n // rows
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1))
                if r + 1 < rows:
                    edges.append((v, v + cols))
    else:  # random: spanning tree plus a few extra edges, bounded degree
        rng = random.Random(f"{spec.seed}-graph")
        order = list(range(n))
        rng.shuffle(order)
        degree = [0] * n
        for i in range(1, n):
            v = order[i]
            # Prefer an earlier node with spare degree; fall back to any.
            pool = [u for u in order[:i] if degree[u] < _MAX_DEGREE]
            u = rng.choice(pool) if pool else rng.choice(order[:i])
            edges.append((u, v))
            degree[u] += 1
            degree[v] += 1
        present = {tuple(sorted(e)) for e in edges}
        for _ in range(n):
            u = rng.randrange(n)
            v = rng.randrange(n)
            key = (min(u, v), max(u, v))
            if u == v or key in present:
                continue
            if degree[u] >= _MAX_DEGREE or degree[v] >= _MAX_DEGREE:
                continue
            present.add(key)
            edges.append(key)
            degree[u] += 1
            degree[v] += 1
    return RegionGraph.from_edges(edges, n)


def _grow_block(
    graph: RegionGraph, rng: random.Random, size: int, forbidden: frozenset[int]
) -> tuple[int, ...]:
    """Grow a connected region block of up to `size` regions avoiding `forbidden`."""
    starts = [v for v in range(graph.n_regions) if v not in forbidden]
    block = [rng.choice(starts)]
    taken = set(block)
    while len(block) < size:
        fringe = sorted(
            {
                u
                for v in block
                for u in graph.neighbors(v)
                if u not in taken and u not in forbidden
            }
        )
        if not fringe:
            break
        pick = rng.choice(fringe)
        block.append(pick)
        taken.add(pick)
    return tuple(sorted(block))


def plant_boxes(spec: SyntheticSpec, graph: RegionGraph) -> tuple[HotBox, ...]:
    """Choose the hot boxes for a spec; deterministic given the seed."""
    rng = random.Random(f"{spec.seed}-boxes")
    boxes = []
    for _ in range(spec.hotspots):
        o_size = min(rng.randint(1, 2), spec.n_regions - 1)
        origins = _grow_block(graph, rng, o_size, frozenset())
        d_size = min(rng.randint(1, 2), spec.n_regions - len(origins))
        dests = _grow_block(graph, rng, d_size, frozenset(origins))
        t_len = min(rng.randint(1, 2), spec.n_slots)
        t_start = rng.randrange(spec.n_slots - t_len + 1)
        boxes.append(HotBox(origins, dests, t_start, t_start + t_len - 1))
    return tuple(boxes)


def generate(spec: SyntheticSpec) -> SyntheticInstance:
    """Generate a full instance: graph, boxes, trip rows, aggregated table."""
    graph = build_graph(spec)
    boxes = plant_boxes(spec, graph)
    trips: list[TripRecord] = []
    half_slot = spec.slot_minutes // 2
    for box in boxes:
        for o in box.origins:
            for d in box.dests:
                for t in range(box.t_start, box.t_end + 1):
                    minute = t * spec.slot_minutes + half_slot
                    trips.append(TripRecord(o, d, minute, spec.intensity))
    rng = random.Random(f"{spec.seed}-background")
    for _ in range(spec.background_trips):
        o = rng.randrange(spec.n_regions)
        d = rng.randrange(spec.n_regions)
        while d == o:
            d = rng.randrange(spec.n_regions)
        minute = rng.randrange(PERIOD_MINUTES)
        flow = rng.randint(1, 3)
        trips.append(TripRecord(o, d, minute, flow))
    rows = [(t.origin, t.destination, t.start_minute, t.flow) for t in trips]
    table, rejected = aggregate(rows, spec.slot_minutes, spec.n_regions)
    assert not rejected, "synthetic trips must all be valid"
    return SyntheticInstance(spec, graph, tuple(trips), boxes, table)


def write_trips_csv(trips, path) -> None:
    """Write trip rows as a headered CSV with start times in minutes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIP_COLUMNS)
        for t in trips:
            writer.writerow([t.origin, t.destination, t.start_minute, t.flow])


def write_files(inst: SyntheticInstance, out_dir) -> dict[str, Path]:
    """Write trips.csv, graph.txt, and instance.json into `out_dir`."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trips": out / "trips.csv",
        "graph": out / "graph.txt",
        "instance": out / "instance.json",
    }
    write_trips_csv(inst.trips, paths["trips"])
    write_graph_file(inst.graph, paths["graph"])
    write_instance(inst.table, inst.graph, paths["instance"])
    return paths
