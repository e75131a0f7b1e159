"""Core domain types shared by every other module.

Regions and timeslots are plain integer indices. A triple combines a set of
origin regions, a set of destination regions, and an inclusive range of
timeslots. Both region sets must induce connected subgraphs of the region
neighborhood graph and must not overlap; timeslot ranges are contiguous and
never wrap past the period boundary.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence


class ValidationError(ValueError):
    """An input value violates a structural invariant."""


def as_fraction(value) -> Fraction:
    """Convert a threshold to an exact rational.

    Floats go through their decimal repr, so 0.6 means exactly 3/5 rather than
    the nearest binary float; strings are parsed as decimals.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class RegionGraph:
    """Undirected neighborhood graph over atomic regions 0..n_regions-1."""

    n_regions: int
    adjacency: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n_regions: int) -> "RegionGraph":
        """Build a symmetric, deduplicated adjacency structure from (u, v) pairs."""
        if n_regions <= 0:
            raise ValidationError("n_regions must be positive")
        neigh: list[set[int]] = [set() for _ in range(n_regions)]
        for idx, pair in enumerate(edges):
            try:
                u, v = pair
            except (TypeError, ValueError):
                raise ValidationError(f"edge {idx}: expected a (u, v) pair, got {pair!r}") from None
            if not (0 <= u < n_regions and 0 <= v < n_regions):
                raise ValidationError(f"edge {idx}: region id out of range: ({u}, {v})")
            if u == v:
                raise ValidationError(f"edge {idx}: self-loop on region {u}")
            neigh[u].add(v)
            neigh[v].add(u)
        return cls(n_regions, tuple(tuple(sorted(s)) for s in neigh))

    def neighbors(self, region: int) -> tuple[int, ...]:
        return self.adjacency[region]

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) with u < v, sorted."""
        return [(u, v) for u in range(self.n_regions) for v in self.adjacency[u] if u < v]

    def is_connected_set(self, regions: Iterable[int]) -> bool:
        """True when the induced subgraph on ``regions`` is connected (BFS)."""
        rs = set(regions)
        if not rs:
            return False
        start = next(iter(rs))
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v in rs and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(rs)


@dataclass(frozen=True)
class ODTTriple:
    """A (possibly generalized) origin/destination/time triple.

    ``origins`` and ``dests`` are strictly increasing tuples of region ids;
    the timeslot range [t_start, t_end] is inclusive on both ends.
    """

    origins: tuple[int, ...]
    dests: tuple[int, ...]
    t_start: int
    t_end: int

    def __hash__(self) -> int:
        # Triples are hashed repeatedly (dedup sets, count caches); memoize.
        d = self.__dict__
        h = d.get("_hash")
        if h is None:
            h = hash((self.origins, self.dests, self.t_start, self.t_end))
            d["_hash"] = h
        return h

    @classmethod
    def make(cls, origins, dests, t) -> "ODTTriple":
        """Normalize arbitrary iterables and a slot (or (start, end) pair)."""
        o = tuple(sorted(set(origins)))
        d = tuple(sorted(set(dests)))
        if isinstance(t, int):
            ts, te = t, t
        else:
            ts, te = int(t[0]), int(t[1])
        return cls(o, d, ts, te)

    @property
    def n_timeslots(self) -> int:
        return self.t_end - self.t_start + 1

    @property
    def level(self) -> int:
        """Total number of atomic elements: |O| + |D| + |T|."""
        return len(self.origins) + len(self.dests) + self.n_timeslots

    @property
    def cardinality(self) -> int:
        """Number of atomic triples contained: |O| * |D| * |T|."""
        return len(self.origins) * len(self.dests) * self.n_timeslots

    @cached_property
    def key(self) -> str:
        """Canonical textual key, usable for hashing, sorting, and parsing."""
        return format_triple(self)

    def atoms(self) -> Iterator[tuple[int, int, int]]:
        """Every contained atomic (origin, destination, timeslot) cell."""
        for o in self.origins:
            for d in self.dests:
                for t in range(self.t_start, self.t_end + 1):
                    yield (o, d, t)


def format_triple(t: ODTTriple) -> str:
    """Canonical textual form, e.g. ``O=[0,1];D=[3];T=[18,18]``."""
    o = ",".join(map(str, t.origins))
    d = ",".join(map(str, t.dests))
    return f"O=[{o}];D=[{d}];T=[{t.t_start},{t.t_end}]"


def canonical_key(t: ODTTriple) -> str:
    """Deterministic, injective key over triples; equal triples share it."""
    return t.key


_TRIPLE_RE = re.compile(r"^O=\[([0-9,]*)\];D=\[([0-9,]*)\];T=\[(\d+),(\d+)\]$")


def parse_triple(text: str) -> ODTTriple:
    """Inverse of :func:`format_triple`."""
    m = _TRIPLE_RE.match(text.strip())
    if m is None:
        raise ValidationError(f"not a canonical triple: {text!r}")
    origins = tuple(int(x) for x in m.group(1).split(",") if x)
    dests = tuple(int(x) for x in m.group(2).split(",") if x)
    return ODTTriple.make(origins, dests, (int(m.group(3)), int(m.group(4))))


def validate(t: ODTTriple, graph: RegionGraph, n_slots: int | None = None) -> str | None:
    """Check every triple invariant; return a violation label or None when ok.

    Checks run in a fixed order so the reported violation is deterministic:
    empty components, slot range, region id range, overlap, connectivity.
    """
    if not t.origins:
        return "empty origin set"
    if not t.dests:
        return "empty destination set"
    if t.t_start < 0 or t.t_start > t.t_end:
        return "bad timeslot range"
    if n_slots is not None and t.t_end >= n_slots:
        return "bad timeslot range"
    if any(not (0 <= r < graph.n_regions) for r in t.origins + t.dests):
        return "region id out of range"
    if set(t.origins) & set(t.dests):
        return "origin/destination overlap"
    if not graph.is_connected_set(t.origins):
        return "disconnected origin set"
    if not graph.is_connected_set(t.dests):
        return "disconnected destination set"
    return None


@dataclass(frozen=True)
class EvaluatedTriple:
    """A triple plus its contained atomic-pattern count and cardinality."""

    triple: ODTTriple
    cnt: int
    card: int

    @property
    def ratio(self) -> float:
        return self.cnt / self.card


@dataclass(frozen=True)
class SizeBounds:
    """Upper bounds on |O|, |D| and |T| during expansion."""

    b_o: int
    b_d: int
    b_t: int

    def __post_init__(self):
        if min(self.b_o, self.b_d, self.b_t) < 1:
            raise ValidationError("size bounds must be at least 1")


@dataclass(frozen=True)
class DomainConstraints:
    """Confine mining to origins in v_o, destinations in v_d, slots in t_range."""

    v_o: frozenset[int]
    v_d: frozenset[int]
    t_range: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "v_o", frozenset(self.v_o))
        object.__setattr__(self, "v_d", frozenset(self.v_d))
        object.__setattr__(self, "t_range", (int(self.t_range[0]), int(self.t_range[1])))
        if not self.v_o or not self.v_d:
            raise ValidationError("constraint region sets must be nonempty")
        lo, hi = self.t_range
        if lo < 0 or lo > hi:
            raise ValidationError("constraint slot range is invalid")


@dataclass(frozen=True)
class RankParams:
    """Top-k selection parameters: keep k triples per level, up to level maxl."""

    k: int
    maxl: int

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be at least 1")
        if self.maxl < 3:
            raise ValidationError("maxl must be at least 3")


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds and optional variant parameters for one mining run.

    s_a selects the atomic-pattern fraction; s_r is the minimum
    contained-pattern ratio for threshold mining and must be None when rank
    parameters are set. max_level is a safety cap on the deepest level mined.
    """

    s_a: Fraction
    s_r: Fraction | None = None
    bounds: SizeBounds | None = None
    constraints: DomainConstraints | None = None
    rank: RankParams | None = None
    max_level: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "s_a", as_fraction(self.s_a))
        if self.s_r is not None:
            object.__setattr__(self, "s_r", as_fraction(self.s_r))
        if not 0 < self.s_a <= 1:
            raise ValidationError("s_a must be in (0, 1]")
        if self.s_r is not None and self.s_r <= 0:
            raise ValidationError("s_r must be positive")
        if self.s_r is not None and self.rank is not None:
            raise ValidationError("s_r and rank parameters are mutually exclusive")
        if self.max_level is not None and self.max_level < 3:
            raise ValidationError("max_level must be at least 3")
