"""Brute-force reference miner for small instances.

Everything here is recomputed straight from the definitions: the valid-triple
universe is enumerated outright (every pair of disjoint connected region sets
crossed with every contiguous slot range), counts come from scanning each
triple's atomic cells, the atomic cutoff is re-derived from the raw support
table, and pattern status is decided level by level with an explicit
minimal-specialization check. No candidate generation, no counting shortcuts,
and no code shared with the optimized paths beyond the domain types, so
agreement with the miner is meaningful evidence.

Costs are exponential in instance size, so a guard refuses instances beyond
small bounds rather than hanging.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .ingest import SupportTable
from .model import (
    EvaluatedTriple,
    MiningConfig,
    ODTTriple,
    RegionGraph,
    ValidationError,
    as_fraction,
    parse_triple,
)


@dataclass(frozen=True)
class OracleGuard:
    max_regions: int = 14
    max_slots: int = 10
    max_level: int = 10


DEFAULT_GUARD = OracleGuard()


class OracleGuardError(RuntimeError):
    """The instance exceeds the oracle's exhaustive-search limits."""


def _check_guard(graph: RegionGraph, n_slots: int, max_level: int, guard: OracleGuard) -> None:
    problems = []
    if graph.n_regions > guard.max_regions:
        problems.append(f"N={graph.n_regions} > {guard.max_regions}")
    if n_slots > guard.max_slots:
        problems.append(f"M={n_slots} > {guard.max_slots}")
    if max_level > guard.max_level:
        problems.append(f"max_level={max_level} > {guard.max_level}")
    if problems:
        raise OracleGuardError("instance too large for exhaustive search: " + ", ".join(problems))


def connected_subsets(graph: RegionGraph, max_size: int) -> list[tuple[int, ...]]:
    """Every connected region set with 1..max_size members, each exactly once.

    Anchor-and-grow enumeration: sets are grown from their minimum vertex
    using exclusive neighborhoods, so no set is produced twice.
    """
    adj = graph.adjacency
    results: list[tuple[int, ...]] = []
    if max_size < 1:
        return results

    def extend(sub: tuple[int, ...], ext: list[int], anchor: int, reached: set[int]) -> None:
        if len(sub) == max_size:
            return
        while ext:
            w = ext.pop()
            new_sub = tuple(sorted(sub + (w,)))
            results.append(new_sub)
            fresh = [u for u in adj[w] if u > anchor and u not in reached]
            extend(new_sub, ext + fresh, anchor, reached | set(fresh))

    for anchor in range(graph.n_regions):
        results.append((anchor,))
        ext0 = [u for u in adj[anchor] if u > anchor]
        extend((anchor,), ext0, anchor, {anchor} | set(ext0))
    return results


def enumerate_valid_triples(
    graph: RegionGraph,
    n_slots: int,
    max_level: int,
    guard: OracleGuard = DEFAULT_GUARD,
) -> Iterator[ODTTriple]:
    """Every valid triple with level <= max_level, each exactly once."""
    _check_guard(graph, n_slots, max_level, guard)
    if max_level < 3:
        return
    subsets = connected_subsets(graph, min(max_level - 2, graph.n_regions))
    subset_sets = [frozenset(s) for s in subsets]
    for i, origins in enumerate(subsets):
        o_set = subset_sets[i]
        for j, dests in enumerate(subsets):
            if o_set & subset_sets[j]:
                continue
            budget = max_level - len(origins) - len(dests)
            if budget < 1:
                continue
            for length in range(1, min(budget, n_slots) + 1):
                for start in range(0, n_slots - length + 1):
                    yield ODTTriple(origins, dests, start, start + length - 1)


def minimal_specializations(t: ODTTriple, graph: RegionGraph) -> list[ODTTriple]:
    """All valid triples obtained by removing exactly one atomic element.

    Removing a region must leave the set nonempty and connected (cut vertices
    cannot be removed); the slot range shrinks from either end when longer
    than one.
    """
    out: list[ODTTriple] = []
    if len(t.origins) > 1:
        for r in t.origins:
            rest = tuple(x for x in t.origins if x != r)
            if graph.is_connected_set(rest):
                out.append(ODTTriple(rest, t.dests, t.t_start, t.t_end))
    if len(t.dests) > 1:
        for r in t.dests:
            rest = tuple(x for x in t.dests if x != r)
            if graph.is_connected_set(rest):
                out.append(ODTTriple(t.origins, rest, t.t_start, t.t_end))
    if t.t_start < t.t_end:
        out.append(ODTTriple(t.origins, t.dests, t.t_start + 1, t.t_end))
        out.append(ODTTriple(t.origins, t.dests, t.t_start, t.t_end - 1))
    return out


@dataclass
class OracleResult:
    """Per-level map from canonical key to (cnt, card, is_pattern)."""

    levels: dict[int, dict[str, tuple[int, int, bool]]]

    def patterns(self, level: int) -> list[EvaluatedTriple]:
        """Patterns at one level as evaluated triples, sorted by key."""
        out = [
            EvaluatedTriple(parse_triple(key), cnt, card)
            for key, (cnt, card, ok) in self.levels.get(level, {}).items()
            if ok
        ]
        out.sort(key=lambda e: e.triple.key)
        return out

    def pattern_levels(self) -> dict[int, list[EvaluatedTriple]]:
        """Nonempty pattern levels, mirroring the miner's result shape."""
        out = {}
        for lvl in sorted(self.levels):
            pats = self.patterns(lvl)
            if pats:
                out[lvl] = pats
        return out


class OracleVerifier:
    """Precomputes the valid-triple universe of one instance so several
    (s_a, s_r) settings can be checked without re-enumerating."""

    def __init__(
        self,
        table: SupportTable,
        graph: RegionGraph,
        max_level: int,
        guard: OracleGuard = DEFAULT_GUARD,
    ):
        if max_level < 3:
            raise ValidationError("max_level must be at least 3")
        self.table = table
        self.graph = graph
        self.max_level = max_level
        self.triples_by_level: dict[int, list[ODTTriple]] = {}
        for t in enumerate_valid_triples(graph, table.n_slots, max_level, guard):
            self.triples_by_level.setdefault(t.level, []).append(t)
        self._members: dict[Fraction, frozenset] = {}
        self._counts: dict[Fraction, dict[str, int]] = {}

    def members(self, s_a) -> frozenset:
        """Atomic patterns for s_a, re-derived from the raw support table."""
        s_a = as_fraction(s_a)
        got = self._members.get(s_a)
        if got is not None:
            return got
        entries = self.table.entries
        if not entries:
            raise ValidationError("no atomic triples")
        if not 0 < s_a <= 1:
            raise ValidationError("s_a must be in (0, 1]")
        supports = sorted(entries.values(), reverse=True)
        cutoff = supports[math.ceil(s_a * len(supports)) - 1]
        members = frozenset(key for key, s in entries.items() if s >= cutoff)
        self._members[s_a] = members
        return members

    def counts(self, s_a) -> dict[str, int]:
        """Exact contained-pattern count for every triple, by direct scan."""
        s_a = as_fraction(s_a)
        got = self._counts.get(s_a)
        if got is not None:
            return got
        members = self.members(s_a)
        counts: dict[str, int] = {}
        for triples in self.triples_by_level.values():
            for t in triples:
                counts[t.key] = sum(1 for cell in t.atoms() if cell in members)
        self._counts[s_a] = counts
        return counts

    def run(self, s_a, s_r) -> OracleResult:
        s_r = as_fraction(s_r)
        members = self.members(s_a)
        counts = self.counts(s_a)
        levels: dict[int, dict[str, tuple[int, int, bool]]] = {}
        prev_patterns: set[str] = set()
        for lvl in range(3, self.max_level + 1):
            here: dict[str, tuple[int, int, bool]] = {}
            for t in self.triples_by_level.get(lvl, []):
                cnt = counts[t.key]
                card = t.cardinality
                if lvl == 3:
                    ok = (t.origins[0], t.dests[0], t.t_start) in members
                else:
                    ok = cnt * s_r.denominator >= card * s_r.numerator and any(
                        s.key in prev_patterns for s in minimal_specializations(t, self.graph)
                    )
                here[t.key] = (cnt, card, ok)
            levels[lvl] = here
            prev_patterns = {key for key, (_, _, ok) in here.items() if ok}
        return OracleResult(levels)


def oracle_mine(
    table: SupportTable,
    graph: RegionGraph,
    cfg: MiningConfig,
    guard: OracleGuard = DEFAULT_GUARD,
) -> OracleResult:
    """Definition-level mining by exhaustive enumeration (small instances only)."""
    if cfg.max_level is None:
        raise ValidationError("the oracle requires an explicit max_level")
    if cfg.s_r is None:
        raise ValidationError("the oracle requires s_r")
    if cfg.bounds is not None or cfg.constraints is not None or cfg.rank is not None:
        raise ValidationError("the oracle covers plain threshold mining only")
    return OracleVerifier(table, graph, cfg.max_level, guard).run(cfg.s_a, cfg.s_r)
