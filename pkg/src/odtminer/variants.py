"""Mining variants: size-bounded, domain-constrained, and rank-based top-k.

The bounded and constrained variants are thin reconfigurations of the
threshold engine. Rank-based mining replaces the ratio threshold with a
per-level top-k selection by contained-pattern count and comes in three
flavors:

- ``baserank``: generate and exactly count every candidate, then select;
- ``baseoptrank``: the same selection with the counting shortcuts (cache,
  zero-support check, frontier expansion);
- ``optrank``: additionally processes parents in decreasing-cnt order and
  prunes parents / extension families whose best possible candidate count
  cannot reach the current k-boundary.

Ties at the boundary are broken by ascending canonical key. optrank keeps
exploring anything that could still TIE the boundary count (a tied candidate
with a smaller key still displaces the worst kept entry), which is what makes
its output bit-identical to baserank's.
"""
from __future__ import annotations

import heapq
from dataclasses import replace
from time import perf_counter

from .ingest import SupportTable
from .levelwise import (
    DiffEvaluator,
    MiningCounters,
    MiningResult,
    atomic_level,
    difference,
    iter_extensions,
    mine_all,
    prepare_atomic,
)
from .model import (
    DomainConstraints,
    EvaluatedTriple,
    MiningConfig,
    ODTTriple,
    RegionGraph,
    SizeBounds,
    ValidationError,
)
from .optimize import region_mask

RANK_ALGOS = ("baserank", "baseoptrank", "optrank")
_DIMS = ("O", "D", "T")


def mine_bounded(
    table: SupportTable,
    graph: RegionGraph,
    cfg: MiningConfig,
    b_o: int,
    b_d: int,
    b_t: int,
    **kwargs,
) -> MiningResult:
    """Threshold mining with per-dimension size caps applied during expansion.

    Equivalent to filtering the unbounded output down to triples with
    |O| <= b_o, |D| <= b_d, |T| <= b_t; no level above b_o + b_d + b_t can be
    reached.
    """
    bounded = replace(cfg, bounds=SizeBounds(b_o, b_d, b_t))
    return mine_all(table, graph, bounded, **kwargs)


def mine_constrained(
    table: SupportTable,
    graph: RegionGraph,
    cfg: MiningConfig,
    v_o,
    v_d,
    t_range,
    **kwargs,
) -> MiningResult:
    """Threshold mining confined to origin/destination/slot domains.

    v_o and v_d must induce connected subgraphs (checked before mining);
    atomic selection is re-based on the confined triples.
    """
    cons = DomainConstraints(frozenset(v_o), frozenset(v_d), tuple(t_range))
    return mine_all(table, graph, replace(cfg, constraints=cons), **kwargs)


def max_extension_gain(p: EvaluatedTriple, extended_dim: str) -> int:
    """Largest possible difference count when generalizing one dimension.

    The difference triple is the added element crossed with the two intact
    dimensions, so at most |intact_1| * |intact_2| new atomic patterns appear:
    |D|*|T| for an origin extension, |O|*|T| for a destination extension,
    |O|*|D| for a time extension.
    """
    t = p.triple
    if extended_dim == "O":
        return len(t.dests) * t.n_timeslots
    if extended_dim == "D":
        return len(t.origins) * t.n_timeslots
    if extended_dim == "T":
        return len(t.origins) * len(t.dests)
    raise ValidationError("extended_dim must be one of 'O', 'D', 'T'")


def prune_parent(p: EvaluatedTriple, theta: int) -> bool:
    """True when no generalization of ``p`` can exceed ``theta``.

    p.cnt plus the best single-dimension gain is at most theta. Callers that
    enforce the deterministic tie-break must keep exploring parents that can
    still tie the boundary count, i.e. call this with theta - 1.
    """
    best = max(max_extension_gain(p, dim) for dim in _DIMS)
    return p.cnt + best <= theta


class _WorstFirst:
    """Inverts canonical-key order so heapq pops the largest key on cnt ties."""

    __slots__ = ("key",)

    def __init__(self, key: str):
        self.key = key

    def __lt__(self, other: "_WorstFirst") -> bool:
        return self.key > other.key


class RankHeap:
    """Fixed-capacity selection of the best entries by (cnt desc, key asc).

    The root is always the worst kept entry, so theta (the k-th best count so
    far) is available in O(1) while streaming candidates. theta never
    decreases within a level.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationError("heap capacity must be at least 1")
        self.capacity = capacity
        self._heap: list[tuple[int, _WorstFirst, EvaluatedTriple]] = []

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def full(self) -> bool:
        return len(self._heap) >= self.capacity

    @property
    def theta(self) -> int:
        """Count of the worst kept entry; meaningful only when full."""
        return self._heap[0][0]

    def offer(self, entry: EvaluatedTriple) -> bool:
        """Keep the entry if it beats the current worst; report acceptance."""
        item = (entry.cnt, _WorstFirst(entry.triple.key), entry)
        if not self.full:
            heapq.heappush(self._heap, item)
            return True
        worst_cnt, worst_key, _ = self._heap[0]
        if entry.cnt > worst_cnt or (entry.cnt == worst_cnt and entry.triple.key < worst_key.key):
            heapq.heapreplace(self._heap, item)
            return True
        return False

    def snapshot(self) -> list[EvaluatedTriple]:
        """Kept entries, best first by (cnt desc, key asc)."""
        return [e for _, _, e in sorted(self._heap, key=lambda it: (-it[0], it[2].triple.key))]


def mine_topk(
    table: SupportTable,
    graph: RegionGraph,
    cfg: MiningConfig,
    rank_algo: str = "optrank",
    *,
    cache_limit: int | None = None,
    record_theta: bool = False,
) -> MiningResult:
    """Rank-based mining: per level keep the k candidates with the most
    contained atomic patterns.

    Level 3 is the full atomic-pattern set (the seed); levels 4..maxl hold at
    most k triples each, candidates drawn from minimal generalizations of the
    previous level's selection. Candidates with no contained pattern never
    enter the selection. All three algorithms return identical levels; they
    differ in counters and runtime only.
    """
    if cfg.rank is None:
        raise ValidationError("mine_topk requires rank parameters on the config")
    if rank_algo not in RANK_ALGOS:
        raise ValidationError(f"unknown rank algorithm {rank_algo!r}; pick from {RANK_ALGOS}")

    k, maxl = cfg.rank.k, cfg.rank.maxl
    started = perf_counter()
    counters = MiningCounters()
    aps = prepare_atomic(table, graph, cfg)
    optimized = rank_algo != "baserank"
    evaluator = DiffEvaluator(
        aps, counters, use_cache=optimized, use_zero_check=optimized, cache_limit=cache_limit
    )
    pruning = rank_algo == "optrank"

    level3 = atomic_level(aps)
    levels: dict[int, list[EvaluatedTriple]] = {3: level3}
    theta_trace: dict[int, list[int]] = {}
    counting = 0.0
    current = level3
    lvl = 3
    while current and lvl < maxl:
        heap = RankHeap(k)
        seen: set[ODTTriple] = set()
        trace: list[int] = []
        if pruning:
            parents = sorted(current, key=lambda e: (-e.cnt, e.triple.key))
        else:
            parents = current
        for parent in parents:
            pt = parent.triple
            if pruning and heap.full and prune_parent(parent, heap.theta - 1):
                counters.parents_pruned += 1
                continue
            o_mask = region_mask(pt.origins)
            d_mask = region_mask(pt.dests)
            for dim in _DIMS:
                if pruning and heap.full and parent.cnt + max_extension_gain(parent, dim) < heap.theta:
                    counters.family_skips += 1
                    continue
                for cand, _dim, added in iter_extensions(
                    pt,
                    graph,
                    table.n_slots,
                    improved=optimized,
                    bounds=cfg.bounds,
                    constraints=cfg.constraints,
                    dims=(dim,),
                ):
                    counters.candidates_generated += 1
                    n_seen = len(seen)
                    seen.add(cand)
                    if len(seen) == n_seen:
                        counters.dedup_skips += 1
                        continue
                    counters.evaluated += 1
                    p_diff = difference(cand, pt, dim, added)
                    t0 = perf_counter()
                    cnt = parent.cnt + evaluator.diff_count(p_diff, dim, added, o_mask, d_mask)
                    counting += perf_counter() - t0
                    if cnt >= 1:
                        heap.offer(EvaluatedTriple(cand, cnt, cand.cardinality))
            if record_theta and heap.full:
                trace.append(heap.theta)
        counters.distinct_candidates += len(seen)
        selected = heap.snapshot()
        if not selected:
            break
        lvl += 1
        levels[lvl] = sorted(selected, key=lambda e: e.triple.key)
        current = levels[lvl]
        if record_theta:
            theta_trace[lvl] = trace

    total = perf_counter() - started
    phases = {"generation": max(total - counting, 0.0), "counting": counting, "total": total}
    return MiningResult(levels, counters, phases, aps.minsup, theta_trace if record_theta else None)
