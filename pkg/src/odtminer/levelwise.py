"""Level-wise enumeration of generalized ODT flow patterns.

Mining starts from the atomic patterns (level 3, one origin, one destination,
one timeslot) and repeatedly generalizes: each pattern at level l is extended
by one adjacent region on the origin or destination side, or by one adjacent
timeslot, producing candidates at level l+1. A candidate's count is obtained
incrementally, cnt(CandP) = cnt(P) + cnt(P'), where the difference triple P'
is the added element crossed with the two intact dimensions. A candidate is a
pattern when its contained-pattern ratio cnt/card clears s_r (exact rational
comparison); only patterns are expanded further, and mining stops at the
first empty level.

Each level keeps a seen-set of canonical keys so a candidate reachable from
several parents is evaluated once; the set is discarded when the level
finishes. Because cnt is intrinsic to the candidate, the surviving patterns
do not depend on which parent generated them first.

Five optimization tiers layer counting shortcuts over the same enumeration:

- ``baseline``: nothing but the incremental difference counting;
- ``av``: memo cache for difference-triple counts;
- ``avfc``: plus the bitmask zero-support fast check;
- ``avfcin``: plus one-pass frontier expansion for region growth;
- ``opt``: plus prefix-sum upper bounds (with region relabeling) that prune
  candidates which provably cannot reach the required count.

All tiers emit identical pattern sets; only counters and runtime differ.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from time import perf_counter
from typing import Iterator

from .ingest import AtomicPatternSet, SupportTable, select_atomic_patterns
from .model import (
    DomainConstraints,
    EvaluatedTriple,
    MiningConfig,
    ODTTriple,
    RegionGraph,
    SizeBounds,
    ValidationError,
    as_fraction,
)
from .optimize import (
    DiffCache,
    build_prefix_sum,
    frontier,
    region_mask,
    reorder_regions,
    zero_skip_masks,
)

OPT_LEVELS = ("baseline", "av", "avfc", "avfcin", "opt")


@dataclass
class MiningCounters:
    """Instrumentation for one mining run.

    Under multithreaded counting the tallies may drift slightly (plain int
    increments); pattern output never does.
    """

    candidates_generated: int = 0
    dedup_skips: int = 0
    distinct_candidates: int = 0
    evaluated: int = 0
    exact_diff_counts: int = 0
    cache_hits: int = 0
    zero_support_skips: int = 0
    prefix_bound_prunes: int = 0
    parents_pruned: int = 0
    family_skips: int = 0
    bound_violations: int = 0
    count_mismatches: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


@dataclass
class MiningResult:
    """Per-level pattern lists (sorted by canonical key) plus run telemetry."""

    levels: dict[int, list[EvaluatedTriple]]
    counters: MiningCounters
    phase_seconds: dict[str, float]
    minsup: int
    theta_trace: dict[int, list[int]] | None = None

    @property
    def max_level(self) -> int:
        return max(self.levels)

    def total_patterns(self) -> int:
        return sum(len(v) for v in self.levels.values())


def count_atomic_patterns(t: ODTTriple, aps: AtomicPatternSet) -> int:
    """Exact count of contained atomic patterns by direct enumeration."""
    members = aps.members
    n = 0
    for o in t.origins:
        for d in t.dests:
            for s in range(t.t_start, t.t_end + 1):
                if (o, d, s) in members:
                    n += 1
    return n


def is_pattern(cnt: int, card: int, s_r) -> bool:
    """Exact ratio test cnt/card >= s_r via integer cross-multiplication."""
    r = as_fraction(s_r)
    return cnt * r.denominator >= card * r.numerator


def required_count(s_r: Fraction, card: int) -> int:
    """Smallest integer cnt that passes the ratio test at this cardinality."""
    return math.ceil(s_r * card)


def difference(cand: ODTTriple, parent: ODTTriple, extended_dim: str, added: int) -> ODTTriple:
    """CandP minus P: the added element crossed with the two intact dimensions."""
    if extended_dim == "O":
        return ODTTriple((added,), parent.dests, parent.t_start, parent.t_end)
    if extended_dim == "D":
        return ODTTriple(parent.origins, (added,), parent.t_start, parent.t_end)
    if extended_dim == "T":
        return ODTTriple(parent.origins, parent.dests, added, added)
    raise ValidationError("extended_dim must be one of 'O', 'D', 'T'")


def _insert_sorted(ids: tuple[int, ...], r: int) -> tuple[int, ...]:
    i = 0
    while i < len(ids) and ids[i] < r:
        i += 1
    return ids[:i] + (r,) + ids[i:]


def iter_extensions(
    p: ODTTriple,
    graph: RegionGraph,
    n_slots: int,
    *,
    improved: bool,
    bounds: SizeBounds | None = None,
    constraints: DomainConstraints | None = None,
    dims: tuple[str, ...] = ("O", "D", "T"),
) -> Iterator[tuple[ODTTriple, str, int]]:
    """Generate one-element generalizations of ``p`` as (candidate, dim, added).

    With ``improved`` the region frontier is computed in one pass so each
    extension appears exactly once; otherwise each member's adjacency is
    walked separately and a region touching several members is emitted several
    times (callers dedup via the seen-set). Time extensions never duplicate.
    """
    v_o = constraints.v_o if constraints is not None else None
    v_d = constraints.v_d if constraints is not None else None
    t_lo = constraints.t_range[0] if constraints is not None else 0
    t_hi = constraints.t_range[1] if constraints is not None else n_slots - 1

    if "O" in dims and (bounds is None or len(p.origins) < bounds.b_o):
        if improved:
            for r in frontier(p.origins, graph, exclude=p.dests):
                if v_o is None or r in v_o:
                    yield ODTTriple(_insert_sorted(p.origins, r), p.dests, p.t_start, p.t_end), "O", r
        else:
            occupied = set(p.origins) | set(p.dests)
            for member in p.origins:
                for r in graph.adjacency[member]:
                    if r in occupied or (v_o is not None and r not in v_o):
                        continue
                    yield ODTTriple(_insert_sorted(p.origins, r), p.dests, p.t_start, p.t_end), "O", r

    if "D" in dims and (bounds is None or len(p.dests) < bounds.b_d):
        if improved:
            for r in frontier(p.dests, graph, exclude=p.origins):
                if v_d is None or r in v_d:
                    yield ODTTriple(p.origins, _insert_sorted(p.dests, r), p.t_start, p.t_end), "D", r
        else:
            occupied = set(p.origins) | set(p.dests)
            for member in p.dests:
                for r in graph.adjacency[member]:
                    if r in occupied or (v_d is not None and r not in v_d):
                        continue
                    yield ODTTriple(p.origins, _insert_sorted(p.dests, r), p.t_start, p.t_end), "D", r

    if "T" in dims and (bounds is None or p.n_timeslots < bounds.b_t):
        if p.t_start > t_lo:
            yield ODTTriple(p.origins, p.dests, p.t_start - 1, p.t_end), "T", p.t_start - 1
        if p.t_end < t_hi:
            yield ODTTriple(p.origins, p.dests, p.t_start, p.t_end + 1), "T", p.t_end + 1


def minimal_generalizations(
    p: ODTTriple,
    graph: RegionGraph,
    n_slots: int,
    bounds: SizeBounds | None = None,
    constraints: DomainConstraints | None = None,
) -> list[tuple[ODTTriple, str, int]]:
    """All distinct one-element generalizations of ``p`` with the added element.

    Region growth is restricted to graph neighbors outside both region sets
    (each set stays connected and the sets stay disjoint); the timeslot range
    can stretch one slot left or right inside the period. Bounds suppress
    extensions of a dimension already at its cap; constraints keep added
    elements inside the allowed domains.
    """
    return list(
        iter_extensions(p, graph, n_slots, improved=True, bounds=bounds, constraints=constraints)
    )


class DiffEvaluator:
    """Counting machinery shared by the threshold and rank engines.

    Resolution order per difference triple: zero-support fast check, cache
    lookup, prefix bound (threshold engine only), exact enumeration — each
    step cheaper than the next, so a candidate pays only for what the earlier
    steps could not settle.
    """

    def __init__(
        self,
        aps: AtomicPatternSet,
        counters: MiningCounters,
        *,
        use_cache: bool,
        use_zero_check: bool,
        prefix_index=None,
        cache_limit: int | None = None,
        verify_bounds: bool = False,
    ):
        self.aps = aps
        self.counters = counters
        self.cache = DiffCache(cache_limit) if use_cache else None
        self.use_zero_check = use_zero_check
        self.prefix_index = prefix_index
        self.verify_bounds = verify_bounds

    def bound(self, p_diff: ODTTriple) -> int | None:
        if self.prefix_index is None:
            return None
        b = self.prefix_index.upper_bound_count(p_diff)
        if self.verify_bounds and b < count_atomic_patterns(p_diff, self.aps):
            self.counters.bound_violations += 1
        return b

    def zero_skip(self, extended_dim: str, added: int, o_mask: int, d_mask: int) -> bool:
        """True when mask intersection proves the difference count is zero.

        Needs only the added element and the intact-dimension masks, so
        callers can skip building the difference triple altogether.
        """
        if self.use_zero_check and extended_dim != "T":
            if zero_skip_masks(self.aps, extended_dim, added, o_mask, d_mask):
                self.counters.zero_support_skips += 1
                return True
        return False

    def cached(self, p_diff: ODTTriple) -> int | None:
        if self.cache is not None:
            hit = self.cache.get(p_diff)
            if hit is not None:
                self.counters.cache_hits += 1
                return hit
        return None

    def fast_count(self, p_diff: ODTTriple, extended_dim: str, added: int, o_mask: int, d_mask: int) -> int | None:
        """Zero-support check, then cache; None when only counting can tell."""
        if self.zero_skip(extended_dim, added, o_mask, d_mask):
            return 0
        return self.cached(p_diff)

    def exact_count(self, p_diff: ODTTriple) -> int:
        cnt = count_atomic_patterns(p_diff, self.aps)
        self.counters.exact_diff_counts += 1
        if self.cache is not None:
            self.cache.put(p_diff, cnt)
        return cnt

    def diff_count(self, p_diff: ODTTriple, extended_dim: str, added: int, o_mask: int, d_mask: int) -> int:
        cnt = self.fast_count(p_diff, extended_dim, added, o_mask, d_mask)
        return self.exact_count(p_diff) if cnt is None else cnt


def prepare_atomic(table: SupportTable, graph: RegionGraph, cfg: MiningConfig) -> AtomicPatternSet:
    """Select atomic patterns, honoring domain constraints when present.

    With constraints the table is filtered to the allowed domains first and
    the s_a cutoff is re-based on the filtered triples, so locally strong
    flows surface even when the global cutoff would drown them.
    """
    if table.n_regions != graph.n_regions:
        raise ValidationError("support table and graph disagree on the region count")
    if cfg.constraints is None:
        return select_atomic_patterns(table, cfg.s_a)
    cons = cfg.constraints
    if any(not 0 <= r < graph.n_regions for r in cons.v_o | cons.v_d):
        raise ValidationError("constraint region id out of range")
    if not graph.is_connected_set(cons.v_o):
        raise ValidationError("constrained origin set is disconnected")
    if not graph.is_connected_set(cons.v_d):
        raise ValidationError("constrained destination set is disconnected")
    lo, hi = cons.t_range
    if hi >= table.n_slots:
        raise ValidationError("constrained slot range exceeds the period")
    work = table.restrict(cons.v_o, cons.v_d, cons.t_range)
    if not work.entries:
        raise ValidationError("no atomic triples inside the constrained domains")
    return select_atomic_patterns(work, cfg.s_a)


def atomic_level(aps: AtomicPatternSet) -> list[EvaluatedTriple]:
    """Level-3 pattern list: one evaluated triple per atomic pattern."""
    rows = [EvaluatedTriple(ODTTriple((o,), (d,), t, t), 1, 1) for (o, d, t) in aps.members]
    rows.sort(key=lambda e: e.triple.key)
    return rows


def _evaluate_candidate(job, *, evaluator: DiffEvaluator, sr_num: int, sr_den: int, verify_counts: bool):
    cand, parent_triple, parent_cnt, dim, added, o_mask, d_mask = job
    c = evaluator.counters
    c.evaluated += 1
    card = len(cand.origins) * len(cand.dests) * (cand.t_end - cand.t_start + 1)
    need = -(-sr_num * card // sr_den)  # ceil(s_r * card) in integer arithmetic
    if evaluator.zero_skip(dim, added, o_mask, d_mask):
        cnt = parent_cnt
    else:
        p_diff = difference(cand, parent_triple, dim, added)
        cnt_diff = evaluator.cached(p_diff)
        if cnt_diff is None:
            b = evaluator.bound(p_diff)
            if b is not None and parent_cnt + b < need:
                c.prefix_bound_prunes += 1
                return None
            cnt_diff = evaluator.exact_count(p_diff)
        cnt = parent_cnt + cnt_diff
    if verify_counts and cnt != count_atomic_patterns(cand, evaluator.aps):
        c.count_mismatches += 1
    if cnt >= need:
        return EvaluatedTriple(cand, cnt, card)
    return None


def mine_all(
    table: SupportTable,
    graph: RegionGraph,
    cfg: MiningConfig,
    opt_level: str = "opt",
    *,
    threads: int = 1,
    cache_limit: int | None = None,
    verify_bounds: bool = False,
    verify_counts: bool = False,
    _parent_order: str = "key",
) -> MiningResult:
    """Threshold mining: every pattern level until the first empty one.

    Output is deterministic: per-level lists are sorted by canonical key and
    do not depend on the optimization tier, thread count, or expansion order.
    ``cfg.max_level`` caps the deepest level; ``verify_bounds`` and
    ``verify_counts`` are diagnostics that recount candidates and record
    violations in the counters.
    """
    if opt_level not in OPT_LEVELS:
        raise ValidationError(f"unknown optimization tier {opt_level!r}; pick from {OPT_LEVELS}")
    if cfg.rank is not None:
        raise ValidationError("rank parameters are set; use mine_topk for rank-based mining")
    if cfg.s_r is None:
        raise ValidationError("threshold mining requires s_r")
    if threads < 1:
        raise ValidationError("threads must be at least 1")

    started = perf_counter()
    counters = MiningCounters()
    aps = prepare_atomic(table, graph, cfg)
    tier = OPT_LEVELS.index(opt_level)
    prefix = build_prefix_sum(aps, reorder_regions(graph)) if tier >= 4 else None
    evaluator = DiffEvaluator(
        aps,
        counters,
        use_cache=tier >= 1,
        use_zero_check=tier >= 2,
        prefix_index=prefix,
        cache_limit=cache_limit,
        verify_bounds=verify_bounds,
    )
    improved = tier >= 3
    evaluate = partial(
        _evaluate_candidate,
        evaluator=evaluator,
        sr_num=cfg.s_r.numerator,
        sr_den=cfg.s_r.denominator,
        verify_counts=verify_counts,
    )

    level3 = atomic_level(aps)
    levels: dict[int, list[EvaluatedTriple]] = {3: level3}
    generation = counting = 0.0
    current = level3
    lvl = 3
    while current and (cfg.max_level is None or lvl < cfg.max_level):
        t0 = perf_counter()
        parents = current if _parent_order == "key" else list(reversed(current))
        seen: set[ODTTriple] = set()
        jobs = []
        for parent in parents:
            pt = parent.triple
            o_mask = region_mask(pt.origins)
            d_mask = region_mask(pt.dests)
            for cand, dim, added in iter_extensions(
                pt, graph, table.n_slots, improved=improved, bounds=cfg.bounds, constraints=cfg.constraints
            ):
                counters.candidates_generated += 1
                n_seen = len(seen)
                seen.add(cand)
                if len(seen) == n_seen:
                    counters.dedup_skips += 1
                    continue
                jobs.append((cand, pt, parent.cnt, dim, added, o_mask, d_mask))
        counters.distinct_candidates += len(jobs)
        generation += perf_counter() - t0

        t0 = perf_counter()
        if threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunk = max(1, len(jobs) // (threads * 4))
                outcomes = list(pool.map(evaluate, jobs, chunksize=chunk))
        else:
            outcomes = [evaluate(job) for job in jobs]
        accepted = [e for e in outcomes if e is not None]
        counting += perf_counter() - t0

        accepted.sort(key=lambda e: e.triple.key)
        if not accepted:
            break
        lvl += 1
        levels[lvl] = accepted
        current = accepted

    total = perf_counter() - started
    phases = {"generation": generation, "counting": counting, "total": total}
    return MiningResult(levels, counters, phases, aps.minsup)
