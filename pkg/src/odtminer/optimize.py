"""Counting shortcuts for the level-wise miner.

Four independent structures: a memo cache for difference-triple counts, a
bitmask zero-support fast check, one-pass frontier expansion for region
growth, and a 3D prefix-sum index that yields O(1) upper bounds on any
difference triple's count. None of them changes mined output, only the work
done to produce it.
"""
from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import ODTTriple, RegionGraph, ValidationError


class DiffCache:
    """Exact difference-triple counts, keyed by the triple value itself.

    Unbounded by default; with ``max_entries`` set, evicts in insertion order.
    Concurrent use is benign: a key's value is deterministic, so racing
    double-inserts store the same count.
    """

    def __init__(self, max_entries: int | None = None):
        if max_entries is not None and max_entries < 1:
            raise ValidationError("cache limit must be at least 1")
        self.max_entries = max_entries
        self._data: OrderedDict[ODTTriple, int] = OrderedDict()

    def __len__(self) -> int:
        return len(self._data)

    def get(self, key: ODTTriple) -> int | None:
        return self._data.get(key)

    def put(self, key: ODTTriple, cnt: int) -> None:
        data = self._data
        if self.max_entries is not None and len(data) >= self.max_entries and key not in data:
            data.popitem(last=False)
        data[key] = cnt


def cached_count(p_diff: ODTTriple, cache: DiffCache, aps) -> int:
    """Exact pattern count of a difference triple, memoized in ``cache``."""
    from .levelwise import count_atomic_patterns

    hit = cache.get(p_diff)
    if hit is not None:
        return hit
    cnt = count_atomic_patterns(p_diff, aps)
    cache.put(p_diff, cnt)
    return cnt


def region_mask(regions) -> int:
    """Bitmask with bit r set for every region r in the iterable."""
    m = 0
    for r in regions:
        m |= 1 << r
    return m


def zero_skip_masks(aps, extended_dim: str, added_region: int, o_mask: int, d_mask: int) -> bool:
    """Mask-level core of :func:`zero_support_skip` (masks precomputed)."""
    if extended_dim == "O":
        return aps.dest_masks[added_region] & d_mask == 0
    if extended_dim == "D":
        return aps.src_masks[added_region] & o_mask == 0
    raise ValidationError("extended_dim must be 'O' or 'D'")


def zero_support_skip(p_diff: ODTTriple, extended_dim: str, added_region: int, aps) -> bool:
    """True when the difference triple provably contains no atomic patterns.

    A region added to the origin side only contributes through members
    (added, d, t) with d among the intact destinations; when no destination
    qualifies, the count is zero and enumeration can be skipped entirely.
    Symmetric for the destination side.
    """
    return zero_skip_masks(
        aps, extended_dim, added_region, region_mask(p_diff.origins), region_mask(p_diff.dests)
    )


def frontier(regions, graph: RegionGraph, exclude=()) -> tuple[int, ...]:
    """All neighbors of the region set, minus the set itself and ``exclude``.

    One pass over member adjacency lists, so each expansion candidate shows
    up exactly once regardless of how many members it touches.
    """
    out: set[int] = set()
    for r in regions:
        out.update(graph.adjacency[r])
    out.difference_update(regions)
    out.difference_update(exclude)
    return tuple(sorted(out))


def reorder_regions(graph: RegionGraph) -> tuple[int, ...]:
    """Deterministic region ordering that keeps neighborhoods contiguous.

    Breadth-first from the smallest unvisited id, neighbors enqueued in
    ascending id order; connected components come out contiguous.
    """
    order: list[int] = []
    visited = [False] * graph.n_regions
    for start in range(graph.n_regions):
        if visited[start]:
            continue
        visited[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in graph.adjacency[u]:
                if not visited[v]:
                    visited[v] = True
                    queue.append(v)
    return tuple(order)


@dataclass(frozen=True)
class PrefixSumIndex:
    """3D prefix sums over the atomic-pattern indicator cube.

    ``sums[i, j, k]`` counts pattern cells (i', j', k') with i' <= i, j' <= j,
    k' <= k in 1-based coordinates; every index-0 slice is zero. Region axes
    use positions from ``region_order``, the time axis uses raw slot ids.
    """

    sums: np.ndarray
    region_order: tuple[int, ...]
    position: tuple[int, ...]

    @classmethod
    def from_indicator(cls, indicator, region_order=None) -> "PrefixSumIndex":
        a = np.asarray(indicator, dtype=np.int64)
        if a.ndim != 3 or a.shape[0] != a.shape[1]:
            raise ValidationError("indicator must have shape (N, N, M)")
        n = a.shape[0]
        if region_order is None:
            region_order = tuple(range(n))
        if sorted(region_order) != list(range(n)):
            raise ValidationError("region_order must be a permutation of 0..N-1")
        sums = np.zeros((a.shape[0] + 1, a.shape[1] + 1, a.shape[2] + 1), dtype=np.int64)
        sums[1:, 1:, 1:] = a.cumsum(0).cumsum(1).cumsum(2)
        pos = [0] * n
        for p, rid in enumerate(region_order):
            pos[rid] = p
        return cls(sums, tuple(region_order), tuple(pos))

    @cached_property
    def _cells(self) -> list:
        # Plain nested lists: scalar reads are several times cheaper than
        # ndarray indexing, and the bound is consulted once per candidate.
        return self.sums.tolist()

    def range_sum(self, a: int, b: int, c: int, d: int, e: int, f: int) -> int:
        """Box sum over rows [a,b], columns [c,d], slots [e,f], 1-based inclusive."""
        n = self.sums.shape[0] - 1
        m = self.sums.shape[2] - 1
        if not (1 <= a <= b <= n and 1 <= c <= d <= n and 1 <= e <= f <= m):
            raise ValidationError(f"box out of range: {(a, b, c, d, e, f)}")
        s = self._cells
        lo, hi = s[a - 1], s[b]
        lo_c, lo_d, hi_c, hi_d = lo[c - 1], lo[d], hi[c - 1], hi[d]
        return (
            hi_d[f]
            - lo_d[f]
            - hi_c[f]
            - hi_d[e - 1]
            + lo_c[f]
            + hi_c[e - 1]
            + lo_d[e - 1]
            - lo_c[e - 1]
        )

    def upper_bound_count(self, p_diff: ODTTriple) -> int:
        """Pattern count of the triple's bounding box under the region order.

        Never below the exact count; exact whenever both region sets map to
        contiguous position runs.
        """
        pos = self.position
        opos = [pos[r] for r in p_diff.origins]
        dpos = [pos[r] for r in p_diff.dests]
        return self.range_sum(
            min(opos) + 1,
            max(opos) + 1,
            min(dpos) + 1,
            max(dpos) + 1,
            p_diff.t_start + 1,
            p_diff.t_end + 1,
        )


def build_prefix_sum(aps, region_order=None) -> PrefixSumIndex:
    """Index an atomic-pattern set under the given region ordering."""
    n, m = aps.n_regions, aps.n_slots
    if region_order is None:
        region_order = tuple(range(n))
    pos = [0] * n
    for p, rid in enumerate(region_order):
        pos[rid] = p
    a = np.zeros((n, n, m), dtype=np.int64)
    for o, d, t in aps.members:
        a[pos[o], pos[d], t] = 1
    return PrefixSumIndex.from_indicator(a, tuple(region_order))
