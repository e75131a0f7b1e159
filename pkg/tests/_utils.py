"""Shared helpers for the test suite: canonical fixtures and signatures."""

from __future__ import annotations

import random

from odtminer.ingest import SupportTable, aggregate
from odtminer.model import ODTTriple, RegionGraph
from odtminer.synth import SyntheticSpec, generate

# Four regions on the demo map, labeled A=0, B=1, C=2, D=3.  A-B, B-C, C-D,
# and B-D are neighbors; A and C are not.
DEMO_EDGES = [(0, 1), (1, 2), (2, 3), (1, 3)]
A, B, C, D = 0, 1, 2, 3

# Morning commute toward D plus two stray trips; 30-minute slots.
DEMO_TRIPS = [
    (B, D, "9:20", 2),
    (B, D, "9:29", 1),
    (A, D, "9:05", 2),
    (C, A, "10:00", 1),
    (D, C, "16:40", 1),
]

# Aggregation of DEMO_TRIPS at 30-minute slots, frozen by hand:
# 9:20 and 9:29 land in slot 18 (560//30 = 569//30 = 18), 9:05 too (545//30),
# 10:00 in slot 20, 16:40 in slot 33.
DEMO_SUPPORTS = {
    (B, D, 18): 3,
    (A, D, 18): 2,
    (C, A, 20): 1,
    (D, C, 33): 1,
}

# Mining the demo table at s_a=0.5, s_r=0.6, frozen by hand:
#   minsup = 2 (2nd largest of four supports), atomic patterns (B,D,18),(A,D,18)
#   level 4: (AB,D,18) cnt 2 card 2; level 5: (ABC,D,18) cnt 2 card 3 (2/3 >= 0.6)
#   level 6: (ABC,D,[17,18]) etc. all fall below 0.6 -> empty, loop stops.
DEMO_MINSUP = 2
DEMO_SIGNATURE = {
    3: [("O=[0];D=[3];T=[18,18]", 1, 1), ("O=[1];D=[3];T=[18,18]", 1, 1)],
    4: [("O=[0,1];D=[3];T=[18,18]", 2, 2)],
    5: [("O=[0,1,2];D=[3];T=[18,18]", 2, 3)],
}


def demo_graph() -> RegionGraph:
    return RegionGraph.from_edges(DEMO_EDGES, 4)


def demo_table() -> SupportTable:
    table, rejected = aggregate(DEMO_TRIPS, 30, 4)
    assert not rejected
    return table


def levels_signature(levels: dict) -> dict[int, list[tuple[str, int, int]]]:
    """Comparable (key, cnt, card) rows per level, canonically ordered."""
    return {
        lvl: sorted((ev.triple.key, ev.cnt, ev.card) for ev in evs)
        for lvl, evs in levels.items()
        if evs
    }


def triple(origins, dests, t) -> ODTTriple:
    return ODTTriple.make(origins, dests, t)


def small_specs() -> list[SyntheticSpec]:
    """Twenty seeded instances spanning graph kinds, sizes, and hot spots."""
    specs = []
    for i in range(20):
        specs.append(
            SyntheticSpec(
                kind=("grid", "path", "random")[i % 3],
                n_regions=(6, 8, 9, 12)[i % 4],
                n_slots=(4, 6, 8)[(i // 3) % 3],
                hotspots=i % 3,
                intensity=40,
                background_trips=12 * (6, 8, 9, 12)[i % 4],
                seed=100 + i,
            )
        )
    return specs


def make_instance(spec: SyntheticSpec):
    inst = generate(spec)
    return inst.table, inst.graph, inst


def random_instance(seed: int, n: int = 10, m: int = 6):
    """A denser random-graph instance for exercising the counting machinery."""
    inst = generate(
        SyntheticSpec(
            kind="random",
            n_regions=n,
            n_slots=m,
            hotspots=2,
            intensity=20,
            background_trips=15 * n,
            seed=seed,
        )
    )
    return inst.table, inst.graph


def random_valid_triple(rng: random.Random, graph: RegionGraph, m: int) -> ODTTriple:
    """Grow random connected O and D sets with a random slot range."""

    def grow(forbidden: set[int]) -> set[int]:
        start = rng.choice([v for v in range(graph.n_regions) if v not in forbidden])
        block = {start}
        for _ in range(rng.randrange(3)):
            fringe = sorted(
                u
                for v in block
                for u in graph.adjacency[v]
                if u not in block and u not in forbidden
            )
            if not fringe:
                break
            block.add(rng.choice(fringe))
        return block

    o = grow(set())
    d = grow(set(o))
    start = rng.randrange(m)
    end = min(m - 1, start + rng.randrange(3))
    return ODTTriple.make(o, d, (start, end))
