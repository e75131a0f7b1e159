"""Domain types: triples, keys, validity, the region graph, and configs."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from odtminer.model import (
    DomainConstraints,
    MiningConfig,
    ODTTriple,
    RankParams,
    RegionGraph,
    SizeBounds,
    ValidationError,
    as_fraction,
    canonical_key,
    format_triple,
    parse_triple,
    validate,
)

from _utils import demo_graph, triple


class TestCardinalityAndLevel:
    def test_two_by_two_by_three(self):
        assert triple({0, 1}, {2, 3}, (1, 3)).cardinality == 12

    def test_atomic_triple(self):
        t = triple({0}, {1}, 5)
        assert t.cardinality == 1
        assert t.level == 3

    def test_three_by_one_by_two(self):
        assert triple({0, 1, 2}, {4}, (0, 1)).cardinality == 6

    def test_level_counts_all_atomic_elements(self):
        assert triple({0}, {1, 2}, (1, 3)).level == 6
        assert triple({0, 1}, {3}, (18, 18)).level == 4

    @given(
        o=st.sets(st.integers(0, 9), min_size=1, max_size=3),
        extra=st.integers(10, 19),
        start=st.integers(0, 5),
        length=st.integers(1, 4),
    )
    def test_extending_time_scales_cardinality_exactly(self, o, extra, start, length):
        base = ODTTriple.make(o, {extra}, (start, start + length - 1))
        wider = ODTTriple.make(o, {extra}, (start, start + length))
        assert wider.cardinality * length == base.cardinality * (length + 1)

    def test_level_at_least_three_and_cardinality_positive(self):
        t = triple({7}, {8}, 0)
        assert t.level >= 3 and t.cardinality >= 1


class TestCanonicalKey:
    def test_construction_order_irrelevant(self):
        assert triple([1, 0], {3}, 18).key == triple([0, 1], [3], (18, 18)).key

    def test_distinct_ranges_distinct_keys(self):
        assert triple({0}, {1}, (1, 2)).key != triple({0}, {1}, (2, 3)).key

    def test_origin_destination_roles_ordered(self):
        assert triple({0}, {1}, 1).key != triple({1}, {0}, 1).key

    def test_textual_form(self):
        assert format_triple(triple({1, 0}, {3}, 18)) == "O=[0,1];D=[3];T=[18,18]"
        assert canonical_key(triple({2}, {0, 3}, (4, 7))) == "O=[2];D=[0,3];T=[4,7]"

    @given(
        o=st.sets(st.integers(0, 30), min_size=1, max_size=4),
        d=st.sets(st.integers(31, 60), min_size=1, max_size=4),
        start=st.integers(0, 40),
        length=st.integers(0, 5),
    )
    def test_key_round_trips(self, o, d, start, length):
        t = ODTTriple.make(o, d, (start, start + length))
        assert parse_triple(t.key) == t

    def test_parse_rejects_garbage(self):
        for bad in ("", "O=[];D=[1];T=[0,0]x", "O=[1];D=[2]", "nonsense"):
            with pytest.raises(ValidationError):
                parse_triple(bad)


class TestValidate:
    def test_overlap_detected(self):
        g = demo_graph()
        assert validate(triple({0}, {0}, 1), g) == "origin/destination overlap"

    def test_disconnected_origin_detected(self):
        g = demo_graph()  # A(0) and C(2) are not adjacent
        assert validate(triple({0, 2}, {3}, 0), g) == "disconnected origin set"
        assert validate(triple({3}, {0, 2}, 0), g) == "disconnected destination set"

    def test_connected_chain_is_ok(self):
        g = demo_graph()  # B-C and C-D are edges
        assert validate(triple({1, 2, 3}, {0}, 0), g) is None

    def test_empty_and_bad_range(self):
        g = demo_graph()
        assert validate(ODTTriple((), (1,), 0, 0), g) == "empty origin set"
        assert validate(ODTTriple((0,), (), 0, 0), g) == "empty destination set"
        assert validate(ODTTriple((0,), (1,), 3, 2), g) == "bad timeslot range"
        assert validate(ODTTriple((0,), (1,), -1, 2), g) == "bad timeslot range"

    def test_region_out_of_range(self):
        g = demo_graph()
        assert validate(triple({0}, {9}, 0), g) == "region id out of range"

    def test_slot_bound_enforced_when_given(self):
        g = demo_graph()
        assert validate(triple({0}, {1}, 8), g, n_slots=8) == "bad timeslot range"
        assert validate(triple({0}, {1}, 7), g, n_slots=8) is None


class TestRegionGraph:
    def test_symmetric_duplicates_removed(self):
        g = RegionGraph.from_edges([(0, 1), (1, 0)], 2)
        assert g.neighbors(0) == (1,)
        assert g.neighbors(1) == (0,)

    def test_path_graph(self):
        g = RegionGraph.from_edges([(0, 1), (1, 2), (2, 3)], 4)
        assert g.edges() == [(0, 1), (1, 2), (2, 3)]
        assert g.neighbors(1) == (0, 2)

    def test_self_loop_rejected(self):
        with pytest.raises(ValidationError, match="self-loop"):
            RegionGraph.from_edges([(0, 0)], 2)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError, match="out of range"):
            RegionGraph.from_edges([(0, 5)], 2)

    @given(
        st.lists(
            st.tuples(st.integers(0, 7), st.integers(0, 7)).filter(lambda e: e[0] != e[1]),
            max_size=20,
        )
    )
    def test_adjacency_symmetric_and_irreflexive(self, edges):
        g = RegionGraph.from_edges(edges, 8)
        for u in range(8):
            assert u not in g.neighbors(u)
            for v in g.neighbors(u):
                assert u in g.neighbors(v)

    def test_connected_set_checks(self):
        g = demo_graph()
        assert g.is_connected_set({0, 1, 2})
        assert not g.is_connected_set({0, 2})
        assert g.is_connected_set({3})
        assert not g.is_connected_set(set())


class TestThresholdsAndConfigs:
    def test_float_thresholds_read_as_decimals(self):
        assert as_fraction(0.6) == Fraction(3, 5)
        assert as_fraction("0.6") == Fraction(3, 5)
        assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)
        assert as_fraction(1) == Fraction(1)

    def test_config_normalizes_thresholds(self):
        cfg = MiningConfig(s_a=0.5, s_r=0.6)
        assert cfg.s_a == Fraction(1, 2) and cfg.s_r == Fraction(3, 5)

    def test_config_rejects_bad_sa(self):
        for bad in (0, -0.1, 1.5):
            with pytest.raises(ValidationError):
                MiningConfig(s_a=bad, s_r=0.5)

    def test_sr_and_rank_are_exclusive(self):
        with pytest.raises(ValidationError):
            MiningConfig(s_a=0.5, s_r=0.5, rank=RankParams(3, 5))

    def test_max_level_floor(self):
        with pytest.raises(ValidationError):
            MiningConfig(s_a=0.5, s_r=0.5, max_level=2)

    def test_size_bounds_positive(self):
        with pytest.raises(ValidationError):
            SizeBounds(0, 1, 1)
        assert SizeBounds(1, 2, 3).b_t == 3

    def test_rank_params_validated(self):
        with pytest.raises(ValidationError):
            RankParams(0, 5)
        with pytest.raises(ValidationError):
            RankParams(1, 2)

    def test_constraints_validated(self):
        with pytest.raises(ValidationError):
            DomainConstraints(frozenset(), frozenset({1}), (0, 3))
        with pytest.raises(ValidationError):
            DomainConstraints(frozenset({0}), frozenset({1}), (3, 1))
        c = DomainConstraints({2, 0}, [1], (0, 5))
        assert c.v_o == frozenset({0, 2}) and c.t_range == (0, 5)
