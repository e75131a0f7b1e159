"""Estimator facade: parameter handling, input coercion, predict semantics."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from odtminer.estimator import ODTPatternMiner
from odtminer.levelwise import mine_all
from odtminer.model import MiningConfig, RankParams, ValidationError
from odtminer.variants import mine_bounded, mine_topk

from _utils import (
    DEMO_EDGES,
    DEMO_MINSUP,
    DEMO_SIGNATURE,
    DEMO_SUPPORTS,
    levels_signature,
    triple,
)


def demo_miner(**overrides):
    params = dict(s_a=0.5, s_r=0.6)
    params.update(overrides)
    return ODTPatternMiner(**params)


class TestParameterContract:
    def test_get_params_round_trips_through_set_params(self):
        est = ODTPatternMiner(s_a=0.3, k=4, maxl=5, s_r=None)
        params = est.get_params()
        other = ODTPatternMiner().set_params(**params)
        assert other.get_params() == params

    def test_clone_keeps_parameters_and_drops_fitted_state(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        assert not hasattr(fresh, "levels_")

    @pytest.mark.parametrize(
        ("kwargs", "message"),
        [
            ({}, "exactly one of s_r and k"),
            ({"s_r": 0.5, "k": 3, "maxl": 5}, "exactly one of s_r and k"),
            ({"k": 3}, "maxl is required with k"),
            ({"k": 3, "maxl": 5, "rank_algo": "best"}, "rank_algo must be one of"),
            ({"s_r": 0.5, "opt": "turbo"}, "opt must be one of"),
            ({"s_r": 0.5, "origins": [0]}, "must be given together"),
            ({"k": 2, "maxl": 5, "bound_o": 1}, "does not combine"),
            (
                {"k": 2, "maxl": 5, "origins": [0], "dests": [3], "slots": (0, 47)},
                "does not combine",
            ),
        ],
    )
    def test_parameter_conflicts(self, demo, kwargs, message):
        table, graph = demo
        est = ODTPatternMiner(graph=graph, s_a=0.5, **kwargs)
        with pytest.raises(ValidationError, match=message):
            est.fit(table)

    def test_graph_is_required(self, demo):
        table, _ = demo
        with pytest.raises(ValidationError, match="graph must be set"):
            demo_miner().fit(table)


class TestInputCoercion:
    def test_support_table_and_graph_object(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        assert levels_signature(est.levels_) == DEMO_SIGNATURE
        assert est.minsup_ == DEMO_MINSUP

    def test_edge_list_graph_with_mapping_input(self):
        est = demo_miner(graph=DEMO_EDGES, n_regions=4, n_slots=48)
        est.fit(DEMO_SUPPORTS)
        assert levels_signature(est.levels_) == DEMO_SIGNATURE

    def test_row_iterable_accumulates_duplicates(self):
        rows = []
        for (o, d, t), s in DEMO_SUPPORTS.items():
            rows.append((o, d, t, 1))
            if s > 1:
                rows.append((o, d, t, s - 1))
        est = demo_miner(graph=DEMO_EDGES, n_regions=4, n_slots=48).fit(rows)
        assert levels_signature(est.levels_) == DEMO_SIGNATURE

    def test_mapping_requires_dimensions(self):
        est = demo_miner(graph=DEMO_EDGES)
        with pytest.raises(ValidationError, match="n_regions and n_slots"):
            est.fit(DEMO_SUPPORTS)

    @pytest.mark.parametrize(
        ("entry", "message"),
        [
            ({(0, 9, 0): 1}, "region id out of range"),
            ({(0, 1, 50): 1}, "timeslot out of range"),
            ({(2, 2, 0): 1}, "self-loop"),
            ({(0, 1, 0): 0}, "support must be positive"),
        ],
    )
    def test_entry_validation(self, entry, message):
        est = demo_miner(graph=DEMO_EDGES, n_regions=4, n_slots=48)
        with pytest.raises(ValidationError, match=message):
            est.fit(entry)


class TestFittedState:
    def test_matches_the_engine(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph, opt="avfc").fit(table)
        engine = mine_all(table, graph, MiningConfig(s_a=0.5, s_r=0.6), "avfc")
        assert levels_signature(est.levels_) == levels_signature(engine.levels)
        assert est.counters_ == engine.counters.as_dict()

    def test_patterns_are_ordered_levels_then_keys(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        order = [(e.triple.level, e.triple.key) for e in est.patterns_]
        assert order == sorted(order)
        assert len(est.patterns_) == est.report_["total_patterns"]

    def test_report_shape(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        assert est.report_["levels"] == {3: 2, 4: 1, 5: 1}
        assert est.report_["minsup"] == DEMO_MINSUP
        assert est.report_["counters"] == est.counters_
        assert set(est.report_["phase_seconds"]) == {"generation", "counting", "total"}

    def test_threads_do_not_change_the_result(self, demo):
        table, graph = demo
        one = demo_miner(graph=graph, threads=1).fit(table)
        four = demo_miner(graph=graph, threads=4).fit(table)
        assert levels_signature(one.levels_) == levels_signature(four.levels_)

    def test_rank_mode_matches_mine_topk(self, demo):
        table, graph = demo
        cfg = MiningConfig(s_a=0.5, rank=RankParams(2, 6))
        for algo in ("baserank", "baseoptrank", "optrank"):
            est = ODTPatternMiner(graph=graph, s_a=0.5, k=2, maxl=6, rank_algo=algo)
            est.fit(table)
            engine = mine_topk(table, graph, cfg, algo)
            assert levels_signature(est.levels_) == levels_signature(engine.levels)
            assert est.minsup_ == engine.minsup

    def test_bounds_and_constraints_pass_through(self, demo):
        table, graph = demo
        bounded = demo_miner(graph=graph, bound_o=1).fit(table)
        cfg = MiningConfig(s_a=0.5, s_r=0.6)
        want = mine_bounded(table, graph, cfg, 1, 10**9, 10**9)
        assert levels_signature(bounded.levels_) == levels_signature(want.levels)
        # the only level-4 pattern needs two origin regions, so it is gone
        assert set(bounded.levels_) == {3}
        narrowed = demo_miner(
            graph=graph, origins=[0, 1], dests=[3], slots=(18, 19)
        ).fit(table)
        assert all(
            set(e.triple.origins) <= {0, 1} and set(e.triple.dests) <= {3}
            for lvl in narrowed.levels_.values()
            for e in lvl
        )


class TestPredict:
    def test_requires_fit(self):
        with pytest.raises(NotFittedError):
            demo_miner(graph=DEMO_EDGES).predict([triple({0}, {3}, 18)])

    def test_accepts_triples_keys_and_tuples(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        queries = [
            triple({0}, {3}, 18),  # atomic pattern
            "O=[0,1];D=[3];T=[18,18]",  # level-4 pattern as a key string
            ((0, 1, 2), (3,), (18, 18)),  # level-5 pattern as a plain tuple
            triple({2}, {0}, 20),  # atomic triple below the cutoff
            "O=[1];D=[3];T=[17,17]",  # valid key, zero support
        ]
        got = est.predict(queries)
        assert isinstance(got, np.ndarray) and got.dtype == np.bool_
        assert got.tolist() == [True, True, True, False, False]

    def test_predict_agrees_with_pattern_keys(self, demo):
        table, graph = demo
        est = demo_miner(graph=graph).fit(table)
        keys = sorted(est.pattern_keys_)
        assert est.predict(keys).all()
