"""Scikit-learn style estimator facade over the mining engine.

`ODTPatternMiner` follows the usual estimator contract: the constructor only
stores parameters, `fit` runs the miner and exposes results as trailing-
underscore attributes, `get_params`/`set_params` come from `BaseEstimator`,
and `predict` answers membership queries against the fitted pattern set.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ingest import SupportTable
from .levelwise import OPT_LEVELS, mine_all
from .model import (
    DomainConstraints,
    MiningConfig,
    ODTTriple,
    RankParams,
    RegionGraph,
    SizeBounds,
    ValidationError,
)
from .variants import RANK_ALGOS, mine_topk


class ODTPatternMiner(BaseEstimator):
    """Mine origin-destination-time patterns from an aggregated flow table.

    Parameters
    ----------
    graph : RegionGraph or iterable of (u, v) edges
        Region adjacency.  An edge list requires `n_regions`.
    s_a : float or Fraction, default 0.1
        Fraction of atomic triples kept as atomic patterns.
    s_r : float or Fraction, optional
        Minimum contained-atomic-pattern ratio.  Exactly one of `s_r`
        and `k` must be given.
    opt : str, default "opt"
        Optimization tier for threshold mining, one of
        ``baseline, av, avfc, avfcin, opt``.
    bound_o, bound_d, bound_t : int, optional
        Upper bounds on origin-set, destination-set, and slot-range size.
        Any combination may be set; unset dimensions stay unbounded.
    origins, dests : iterable of int, optional
        Domain constraints: regions the origin / destination sets may use.
        Both must be given together, along with `slots`.
    slots : (int, int), optional
        Inclusive slot range for constrained mining.
    k : int, optional
        Keep only the k best triples per level (rank mode).
    maxl : int, optional
        Deepest level to expand in rank mode; required with `k`.
    rank_algo : str, default "optrank"
        Rank-mode algorithm, one of ``baserank, baseoptrank, optrank``.
    max_level : int, optional
        Safety cap on the deepest level for threshold mining.
    n_regions, n_slots : int, optional
        Instance dimensions; required when `X` is a plain mapping or row
        iterable rather than a `SupportTable`.
    threads : int, default 1
        Worker threads for candidate evaluation (threshold mining only).
    cache_limit : int, optional
        Maximum entries kept in the difference-count cache.

    Attributes
    ----------
    levels_ : dict[int, list[EvaluatedTriple]]
        Patterns per level, canonically ordered.
    patterns_ : list[EvaluatedTriple]
        All patterns, levels ascending then key ascending.
    minsup_ : int
        Atomic support cutoff implied by `s_a` on the fitted table.
    counters_ : dict[str, int]
        Work counters from the mining run.
    report_ : dict
        Level sizes, thresholds, counters, and phase timings.
    """

    def __init__(
        self,
        graph=None,
        s_a=0.1,
        s_r=None,
        opt="opt",
        bound_o=None,
        bound_d=None,
        bound_t=None,
        origins=None,
        dests=None,
        slots=None,
        k=None,
        maxl=None,
        rank_algo="optrank",
        max_level=None,
        n_regions=None,
        n_slots=None,
        threads=1,
        cache_limit=None,
    ):
        self.graph = graph
        self.s_a = s_a
        self.s_r = s_r
        self.opt = opt
        self.bound_o = bound_o
        self.bound_d = bound_d
        self.bound_t = bound_t
        self.origins = origins
        self.dests = dests
        self.slots = slots
        self.k = k
        self.maxl = maxl
        self.rank_algo = rank_algo
        self.max_level = max_level
        self.n_regions = n_regions
        self.n_slots = n_slots
        self.threads = threads
        self.cache_limit = cache_limit

    # ------------------------------------------------------------------
    # input coercion

    def _resolve_graph(self, table: SupportTable | None) -> RegionGraph:
        if isinstance(self.graph, RegionGraph):
            return self.graph
        if self.graph is None:
            raise ValidationError("graph must be set before fitting")
        n = self.n_regions
        if n is None and table is not None:
            n = table.n_regions
        if n is None:
            raise ValidationError("n_regions is required when graph is an edge list")
        return RegionGraph.from_edges(list(self.graph), n)

    def _resolve_table(self, X) -> SupportTable:
        if isinstance(X, SupportTable):
            return X
        if self.n_regions is None or self.n_slots is None:
            raise ValidationError(
                "n_regions and n_slots are required when X is not a SupportTable"
            )
        if isinstance(X, Mapping):
            entries = {
                (int(o), int(d), int(t)): int(s) for (o, d, t), s in X.items()
            }
        else:
            entries = {}
            for row in X:
                o, d, t, s = row
                key = (int(o), int(d), int(t))
                entries[key] = entries.get(key, 0) + int(s)
        for (o, d, t), s in entries.items():
            if not (0 <= o < self.n_regions and 0 <= d < self.n_regions):
                raise ValidationError(f"region id out of range in entry {(o, d, t)}")
            if not 0 <= t < self.n_slots:
                raise ValidationError(f"timeslot out of range in entry {(o, d, t)}")
            if o == d:
                raise ValidationError(f"self-loop entry {(o, d, t)}")
            if s <= 0:
                raise ValidationError(f"support must be positive in entry {(o, d, t)}")
        return SupportTable(entries, self.n_regions, self.n_slots)

    def _build_config(self) -> MiningConfig:
        if (self.s_r is None) == (self.k is None):
            raise ValidationError("exactly one of s_r and k must be set")
        bounds = None
        if not (self.bound_o is None and self.bound_d is None and self.bound_t is None):
            huge = 10**9
            bounds = SizeBounds(
                self.bound_o if self.bound_o is not None else huge,
                self.bound_d if self.bound_d is not None else huge,
                self.bound_t if self.bound_t is not None else huge,
            )
        constraints = None
        if not (self.origins is None and self.dests is None and self.slots is None):
            if self.origins is None or self.dests is None or self.slots is None:
                raise ValidationError(
                    "origins, dests, and slots must be given together"
                )
            constraints = DomainConstraints(
                frozenset(self.origins), frozenset(self.dests), tuple(self.slots)
            )
        rank = None
        if self.k is not None:
            if self.maxl is None:
                raise ValidationError("maxl is required with k")
            if self.rank_algo not in RANK_ALGOS:
                raise ValidationError(
                    f"rank_algo must be one of {', '.join(RANK_ALGOS)}"
                )
            if constraints is not None or bounds is not None:
                raise ValidationError(
                    "rank mode does not combine with bounds or constraints"
                )
            rank = RankParams(self.k, self.maxl)
        elif self.opt not in OPT_LEVELS:
            raise ValidationError(f"opt must be one of {', '.join(OPT_LEVELS)}")
        return MiningConfig(
            s_a=self.s_a,
            s_r=self.s_r,
            bounds=bounds,
            constraints=constraints,
            rank=rank,
            max_level=self.max_level,
        )

    # ------------------------------------------------------------------
    # estimator API

    def fit(self, X, y=None):
        """Mine patterns from X (a SupportTable, mapping, or row iterable)."""
        table = self._resolve_table(X)
        graph = self._resolve_graph(table)
        cfg = self._build_config()
        if cfg.rank is not None:
            result = mine_topk(
                table, graph, cfg, self.rank_algo, cache_limit=self.cache_limit
            )
        else:
            result = mine_all(
                table,
                graph,
                cfg,
                self.opt,
                threads=self.threads,
                cache_limit=self.cache_limit,
            )
        self.levels_ = result.levels
        self.patterns_ = [
            ev for lvl in sorted(result.levels) for ev in result.levels[lvl]
        ]
        self.pattern_keys_ = frozenset(ev.triple.key for ev in self.patterns_)
        self.minsup_ = result.minsup
        self.counters_ = result.counters.as_dict()
        self.report_ = {
            "levels": {lvl: len(evs) for lvl, evs in sorted(result.levels.items())},
            "total_patterns": result.total_patterns(),
            "minsup": result.minsup,
            "counters": self.counters_,
            "phase_seconds": dict(result.phase_seconds),
        }
        return self

    def predict(self, X):
        """Return a boolean array: is each queried triple a fitted pattern?

        Accepts `ODTTriple` objects, canonical key strings, or
        ``(origins, dests, (t_start, t_end))`` tuples.
        """
        check_is_fitted(self, "pattern_keys_")
        out = []
        for item in X:
            if isinstance(item, ODTTriple):
                key = item.key
            elif isinstance(item, str):
                key = item
            else:
                origins, dests, t_range = item
                key = ODTTriple.make(origins, dests, t_range).key
            out.append(key in self.pattern_keys_)
        return np.asarray(out, dtype=bool)
