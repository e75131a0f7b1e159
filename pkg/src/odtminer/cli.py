"""Command-line surface: aggregate, mine, oracle, synth, and bench.

Exit codes: 0 success, 2 input validation failure, 3 conflicting or malformed
flags, 4 oracle size-guard refusal.  Pattern output is JSON Lines, one object
per pattern, levels ascending and canonical key ascending within a level, so
output bytes are a pure function of the input files and flags.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
from pathlib import Path

from .ingest import (
    aggregate_csv,
    load_instance,
    load_support_csv,
    read_graph_file,
    write_support_csv,
)
from .levelwise import OPT_LEVELS, MiningResult, mine_all
from .model import (
    DomainConstraints,
    MiningConfig,
    RankParams,
    SizeBounds,
    ValidationError,
    as_fraction,
)
from .oracle import OracleGuardError, oracle_mine
from .synth import GRAPH_KINDS, SyntheticSpec, generate, write_files
from .variants import RANK_ALGOS, mine_topk

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_USAGE = 3
EXIT_GUARD = 4

_UNBOUNDED = 10**9


class _UsageError(Exception):
    """Flag conflict or malformed flag value; maps to exit code 3."""


# ---------------------------------------------------------------------------
# shared helpers


def _fraction(text: str):
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise _UsageError(f"bad threshold {text!r}: {exc}") from None


def _slot_range(text: str) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition(":")
        return int(lo), int(hi)
    except ValueError:
        raise _UsageError(f"bad slot range {text!r}; expected START:END") from None


def _read_id_file(path) -> frozenset[int]:
    try:
        ids = frozenset(int(tok) for tok in Path(path).read_text().split())
    except OSError as exc:
        raise ValidationError(f"cannot read region list {path}: {exc}") from None
    except ValueError:
        raise ValidationError(f"region list {path} must hold whitespace-separated integers")
    if not ids:
        raise ValidationError(f"region list {path} is empty")
    return ids


def _load_inputs(args) -> tuple:
    """Resolve (table, graph) from --instance or --input/--graph."""
    if args.instance is not None:
        if args.input is not None or args.graph is not None:
            raise _UsageError("--instance conflicts with --input/--graph")
        return load_instance(args.instance)
    if args.input is None or args.graph is None:
        raise _UsageError("either --instance or both --input and --graph are required")
    graph = read_graph_file(args.graph, args.num_regions)
    table = load_support_csv(args.input, n_regions=graph.n_regions, n_slots=args.num_slots)
    return table, graph


def pattern_line(level: int, ev) -> str:
    """Render one pattern as its canonical compact JSON line."""
    t = ev.triple
    obj = {
        "level": level,
        "O": list(t.origins),
        "D": list(t.dests),
        "T": [t.t_start, t.t_end],
        "cnt": ev.cnt,
        "card": ev.card,
        "ratio": ev.cnt / ev.card,
    }
    return json.dumps(obj, separators=(",", ":"))


def write_patterns_jsonl(levels: dict, path) -> int:
    """Write patterns level-ascending, key-ascending; returns the line count."""
    written = 0
    with open(path, "w") as fh:
        for lvl in sorted(levels):
            for ev in sorted(levels[lvl], key=lambda e: e.triple.key):
                fh.write(pattern_line(lvl, ev) + "\n")
                written += 1
    return written


def _result_report(result: MiningResult, config: dict) -> dict:
    return {
        "levels": {str(lvl): len(evs) for lvl, evs in sorted(result.levels.items())},
        "total_patterns": result.total_patterns(),
        "minsup": result.minsup,
        "counters": result.counters.as_dict(),
        "phase_seconds": result.phase_seconds,
        "config": config,
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_aggregate(args) -> int:
    graph = read_graph_file(args.graph, args.num_regions)
    table, rejected = aggregate_csv(args.trips, args.slot_minutes, graph.n_regions)
    for reason in sorted(rejected):
        print(f"rejected[{reason}]={rejected[reason]}", file=sys.stderr)
    if not len(table):
        raise ValidationError("no atomic triples")
    write_support_csv(table, args.out)
    print(f"aggregated {len(table)} atomic triples -> {args.out}")
    return EXIT_OK


def _mine_config(args) -> tuple[MiningConfig, str | None]:
    """Translate mine flags into a config; returns (config, rank_algo or None)."""
    if (args.sr is None) == (args.topk is None):
        raise _UsageError("exactly one of --sr and --topk is required")
    if args.topk is not None and args.opt is not None:
        raise _UsageError("--opt conflicts with --topk; use --rank-algo instead")
    if args.topk is not None and args.max_level is None:
        raise _UsageError("--topk requires --max-level")
    if args.topk is None and args.rank_algo is not None:
        raise _UsageError("--rank-algo requires --topk")
    bounds = None
    if not (args.bound_o is None and args.bound_d is None and args.bound_t is None):
        bounds = SizeBounds(
            args.bound_o if args.bound_o is not None else _UNBOUNDED,
            args.bound_d if args.bound_d is not None else _UNBOUNDED,
            args.bound_t if args.bound_t is not None else _UNBOUNDED,
        )
    constraints = None
    given = (args.origins, args.dests, args.slots)
    if any(v is not None for v in given):
        if any(v is None for v in given):
            raise _UsageError("--origins, --dests, and --slots must be given together")
        constraints = DomainConstraints(
            _read_id_file(args.origins), _read_id_file(args.dests), args.slots
        )
    rank = None
    rank_algo = None
    if args.topk is not None:
        if bounds is not None or constraints is not None:
            raise _UsageError("--topk does not combine with bounds or constraints")
        rank = RankParams(args.topk, args.max_level)
        rank_algo = args.rank_algo or "optrank"
    cfg = MiningConfig(
        s_a=args.sa,
        s_r=args.sr,
        bounds=bounds,
        constraints=constraints,
        rank=rank,
        max_level=args.max_level,
    )
    return cfg, rank_algo


def cmd_mine(args) -> int:
    table, graph = _load_inputs(args)
    cfg, rank_algo = _mine_config(args)
    if rank_algo is not None:
        result = mine_topk(table, graph, cfg, rank_algo, cache_limit=args.cache_limit)
        method = rank_algo
    else:
        method = args.opt or "opt"
        result = mine_all(
            table, graph, cfg, method, threads=args.threads, cache_limit=args.cache_limit
        )
    total = write_patterns_jsonl(result.levels, args.out)
    if args.report is not None:
        config = {
            "method": method,
            "s_a": str(cfg.s_a),
            "s_r": None if cfg.s_r is None else str(cfg.s_r),
            "topk": None if cfg.rank is None else cfg.rank.k,
            "max_level": cfg.rank.maxl if cfg.rank is not None else cfg.max_level,
            "threads": args.threads,
        }
        with open(args.report, "w") as fh:
            json.dump(_result_report(result, config), fh, indent=2)
            fh.write("\n")
    print(f"{total} patterns -> {args.out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    table, graph = load_instance(args.instance)
    cfg = MiningConfig(s_a=args.sa, s_r=args.sr, max_level=args.max_level)
    result = oracle_mine(table, graph, cfg)
    total = write_patterns_jsonl(result.pattern_levels(), args.out)
    print(f"{total} patterns -> {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        kind=args.kind,
        n_regions=args.n,
        n_slots=args.m,
        hotspots=args.hotspots,
        intensity=args.intensity,
        background_trips=args.background,
        seed=args.seed,
    )
    inst = generate(spec)
    paths = write_files(inst, args.out_dir)
    for box in inst.boxes:
        print(
            f"planted O={list(box.origins)} D={list(box.dests)} "
            f"T=[{box.t_start},{box.t_end}] intensity={spec.intensity}"
        )
    print(f"{len(inst.trips)} trips -> {paths['trips']}")
    return EXIT_OK


def _grid(text: str, convert) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok:
            out.append(convert(tok))
    if not out:
        raise _UsageError(f"empty sweep list {text!r}")
    return out


_BENCH_FIELDS = [
    "mode",
    "method",
    "s_a",
    "s_r",
    "k",
    "maxl",
    "threads",
    "status",
    "error",
    "patterns",
    "minsup",
    "max_level_mined",
    "total_seconds",
    "generation_seconds",
    "counting_seconds",
]


def _bench_rows(table, graph, args):
    sa_values = _grid(args.sa_grid, _fraction) if args.sa_grid else [_fraction(args.sa)]
    rows = []
    if args.sr_grid is not None:
        opts = _grid(args.opt_grid, str) if args.opt_grid else list(OPT_LEVELS)
        for opt in opts:
            if opt not in OPT_LEVELS:
                raise _UsageError(f"unknown opt tier {opt!r}")
        for s_a, s_r, opt in itertools.product(
            sa_values, _grid(args.sr_grid, _fraction), opts
        ):
            rows.append(
                {
                    "mode": "threshold",
                    "method": opt,
                    "s_a": str(s_a),
                    "s_r": str(s_r),
                    "k": "",
                    "maxl": args.max_level or "",
                    "threads": args.threads,
                }
            )
    if args.topk_grid is not None:
        if args.max_level is None:
            raise _UsageError("--topk-grid requires --max-level")
        algos = _grid(args.rank_algo_grid, str) if args.rank_algo_grid else list(RANK_ALGOS)
        for algo in algos:
            if algo not in RANK_ALGOS:
                raise _UsageError(f"unknown rank algorithm {algo!r}")
        for s_a, k, algo in itertools.product(
            sa_values, _grid(args.topk_grid, int), algos
        ):
            rows.append(
                {
                    "mode": "rank",
                    "method": algo,
                    "s_a": str(s_a),
                    "s_r": "",
                    "k": k,
                    "maxl": args.max_level,
                    "threads": 1,
                }
            )
    if not rows:
        raise _UsageError("nothing to sweep: give --sr-grid and/or --topk-grid")
    counter_fields = None
    for row in rows:
        try:
            if row["mode"] == "threshold":
                cfg = MiningConfig(
                    s_a=row["s_a"], s_r=row["s_r"], max_level=args.max_level
                )
                t0 = time.perf_counter()
                result = mine_all(
                    table,
                    graph,
                    cfg,
                    row["method"],
                    threads=args.threads,
                    cache_limit=args.cache_limit,
                )
                wall = time.perf_counter() - t0
            else:
                cfg = MiningConfig(
                    s_a=row["s_a"], rank=RankParams(row["k"], args.max_level)
                )
                t0 = time.perf_counter()
                result = mine_topk(
                    table, graph, cfg, row["method"], cache_limit=args.cache_limit
                )
                wall = time.perf_counter() - t0
        except (ValidationError, OracleGuardError) as exc:
            row.update(status="error", error=str(exc))
            continue
        counters = result.counters.as_dict()
        if counter_fields is None:
            counter_fields = sorted(counters)
        row.update(
            status="ok",
            error="",
            patterns=result.total_patterns(),
            minsup=result.minsup,
            max_level_mined=result.max_level,
            total_seconds=f"{wall:.6f}",
            generation_seconds=f"{result.phase_seconds['generation']:.6f}",
            counting_seconds=f"{result.phase_seconds['counting']:.6f}",
            **counters,
        )
    return rows, counter_fields or []


def cmd_bench(args) -> int:
    table, graph = _load_inputs(args)
    rows, counter_fields = _bench_rows(table, graph, args)
    fields = _BENCH_FIELDS + counter_fields
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        writer.writerows(rows)
    ok = sum(1 for r in rows if r.get("status") == "ok")
    print(f"{ok}/{len(rows)} runs ok -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_input_flags(sub) -> None:
    sub.add_argument("--instance", help="instance bundle JSON (table + graph)")
    sub.add_argument("--input", help="aggregated CSV with columns o,d,t,support")
    sub.add_argument("--graph", help="edge-list file with one 'u v' line per edge")
    sub.add_argument(
        "--num-regions", type=int, help="region count when it cannot be inferred"
    )
    sub.add_argument(
        "--num-slots", type=int, help="slot count when it cannot be inferred"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odtminer",
        description="Mine generalized origin-destination-time flow patterns.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("aggregate", help="aggregate raw trips into a support table")
    p.add_argument("--trips", required=True, help="CSV with origin,destination,time,flow")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--slot-minutes", type=int, default=30, help="timeslot width")
    p.add_argument("--num-regions", type=int, help="region count override")
    p.add_argument("--out", required=True, help="output aggregated CSV")
    p.set_defaults(func=cmd_aggregate)

    p = subs.add_parser("mine", help="mine patterns from an aggregated table")
    _add_input_flags(p)
    p.add_argument("--sa", required=True, type=_fraction, help="atomic fraction s_a")
    p.add_argument("--sr", type=_fraction, help="ratio threshold s_r")
    p.add_argument("--opt", choices=OPT_LEVELS, help="optimization tier (default opt)")
    p.add_argument("--bound-o", type=int, help="max origin-set size")
    p.add_argument("--bound-d", type=int, help="max destination-set size")
    p.add_argument("--bound-t", type=int, help="max slot-range length")
    p.add_argument("--origins", help="file of allowed origin region ids")
    p.add_argument("--dests", help="file of allowed destination region ids")
    p.add_argument("--slots", type=_slot_range, help="allowed slot range START:END")
    p.add_argument("--topk", type=int, help="keep only the k best triples per level")
    p.add_argument("--rank-algo", choices=RANK_ALGOS, help="top-k algorithm")
    p.add_argument("--max-level", type=int, help="deepest level to mine")
    p.add_argument("--threads", type=int, default=1, help="candidate-evaluation threads")
    p.add_argument("--cache-limit", type=int, help="difference-count cache capacity")
    p.add_argument("--out", default="patterns.jsonl", help="pattern JSONL output")
    p.add_argument("--report", help="write a JSON run report here")
    p.set_defaults(func=cmd_mine)

    p = subs.add_parser("oracle", help="exhaustive reference miner (small instances)")
    p.add_argument("--instance", required=True, help="instance bundle JSON")
    p.add_argument("--sa", required=True, type=_fraction)
    p.add_argument("--sr", required=True, type=_fraction)
    p.add_argument("--max-level", required=True, type=int)
    p.add_argument("--out", default="patterns.jsonl", help="pattern JSONL output")
    p.set_defaults(func=cmd_oracle)

    p = subs.add_parser("synth", help="generate a synthetic instance")
    p.add_argument("--kind", choices=GRAPH_KINDS, default="grid")
    p.add_argument("--n", type=int, default=9, help="number of regions")
    p.add_argument("--m", type=int, default=8, help="number of timeslots")
    p.add_argument("--hotspots", type=int, default=1, help="planted hot boxes")
    p.add_argument("--intensity", type=int, default=40, help="flow per hot cell")
    p.add_argument("--background", type=int, default=120, help="background trip count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True, help="directory for the emitted files")
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("bench", help="sweep configurations and record counters")
    _add_input_flags(p)
    p.add_argument("--sa", default="0.5", help="single s_a when no --sa-grid")
    p.add_argument("--sa-grid", help="comma-separated s_a sweep")
    p.add_argument("--sr-grid", help="comma-separated s_r sweep (threshold mode)")
    p.add_argument("--opt-grid", help="comma-separated opt tiers (default: all)")
    p.add_argument("--topk-grid", help="comma-separated k sweep (rank mode)")
    p.add_argument("--rank-algo-grid", help="comma-separated rank algorithms")
    p.add_argument("--max-level", type=int, help="level cap / rank maxl")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cache-limit", type=int)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_USAGE if code == 2 else code
    except _UsageError as exc:
        # argparse only translates ValueError/TypeError from flag converters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
