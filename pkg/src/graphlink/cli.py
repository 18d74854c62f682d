"""Command-line interface.

    graphlink [--data DIR] [--config FILE] <subcommand> ...

Subcommands: ingest, link, search, get, confirm, bench, serve.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import Engine
from .errors import GraphLinkError
from .ingest import CsvMapping, Ingester, profile_to_obj
from .linker import VERDICTS
from .scoring import MatchConfig
from .service import edge_to_obj
from .simstore import LAYOUTS, run_benchmark, write_aggregate, write_csv

DEFAULT_PORT = 8087


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphlink", description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data", help="data directory (default ./data)")
    parser.add_argument("--config", help="key=value match-config file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p):
        # Accepted after the subcommand as well; SUPPRESS keeps an absent
        # flag from clobbering the value parsed before the subcommand.
        p.add_argument("--data", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        p.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return p

    p_ingest = add_common(sub.add_parser("ingest", help="load profiles from a file"))
    p_ingest.add_argument("format", choices=["jsonl", "csv", "triples"])
    p_ingest.add_argument("path")
    p_ingest.add_argument("--mapping", help="CSV mapping file (JSON), csv format only")

    p_link = add_common(sub.add_parser("link", help="run the linking pipeline over the KB"))
    p_link.add_argument("--k", type=int, help="candidates per profile")

    p_search = add_common(sub.add_parser("search", help="keyword search"))
    p_search.add_argument("query")
    p_search.add_argument("--k", type=int, default=10)

    p_get = add_common(sub.add_parser("get", help="print one profile as JSON"))
    p_get.add_argument("id")

    p_confirm = add_common(
        sub.add_parser("confirm", help="record a human verdict on a pair")
    )
    p_confirm.add_argument("id1")
    p_confirm.add_argument("id2")
    p_confirm.add_argument("verdict", choices=list(VERDICTS))

    p_bench = sub.add_parser("bench", help="benchmark the similarity-store layouts")
    p_bench.add_argument(
        "--layouts",
        default=",".join(LAYOUTS),
        help=f"comma-separated subset of {','.join(LAYOUTS)}",
    )
    p_bench.add_argument(
        "--pairs",
        default="10000,100000,1000000",
        help="comma-separated pair counts",
    )
    p_bench.add_argument("--iters", type=int, default=5)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default="bench_report.csv")
    p_bench.add_argument("--aggregate", default="bench_aggregate.dat")

    p_serve = add_common(sub.add_parser("serve", help="run the HTTP API"))
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui", help="directory with the built review console")

    return parser


def _load_config(args) -> MatchConfig:
    if args.config:
        return MatchConfig.from_file(args.config)
    return MatchConfig()


def _cmd_ingest(args, out) -> int:
    with Engine(args.data, _load_config(args)) as engine:
        ingester = Ingester(engine)
        if args.format == "jsonl":
            count = ingester.ingest_jsonl(args.path)
            what = "profiles"
        elif args.format == "csv":
            if not args.mapping:
                raise GraphLinkError("csv ingestion needs --mapping")
            count = ingester.ingest_csv(args.path, CsvMapping.from_file(args.mapping))
            what = "profiles"
        else:
            count = ingester.ingest_triples(args.path)
            what = "triples"
        for err in ingester.last_errors:
            print(f"skipped {err}", file=sys.stderr)
        print(f"{count} {what} ingested", file=out)
    return 0


def _cmd_link(args, out) -> int:
    cfg = _load_config(args)
    if args.k is not None:
        cfg.candidate_k = args.k
    with Engine(args.data, cfg) as engine:
        stats = engine.link_all()
        print(json.dumps(stats.to_obj(), indent=2), file=out)
    return 0


def _cmd_search(args, out) -> int:
    with Engine(args.data, _load_config(args)) as engine:
        for pid, score in engine.search(args.query, args.k):
            print(f"{pid}\t{score:.6f}", file=out)
    return 0


def _cmd_get(args, out) -> int:
    with Engine(args.data, _load_config(args)) as engine:
        print(json.dumps(profile_to_obj(engine.get_profile(args.id))), file=out)
    return 0


def _cmd_confirm(args, out) -> int:
    with Engine(args.data, _load_config(args)) as engine:
        edge = engine.confirm(args.id1, args.id2, args.verdict)
        print(json.dumps(edge_to_obj(edge)), file=out)
    return 0


def _cmd_bench(args, out) -> int:
    layouts = [x.strip() for x in args.layouts.split(",") if x.strip()]
    pair_counts = [int(x) for x in args.pairs.split(",") if x.strip()]
    reports = run_benchmark(
        layouts=layouts,
        pair_counts=pair_counts,
        iterations=args.iters,
        seed=args.seed,
    )
    write_csv(reports, args.out)
    write_aggregate(reports, args.aggregate)
    print(f"{'layout':<14}{'pairs':>10}{'mean_s':>12}", file=out)
    for report in reports:
        for count, mean in zip(report.pair_counts, report.avg_txn_seconds):
            print(f"{report.layout:<14}{count:>10}{mean:>12.4f}", file=out)
    print(f"report written to {args.out}, aggregate to {args.aggregate}", file=out)
    return 0


def _cmd_serve(args, out) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("PORT", DEFAULT_PORT))
    ui_dir = args.ui or os.environ.get("GRAPHLINK_UI")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    engine = Engine(args.data, _load_config(args))
    app = create_app(engine, ui_dir=ui_dir)
    print(f"serving on http://{args.host}:{port} (data: {args.data})", file=out)
    try:
        uvicorn.run(app, host=args.host, port=port, log_level="warning")
    finally:
        engine.close()
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "link": _cmd_link,
    "search": _cmd_search,
    "get": _cmd_get,
    "confirm": _cmd_confirm,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None, out=sys.stdout) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args, out)
    except (GraphLinkError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
