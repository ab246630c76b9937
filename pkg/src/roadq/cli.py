"""Command-line entry point: ``roadq {ingest,assess,plan,demo}``.

Exit codes: 0 success, 1 case-study mismatch, 2 configuration or input
error, 3 no route.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

from .assessment import DEFAULT_DMAX_PER_KM, SegmentAssessment, assess_network
from .candidates import DEFAULT_K, DISTANCE, TIME, k_shortest
from .casestudy import EXPECTED_LABELS, rank_candidates, run_case_study
from .config import assessment_fis, load_fis_config, suggestion_fis
from .errors import ClampWarning, ConfigError, InvalidArgument, NoRuleFired
from .fuzzy import FisDefinition
from .geojson import export_geojson
from .ingest import (
    IngestStats,
    ingest_reports,
    load_candidates,
    load_network,
    load_store,
    read_lines,
    save_store,
)
from .network import DEFAULT_MATCH_THRESHOLD_M, RoadNetwork
from .suggestion import RouteRecommendation

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_NO_ROUTE = 3


class NoRoute(Exception):
    pass


@dataclass
class RunConfig:
    network: Path | None = None
    reports: Path | None = None
    assess_fis: Path | None = None
    suggest_fis: Path | None = None
    store: Path | None = None
    threshold_m: float = DEFAULT_MATCH_THRESHOLD_M
    dmax: float = DEFAULT_DMAX_PER_KM
    k: int = DEFAULT_K
    weight: str = TIME
    candidates: Path | None = None
    geojson: Path | None = None
    header: bool = True
    src: int | None = None
    dst: int | None = None

    def assessment(self) -> FisDefinition:
        return load_fis_config(self.assess_fis) if self.assess_fis else assessment_fis()

    def suggestion(self) -> FisDefinition:
        return load_fis_config(self.suggest_fis) if self.suggest_fis else suggestion_fis()


def _fmt(value: object) -> str:
    return f"{value:.4f}" if isinstance(value, float) else str(value)


def write_table(out: TextIO, headers: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    cells = [list(headers)] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    for row in cells:
        out.write("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n")


def _header(out: TextIO, cfg: RunConfig, command: str) -> None:
    if cfg.header:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        out.write(f"# roadq {command} {stamp}\n")


def _write_stats(out: TextIO, stats: IngestStats) -> None:
    write_table(
        out,
        ["lines", "accepted", "rejected_invalid", "rejected_unmatched", "deduplicated"],
        [[stats.lines, stats.accepted, stats.rejected_invalid,
          stats.rejected_unmatched, stats.deduplicated]],
    )
    for err in stats.errors:
        out.write(f"  {err}\n")


def _write_json(path: Path, doc: object) -> None:
    try:
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from exc


def _network(cfg: RunConfig) -> RoadNetwork:
    if cfg.network is None:
        raise ConfigError("--network is required")
    network = load_network(cfg.network)
    if cfg.store is not None:
        load_store(network, cfg.store)
    if cfg.reports is not None:
        ingest_reports(network, read_lines(cfg.reports), cfg.threshold_m)
    return network


def cmd_ingest(cfg: RunConfig, out: TextIO) -> int:
    if cfg.reports is None or cfg.store is None:
        raise ConfigError("ingest needs --reports and --store")
    if cfg.network is None:
        raise ConfigError("--network is required")
    network = load_network(cfg.network)
    if cfg.store.exists():
        # accumulate into an existing store; already stored reports are no-ops
        load_store(network, cfg.store)
    stats = ingest_reports(network, read_lines(cfg.reports), cfg.threshold_m)
    try:
        save_store(network, cfg.store)
    except OSError as exc:
        raise ConfigError(f"cannot write {cfg.store}: {exc.strerror}") from exc
    _header(out, cfg, "ingest")
    _write_stats(out, stats)
    return EXIT_OK


def _assessment_rows(
    network: RoadNetwork, assessments: dict[int, SegmentAssessment], ids: Sequence[int]
) -> list[list[object]]:
    return [
        [sid, a.features.ra, a.features.severity_index, network.segments[sid].lanes,
         a.quality_score, a.label]
        for sid in ids
        for a in [assessments[sid]]
    ]


ASSESS_HEADERS = ["segment", "ra", "severity", "lanes", "score", "label"]
PLAN_HEADERS = ["rank", "route", "level", "score", "time_min", "length_km", "avg_quality"]


def cmd_assess(cfg: RunConfig, out: TextIO) -> int:
    fis = cfg.assessment()
    network = _network(cfg)
    snap = network.snapshot()
    assessments = assess_network(snap, fis, cfg.dmax)
    if cfg.geojson:
        _write_json(cfg.geojson, export_geojson(snap, assessments))
    _header(out, cfg, "assess")
    write_table(out, ASSESS_HEADERS, _assessment_rows(network, assessments, sorted(assessments)))
    return EXIT_OK


def _plan_rows(ranking: Sequence[RouteRecommendation]) -> list[list[object]]:
    return [
        [r.rank, r.route_id, r.level, r.score, r.metrics.time_min, r.metrics.length_km,
         r.metrics.avg_quality]
        for r in ranking
    ]


def cmd_plan(cfg: RunConfig, out: TextIO) -> int:
    assess, suggest = cfg.assessment(), cfg.suggestion()
    network = _network(cfg)
    if cfg.candidates is not None:
        candidates = load_candidates(network, cfg.candidates)
    elif cfg.src is None or cfg.dst is None:
        raise ConfigError("plan needs --candidates or both --from and --to")
    elif cfg.src == cfg.dst:
        raise NoRoute(f"source and destination are both node {cfg.src}; refusing an empty route")
    else:
        candidates = k_shortest(network, cfg.src, cfg.dst, cfg.k, cfg.weight)
    if not candidates:
        raise NoRoute(f"no route from node {cfg.src} to node {cfg.dst}")
    snap = network.snapshot()
    assessments = assess_network(snap, assess, cfg.dmax)
    ranking = rank_candidates(candidates, assessments, suggest)
    if cfg.geojson:
        _write_json(cfg.geojson, export_geojson(snap, assessments, ranking, candidates))
    _header(out, cfg, "plan")
    write_table(out, PLAN_HEADERS, _plan_rows(ranking))
    return EXIT_OK


def cmd_demo(cfg: RunConfig, out: TextIO) -> int:
    result = run_case_study(cfg.assessment(), cfg.suggestion())
    if cfg.geojson:
        _write_json(
            cfg.geojson,
            export_geojson(
                result.network.snapshot(), result.assessments, result.ranking, result.candidates
            ),
        )
    _header(out, cfg, "demo")
    out.write("ingest\n")
    _write_stats(out, result.stats)
    for cand in result.candidates:
        out.write(f"\nroute {cand.route_id} segment assessment\n")
        expected = EXPECTED_LABELS.get(cand.route_id, ())
        rows = _assessment_rows(result.network, result.assessments, cand.segments)
        for pos, row in enumerate(rows):
            row.insert(0, pos + 1)
            row.append(expected[pos] if pos < len(expected) else "-")
        write_table(out, ["#"] + ASSESS_HEADERS + ["expected"], rows)
    out.write("\nranking\n")
    write_table(out, PLAN_HEADERS, _plan_rows(result.ranking))
    if result.ok:
        out.write("\ncase study reproduced\n")
        return EXIT_OK
    out.write("\ncase study mismatch\n")
    for line in result.mismatches:
        out.write(f"- {line}\n")
    return EXIT_MISMATCH


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", type=Path, help="road network JSON file")
    common.add_argument("--reports", type=Path, help="anomaly reports, JSON Lines")
    common.add_argument("--store", type=Path, help="anomaly store JSON (written by ingest)")
    common.add_argument("--assess-fis", type=Path, help="segment assessment FIS config")
    common.add_argument("--suggest-fis", type=Path, help="route suggestion FIS config")
    common.add_argument("--threshold-m", type=_positive_float, default=DEFAULT_MATCH_THRESHOLD_M,
                        help="map-matching distance threshold in meters")
    common.add_argument("--dmax", type=_positive_float, default=DEFAULT_DMAX_PER_KM,
                        help="anomalies per km treated as maximal density")
    common.add_argument("--geojson", type=Path, help="write a GeoJSON map to this path")
    common.add_argument("--no-header", dest="header", action="store_false",
                        help="omit the timestamp header line")

    parser = argparse.ArgumentParser(prog="roadq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="map-match reports into an anomaly store")
    sub.add_parser("assess", parents=[common], help="score every road segment")
    plan = sub.add_parser("plan", parents=[common], help="rank candidate routes")
    plan.add_argument("--candidates", type=Path, help="imported candidate routes JSON")
    plan.add_argument("--from", dest="src", type=int, help="origin node id")
    plan.add_argument("--to", dest="dst", type=int, help="destination node id")
    plan.add_argument("--k", type=_positive_int, default=DEFAULT_K, help="number of candidates")
    plan.add_argument("--weight", choices=(TIME, DISTANCE), default=TIME)
    sub.add_parser("demo", parents=[common], help="reproduce the bundled two-route case study")
    return parser


COMMANDS = {"ingest": cmd_ingest, "assess": cmd_assess, "plan": cmd_plan, "demo": cmd_demo}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    try:
        with warnings.catch_warnings():
            # out-of-universe inputs are expected with ratios above 3; clamping is the policy
            warnings.simplefilter("ignore", ClampWarning)
            return COMMANDS[args.command](cfg, out)
    except NoRoute as exc:
        print(f"roadq: no route: {exc}", file=sys.stderr)
        return EXIT_NO_ROUTE
    except (ConfigError, InvalidArgument, NoRuleFired) as exc:
        print(f"roadq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
