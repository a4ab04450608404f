"""Command-line front end.

One executable, eight subcommands: ingest, featurize, netstats, centrality,
evaluate, temporal, synth, report. Flags can come from a TOML config file
(``--config``, one table per subcommand); explicitly passed flags win. Every
output embeds the tool version, the resolved configuration, and the seed —
and nothing else that varies between runs, so identical invocations produce
byte-identical files.

Exit codes: 0 success, 2 usage error, 3 data error, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .classifiers import parse_algorithms
from .errors import DataError, IOFailure, TeamswitchError
from .experiments import (
    ExperimentSpec,
    emit_report,
    load_report,
    render_report,
    run_experiment,
    temporal_feature_rows,
    temporal_split_experiment,
)
from .features import FeatureSet, assemble_dataset, engineer_store, write_dataset
from .league_data import load_store, parse_follow_edges, summarize_transitions, validate_league
from .leagues import LeagueKind
from .socialgraph import CentralityKind, build_graph, centrality, graph_stats, top_k
from .synthleague import SynthConfig, generate, load_synth_config, write_synth_config

USAGE_ERROR, DATA_ERROR, IO_ERROR = 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation record, embedded into every output."""

    subcommand: str
    inputs: tuple[str, ...] = ()
    output: str | None = None
    seed: int | None = None
    league: str | None = None
    features: str | None = None
    algorithms: str | None = None
    format: str | None = None
    extras: tuple[tuple[str, str], ...] = ()

    def meta(self) -> dict[str, str]:
        parts = []
        if self.league:
            parts.append(f"league={self.league}")
        if self.inputs:
            parts.append("input=" + ",".join(self.inputs))
        if self.features:
            parts.append(f"features={self.features}")
        if self.algorithms:
            parts.append(f"algos={self.algorithms}")
        if self.format:
            parts.append(f"format={self.format}")
        parts.extend(f"{k}={v}" for k, v in self.extras)
        meta = {
            "tool": f"teamswitch {__version__}",
            "command": self.subcommand,
            "config": " ".join(parts) if parts else "(defaults)",
        }
        if self.seed is not None:
            meta["seed"] = str(self.seed)
        return meta


class _UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamswitch",
        description="Roster-transition prediction toolkit: ingest league files, "
                    "build features, analyze the follow graph, train and "
                    "evaluate destination classifiers, generate synthetic "
                    "leagues with known ground truth.",
    )
    parser.add_argument("--version", action="version",
                        version=f"teamswitch {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, out_help="output file (stdout when omitted)"):
        p.add_argument("--config", help="TOML config file; flags override it")
        p.add_argument("--out", help=out_help)

    p = sub.add_parser("ingest", help="load and validate a league directory")
    common(p)
    p.add_argument("--input", help="directory with league.toml and the four CSVs")

    p = sub.add_parser("featurize", help="assemble a labeled feature matrix")
    common(p, out_help="output CSV (JSON sidecar written next to it)")
    p.add_argument("--input", help="league directory")
    p.add_argument("--features", help="comma list: position,team,career_length,"
                                      "performance,rank_value,twitter,college or 'all'")
    p.add_argument("--range", dest="season_range", help="season window Y0:Y1")

    p = sub.add_parser("netstats", help="summary statistics of the follow graph")
    common(p)
    p.add_argument("--edges", help="standalone follower,followee CSV")
    p.add_argument("--input", help="league directory (alternative to --edges)")

    p = sub.add_parser("centrality", help="rank players by a centrality measure")
    common(p)
    p.add_argument("--edges", help="standalone follower,followee CSV")
    p.add_argument("--input", help="league directory (alternative to --edges)")
    p.add_argument("--kind", help="degree, in_degree, out_degree, eigenvector, "
                                  "closeness, or betweenness")
    p.add_argument("--top", type=int, help="how many ranked rows to keep (default all)")
    p.add_argument("--damping", type=float, help="eigenvector damping (default 0.85)")
    p.add_argument("--format", help="json, tsv, or csv (default json)")

    p = sub.add_parser("evaluate", help="repeated-split accuracy over a "
                                        "feature-set x algorithm grid")
    common(p, out_help="report file; extension picks tsv/csv/json unless --format")
    p.add_argument("--input", help="league directory")
    p.add_argument("--league", help="informational league tag for the report header")
    p.add_argument("--features", help="feature sets separated by ';', e.g. "
                                      "'twitter,team;twitter;all'")
    p.add_argument("--algos", help="comma list, e.g. 'xgb-like,forest,extra'")
    p.add_argument("--reps", type=int, help="repetitions per cell (default 10)")
    p.add_argument("--split", type=float, help="train fraction (default 0.7)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--range", dest="season_range", help="season window Y0:Y1")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--format", help="tsv, csv, or json")
    p.add_argument("--trees", type=int, help="override ensemble tree count")
    p.add_argument("--rounds", type=int, help="override boosting round count")
    p.add_argument("--depth", type=int, help="override tree depth")
    p.add_argument("--k", type=int, help="override neighbor count")

    p = sub.add_parser("temporal", help="early/late/full-period accuracy with "
                                        "one algorithm")
    common(p, out_help="report file; extension picks tsv/csv/json unless --format")
    p.add_argument("--input", help="league directory")
    p.add_argument("--boundary", type=int, help="last season of the early period")
    p.add_argument("--features", help="feature sets separated by ';' "
                                      "(default: the ten-row comparison grid)")
    p.add_argument("--algo", help="single algorithm (default extra)")
    p.add_argument("--reps", type=int, help="repetitions per cell (default 10)")
    p.add_argument("--split", type=float, help="train fraction (default 0.7)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--range", dest="season_range", help="season window Y0:Y1")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--format", help="tsv, csv, or json")
    p.add_argument("--trees", type=int, help="override ensemble tree count")

    p = sub.add_parser("synth", help="generate a synthetic league with ground truth")
    p.add_argument("--config", help="synth TOML config; flags override it")
    p.add_argument("--out", required=False, help="output directory")
    p.add_argument("--league", help="mlb or nba (default mlb)")
    p.add_argument("--seed", type=int, help="generation seed")
    p.add_argument("--beta", type=float, help="social coupling")
    p.add_argument("--seasons", type=int, help="number of seasons")
    p.add_argument("--roster", type=int, help="nominal roster size")

    p = sub.add_parser("report", help="re-render a stored JSON report")
    p.add_argument("--input", help="JSON report written by evaluate/temporal")
    p.add_argument("--format", help="tsv, csv, or json (default tsv)")
    p.add_argument("--out", help="output file (stdout when omitted)")

    return parser


def _config_table(args) -> dict:
    path = getattr(args, "config", None)
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise IOFailure(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise _UsageError(f"bad config {path}: {exc}") from exc
    table = data.get(args.subcommand, {})
    if not isinstance(table, dict):
        raise _UsageError(f"config table [{args.subcommand}] must be a table")
    return table


def _resolve(args, table: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in table:
        return table[name]
    return default


def _require(value, flag: str):
    if value is None:
        raise _UsageError(f"missing required flag {flag}")
    return value


def _parse_range(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        y0, y1 = text.split(":")
        return int(y0), int(y1)
    except ValueError:
        raise _UsageError(f"bad season range {text!r}, expected Y0:Y1") from None


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {out}: {exc}") from exc


def _emit_json(payload: dict, out: str | None) -> None:
    _write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", out)


def _pick_format(explicit: str | None, out: str | None, default: str) -> str:
    if explicit:
        return explicit.lower()
    if out:
        suffix = Path(out).suffix.lower().lstrip(".")
        if suffix in ("tsv", "csv", "json"):
            return suffix
    return default


def _load_store_checked(input_dir: str):
    try:
        return load_store(input_dir)
    except FileNotFoundError as exc:
        raise IOFailure(f"missing input file: {exc}") from exc
    except OSError as exc:
        raise IOFailure(f"cannot read league directory {input_dir}: {exc}") from exc


def _graph_from_args(args, table) -> tuple:
    """(graph, source path) from --edges or --input."""
    edges_path = _resolve(args, table, "edges")
    input_dir = _resolve(args, table, "input")
    if edges_path and input_dir:
        raise _UsageError("pass either --edges or --input, not both")
    if edges_path:
        try:
            import csv as _csv
            with open(edges_path, newline="", encoding="utf-8") as fh:
                rows = list(_csv.reader(fh))
        except OSError as exc:
            raise IOFailure(f"cannot read {edges_path}: {exc}") from exc
        endpoints = {cell.strip() for row in rows[1:] for cell in row[:2] if cell.strip()}
        edges, _issues = parse_follow_edges(edges_path, endpoints)
        return build_graph(edges), str(edges_path)
    if input_dir:
        store, _issues = _load_store_checked(input_dir)
        return build_graph(store.edges), str(input_dir)
    raise _UsageError("one of --edges or --input is required")


def _cmd_ingest(args) -> int:
    table = _config_table(args)
    input_dir = _require(_resolve(args, table, "input"), "--input")
    out = _resolve(args, table, "out")
    store, issues = _load_store_checked(input_dir)
    validation = validate_league(store)
    transitions = summarize_transitions(engineer_store(store))
    by_code: dict[str, int] = {}
    for issue in issues:
        by_code[issue.code] = by_code.get(issue.code, 0) + 1
    run = RunConfig("ingest", inputs=(input_dir,), output=out,
                    league=store.config.kind.value)
    payload = {
        "_meta": run.meta(),
        "validation": validation.as_dict(),
        "transitions": {
            str(season): {"players": t.players, "leaving": t.leaving,
                          "retiring": t.retiring, "switched": t.switched}
            for season, t in transitions.items()
        },
        "parse_issues": {"total": len(issues), "by_code": dict(sorted(by_code.items()))},
    }
    _emit_json(payload, out)
    return 0


def _cmd_featurize(args) -> int:
    table = _config_table(args)
    input_dir = _require(_resolve(args, table, "input"), "--input")
    out = _require(_resolve(args, table, "out"), "--out")
    features = _resolve(args, table, "features", "all")
    season_range = _parse_range(_resolve(args, table, "season_range"))
    store, _issues = _load_store_checked(input_dir)
    try:
        feature_set = FeatureSet.from_string(features)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    dataset = assemble_dataset(store, feature_set, season_range)
    run = RunConfig("featurize", inputs=(input_dir,), output=out,
                    league=store.config.kind.value, features=feature_set.name,
                    extras=(("range", f"{season_range[0]}:{season_range[1]}"),)
                    if season_range else ())
    try:
        write_dataset(dataset, out, meta_lines=run.meta())
    except OSError as exc:
        raise IOFailure(f"cannot write dataset to {out}: {exc}") from exc
    sys.stdout.write(
        f"wrote {len(dataset)} rows x {dataset.X.shape[1]} columns to {out}\n")
    return 0


def _cmd_netstats(args) -> int:
    table = _config_table(args)
    graph, source = _graph_from_args(args, table)
    out = _resolve(args, table, "out")
    stats = graph_stats(graph)
    run = RunConfig("netstats", inputs=(source,), output=out)
    payload = dict(stats.as_dict())
    payload["_meta"] = run.meta()
    _emit_json(payload, out)
    return 0


def _cmd_centrality(args) -> int:
    table = _config_table(args)
    graph, source = _graph_from_args(args, table)
    out = _resolve(args, table, "out")
    kind_name = _resolve(args, table, "kind", "degree")
    try:
        kind = CentralityKind.parse(kind_name)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    params = {}
    damping = _resolve(args, table, "damping")
    if kind is CentralityKind.EIGENVECTOR and damping is not None:
        params["damping"] = float(damping)
    scores = centrality(graph, kind, **params)
    k = _resolve(args, table, "top")
    ranked = top_k(scores, int(k) if k is not None else max(graph.n, 1))
    fmt = _pick_format(_resolve(args, table, "format"), out, "json")
    run = RunConfig("centrality", inputs=(source,), output=out, format=fmt,
                    extras=(("kind", kind.value),))
    if fmt == "json":
        payload = {
            "_meta": run.meta(),
            "kind": kind.value,
            "top": [[node, score] for node, score in ranked],
        }
        _emit_json(payload, out)
    elif fmt in ("tsv", "csv"):
        sep = "\t" if fmt == "tsv" else ","
        lines = [f"# {k2}: {v}" for k2, v in run.meta().items()]
        lines.append(sep.join(["player_id", kind.value]))
        lines.extend(f"{node}{sep}{score:.10g}" for node, score in ranked)
        _write_text("\n".join(lines) + "\n", out)
    else:
        raise _UsageError(f"unknown format {fmt!r}")
    return 0


def _hyper_overrides(args, table) -> dict:
    overrides = {}
    for flag, field in (("trees", "n_trees"), ("rounds", "n_rounds"),
                        ("depth", "max_depth"), ("k", "k")):
        value = _resolve(args, table, flag)
        if value is not None:
            overrides[field] = int(value)
    return overrides


def _parse_feature_groups(text: str) -> tuple[FeatureSet, ...]:
    groups = [g.strip() for g in text.split(";") if g.strip()]
    if not groups:
        raise _UsageError("no feature sets given")
    try:
        return tuple(FeatureSet.from_string(g) for g in groups)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _cmd_evaluate(args) -> int:
    table = _config_table(args)
    input_dir = _require(_resolve(args, table, "input"), "--input")
    features = _require(_resolve(args, table, "features"), "--features")
    algos = _resolve(args, table, "algos", "extra")
    reps = int(_resolve(args, table, "reps", 10))
    split = float(_resolve(args, table, "split", 0.7))
    seed = int(_resolve(args, table, "seed", 0))
    jobs = int(_resolve(args, table, "jobs", 1))
    out = _resolve(args, table, "out")
    season_range = _parse_range(_resolve(args, table, "season_range"))

    feature_sets = _parse_feature_groups(features)
    try:
        algorithms = parse_algorithms(algos, **_hyper_overrides(args, table))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    store, _issues = _load_store_checked(input_dir)
    spec = ExperimentSpec(
        feature_sets=feature_sets,
        algorithms=algorithms,
        season_range=season_range,
        split_fraction=split,
        repetitions=reps,
        seed=seed,
    )
    report = run_experiment(spec, store, jobs=jobs)
    fmt = _pick_format(_resolve(args, table, "format"), out, "tsv")
    run = RunConfig(
        "evaluate", inputs=(input_dir,), output=out, seed=seed,
        league=store.config.kind.value, features=features, algorithms=algos,
        format=fmt,
        extras=(("reps", str(reps)), ("split", str(split))),
    )
    text = render_report(report, fmt, run.meta())
    _write_text(text, out)
    return 0


def _cmd_temporal(args) -> int:
    table = _config_table(args)
    input_dir = _require(_resolve(args, table, "input"), "--input")
    boundary = _require(_resolve(args, table, "boundary"), "--boundary")
    features = _resolve(args, table, "features")
    algo = _resolve(args, table, "algo", "extra")
    reps = int(_resolve(args, table, "reps", 10))
    split = float(_resolve(args, table, "split", 0.7))
    seed = int(_resolve(args, table, "seed", 0))
    jobs = int(_resolve(args, table, "jobs", 1))
    out = _resolve(args, table, "out")
    season_range = _parse_range(_resolve(args, table, "season_range"))

    feature_sets = (_parse_feature_groups(features) if features
                    else temporal_feature_rows())
    try:
        algorithms = parse_algorithms(algo, **_hyper_overrides(args, table))
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if len(algorithms) != 1:
        raise _UsageError("temporal takes exactly one --algo")
    store, _issues = _load_store_checked(input_dir)
    spec = ExperimentSpec(
        feature_sets=feature_sets,
        algorithms=algorithms,
        season_range=season_range,
        split_fraction=split,
        repetitions=reps,
        seed=seed,
    )
    report = temporal_split_experiment(spec, int(boundary), store, jobs=jobs)
    fmt = _pick_format(_resolve(args, table, "format"), out, "tsv")
    run = RunConfig(
        "temporal", inputs=(input_dir,), output=out, seed=seed,
        league=store.config.kind.value,
        features=features or "(ten-row grid)", algorithms=algo, format=fmt,
        extras=(("boundary", str(boundary)), ("reps", str(reps))),
    )
    text = render_report(report, fmt, run.meta())
    _write_text(text, out)
    return 0


def _cmd_synth(args) -> int:
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            config = load_synth_config(config_path)
        except OSError as exc:
            raise IOFailure(f"cannot read config {config_path}: {exc}") from exc
    else:
        league = LeagueKind.parse(args.league) if args.league else LeagueKind.MLB
        config = SynthConfig(league=league)
    overrides = {}
    if args.league and config_path:
        overrides["league"] = LeagueKind.parse(args.league)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.beta is not None:
        overrides["beta"] = args.beta
    if args.seasons is not None:
        overrides["n_seasons"] = args.seasons
    if args.roster is not None:
        overrides["roster_size"] = args.roster
    if overrides:
        config = replace(config, **overrides)
    out = _require(args.out, "--out")

    result = generate(config)
    result.write(out)
    write_synth_config(config, Path(out) / "synth.toml")
    run = RunConfig("synth", output=out, seed=config.seed,
                    league=config.league.value,
                    extras=(("beta", str(config.beta)),
                            ("n_seasons", str(config.n_seasons)),
                            ("roster_size", str(config.roster_size))))
    switchers = len(result.truth.rows)
    from .synthleague import bayes_accuracy
    payload = {
        "_meta": run.meta(),
        "players": len(result.store.player_ids),
        "player_seasons": len(result.store.players),
        "switchers": switchers,
        "bayes_accuracy": bayes_accuracy(result.truth) if switchers else None,
    }
    try:
        (Path(out) / "run.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write run summary: {exc}") from exc
    sys.stdout.write(f"wrote synthetic league to {out} "
                     f"({payload['player_seasons']} player-seasons, "
                     f"{switchers} switchers)\n")
    return 0


def _cmd_report(args) -> int:
    input_path = _require(args.input, "--input")
    fmt = _pick_format(args.format, args.out, "tsv")
    report = load_report(input_path)
    run = RunConfig("report", inputs=(input_path,), output=args.out, format=fmt)
    text = render_report(report, fmt, run.meta())
    _write_text(text, args.out)
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "featurize": _cmd_featurize,
    "netstats": _cmd_netstats,
    "centrality": _cmd_centrality,
    "evaluate": _cmd_evaluate,
    "temporal": _cmd_temporal,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.subcommand](args)
    except (_UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except TeamswitchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
