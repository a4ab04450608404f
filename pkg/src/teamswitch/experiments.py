"""Evaluation protocol: repeated random splits over feature-set x algorithm
grids, temporal early/late comparisons, and table-shaped report emission.

Each repetition draws a fresh seeded 70/30 row split, shared by every
algorithm in that cell row so the comparison is split-for-split fair. The
split is per-row uniform at random, not grouped by player, so the same player
may appear in train and test in different seasons — a deliberate mirror of
the evaluated protocol and a known threat to validity.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .classifiers import Algorithm, fit, predict_batch
from .errors import EmptyDataset, EmptyPeriod, IOFailure, LengthMismatch
from .features import FeatureSet, LabeledDataset, Workspace, assemble_dataset, build_workspace
from .league_data import LeagueStore

BASELINE = 1.0 / 29.0

REPORT_FORMAT = "teamswitch-report/1"
TEMPORAL_FORMAT = "teamswitch-temporal/1"


def accuracy(predictions, truths) -> float:
    """Matches divided by total predictions."""
    n_pred, n_true = len(predictions), len(truths)
    if n_pred != n_true:
        raise LengthMismatch(f"{n_pred} predictions vs {n_true} truths")
    if n_pred == 0:
        raise EmptyDataset("cannot score an empty prediction list")
    matches = sum(1 for p, t in zip(predictions, truths) if p == t)
    return matches / n_pred


def uniform_baseline_accuracy(dataset: LabeledDataset, seed: int) -> float:
    """Accuracy of guessing uniformly over the 29 unmasked teams per row."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mask = dataset.current_team_indices()
    K = len(dataset.teams)
    draws = rng.integers(0, K - 1, size=len(dataset))
    guesses = draws + (draws >= mask)  # skip over the masked index
    return float((guesses == dataset.y).mean())


@dataclass(frozen=True)
class ExperimentSpec:
    feature_sets: tuple[FeatureSet, ...]
    algorithms: tuple[Algorithm, ...]
    season_range: tuple[int, int] | None = None
    split_fraction: float = 0.7
    repetitions: int = 10
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "feature_sets", tuple(self.feature_sets))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.feature_sets:
            raise ValueError("at least one feature set required")
        if not self.algorithms:
            raise ValueError("at least one algorithm required")
        if not (0.0 < self.split_fraction < 1.0):
            raise ValueError("split_fraction must be in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class CellResult:
    feature_set: str
    algorithm: str
    mean_accuracy: float
    accuracies: tuple[float, ...]
    n_rows: int
    n_train: int
    n_test: int


@dataclass(frozen=True)
class AccuracyReport:
    league: str
    season_range: tuple[int, int]
    split_fraction: float
    repetitions: int
    seed: int
    baseline: float
    feature_sets: tuple[str, ...]
    algorithms: tuple[str, ...]
    cells: tuple[CellResult, ...]
    top_mla: tuple[tuple[str, str], ...]  # (feature_set, best algorithm)

    def cell(self, feature_set: str, algorithm: str) -> CellResult:
        for c in self.cells:
            if c.feature_set == feature_set and c.algorithm == algorithm:
                return c
        raise KeyError((feature_set, algorithm))

    def to_jsonable(self) -> dict:
        return {
            "league": self.league,
            "season_range": list(self.season_range),
            "split_fraction": self.split_fraction,
            "repetitions": self.repetitions,
            "seed": self.seed,
            "baseline": self.baseline,
            "feature_sets": list(self.feature_sets),
            "algorithms": list(self.algorithms),
            "cells": [
                {
                    "feature_set": c.feature_set,
                    "algorithm": c.algorithm,
                    "mean_accuracy": c.mean_accuracy,
                    "accuracies": list(c.accuracies),
                    "n_rows": c.n_rows,
                    "n_train": c.n_train,
                    "n_test": c.n_test,
                }
                for c in self.cells
            ],
            "top_mla": [list(pair) for pair in self.top_mla],
        }

    @classmethod
    def from_jsonable(cls, payload: dict) -> "AccuracyReport":
        return cls(
            league=payload["league"],
            season_range=tuple(payload["season_range"]),
            split_fraction=payload["split_fraction"],
            repetitions=payload["repetitions"],
            seed=payload["seed"],
            baseline=payload["baseline"],
            feature_sets=tuple(payload["feature_sets"]),
            algorithms=tuple(payload["algorithms"]),
            cells=tuple(
                CellResult(
                    feature_set=c["feature_set"],
                    algorithm=c["algorithm"],
                    mean_accuracy=c["mean_accuracy"],
                    accuracies=tuple(c["accuracies"]),
                    n_rows=c["n_rows"],
                    n_train=c["n_train"],
                    n_test=c["n_test"],
                )
                for c in payload["cells"]
            ),
            top_mla=tuple((fs, alg) for fs, alg in payload["top_mla"]),
        )


def _fit_seed(master: int, rep: int, fs_index: int, alg_index: int) -> int:
    ss = np.random.SeedSequence(entropy=[master, rep, fs_index, alg_index])
    return int(ss.generate_state(1)[0])


def _split_indices(n: int, split_fraction: float, master: int, rep: int):
    n_train = int(round(split_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=[master, rep]))
    perm = rng.permutation(n)
    return perm[:n_train], perm[n_train:]


def _evaluate_cell(args):
    """All repetitions for one (feature set, algorithm) cell."""
    (X, y, teams, manifest, mask_idx, splits, algorithm, seeds) = args
    ds = _ArrayDataset(X, y, teams, manifest)
    accs = []
    for (train, test), seed in zip(splits, seeds):
        model = fit(algorithm, ds.subset(train), seed)
        pred = predict_batch(model, X[test], mask_idx[test])
        accs.append(accuracy(pred.tolist(), y[test].tolist()))
    return accs


class _ArrayDataset:
    """Minimal training view: just what ``fit`` reads."""

    def __init__(self, X, y, teams, manifest):
        self.X = X
        self.y = y
        self.teams = teams
        self.manifest = manifest

    def subset(self, rows) -> "_ArrayDataset":
        return _ArrayDataset(self.X[rows], self.y[rows], self.teams, self.manifest)


def run_experiment(
    spec: ExperimentSpec, store: LeagueStore | Workspace, jobs: int = 1
) -> AccuracyReport:
    """Evaluate the full feature-set x algorithm grid. ``jobs`` > 1 spreads
    cells over worker processes; results reduce in grid order either way."""
    ws = store if isinstance(store, Workspace) else build_workspace(store)
    config = ws.store.config
    y0, y1 = spec.season_range if spec.season_range is not None else (
        config.first_season, config.last_season)

    payloads = []
    shapes = []  # (n_rows, n_train, n_test) per feature set
    for fs_index, fs in enumerate(spec.feature_sets):
        ds = assemble_dataset(ws, fs, (y0, y1))
        n = len(ds)
        if n < 2:
            raise EmptyDataset(
                f"feature set {fs.name}: {n} row(s) cannot be split")
        mask_idx = ds.current_team_indices()
        splits = [
            _split_indices(n, spec.split_fraction, spec.seed, rep)
            for rep in range(spec.repetitions)
        ]
        shapes.append((n, len(splits[0][0]), len(splits[0][1])))
        for alg_index, alg in enumerate(spec.algorithms):
            seeds = [
                _fit_seed(spec.seed, rep, fs_index, alg_index)
                for rep in range(spec.repetitions)
            ]
            payloads.append((ds.X, ds.y, ds.teams, ds.manifest,
                             mask_idx, splits, alg, seeds))

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_cell, payloads))
    else:
        results = [_evaluate_cell(p) for p in payloads]

    cells: list[CellResult] = []
    fs_names = tuple(fs.name for fs in spec.feature_sets)
    alg_names = tuple(a.name for a in spec.algorithms)
    i = 0
    for fs_index, fs in enumerate(spec.feature_sets):
        n, n_train, n_test = shapes[fs_index]
        for alg in spec.algorithms:
            accs = results[i]
            i += 1
            cells.append(CellResult(
                feature_set=fs.name,
                algorithm=alg.name,
                mean_accuracy=float(np.mean(accs)),
                accuracies=tuple(accs),
                n_rows=n,
                n_train=n_train,
                n_test=n_test,
            ))

    top: list[tuple[str, str]] = []
    for fs_name in fs_names:
        row = [c for c in cells if c.feature_set == fs_name]
        best = max(row, key=lambda c: c.mean_accuracy)
        # ties resolve to the earliest algorithm in enumeration order, which
        # max() already gives since it keeps the first maximal element
        top.append((fs_name, best.algorithm))

    return AccuracyReport(
        league=config.kind.value,
        season_range=(y0, y1),
        split_fraction=spec.split_fraction,
        repetitions=spec.repetitions,
        seed=spec.seed,
        baseline=BASELINE,
        feature_sets=fs_names,
        algorithms=alg_names,
        cells=tuple(cells),
        top_mla=tuple(top),
    )


def temporal_feature_rows() -> tuple[FeatureSet, ...]:
    """The ten-row feature grid of the temporal comparison tables: the five
    social+x combinations, social alone, then each non-social block alone."""
    return (
        FeatureSet(twitter=True, performance=True, career_length=True,
                   position=True, rank_value=True),
        FeatureSet(twitter=True, performance=True),
        FeatureSet(twitter=True, career_length=True),
        FeatureSet(twitter=True, position=True),
        FeatureSet(twitter=True, rank_value=True),
        FeatureSet(twitter=True),
        FeatureSet(performance=True),
        FeatureSet(career_length=True),
        FeatureSet(position=True),
        FeatureSet(rank_value=True),
    )


@dataclass(frozen=True)
class TemporalReport:
    boundary: int
    early: AccuracyReport
    late: AccuracyReport
    full: AccuracyReport

    def to_jsonable(self) -> dict:
        return {
            "boundary": self.boundary,
            "early": self.early.to_jsonable(),
            "late": self.late.to_jsonable(),
            "full": self.full.to_jsonable(),
        }

    @classmethod
    def from_jsonable(cls, payload: dict) -> "TemporalReport":
        return cls(
            boundary=payload["boundary"],
            early=AccuracyReport.from_jsonable(payload["early"]),
            late=AccuracyReport.from_jsonable(payload["late"]),
            full=AccuracyReport.from_jsonable(payload["full"]),
        )


def temporal_split_experiment(
    spec: ExperimentSpec, boundary: int, store: LeagueStore | Workspace,
    jobs: int = 1,
) -> TemporalReport:
    """Evaluate [y0, boundary], (boundary, y1], and [y0, y1] with one
    algorithm (callers default to extremely randomized trees)."""
    ws = store if isinstance(store, Workspace) else build_workspace(store)
    config = ws.store.config
    y0, y1 = spec.season_range if spec.season_range is not None else (
        config.first_season, config.last_season)
    periods = {
        "early": (y0, boundary),
        "late": (boundary + 1, y1),
        "full": (y0, y1),
    }
    reports = {}
    for name, (a, b) in periods.items():
        if a > b:
            raise EmptyPeriod(f"{name} period {a}-{b} is empty")
        try:
            reports[name] = run_experiment(
                replace(spec, season_range=(a, b)), ws, jobs=jobs)
        except EmptyDataset as exc:
            raise EmptyPeriod(f"{name} period {a}-{b}: {exc}") from exc
    return TemporalReport(boundary, reports["early"], reports["late"],
                          reports["full"])


def format_percent(value: float) -> str:
    return f"{value * 100.0:.3f}"


def _table_lines(report: AccuracyReport, delimiter: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    top = dict(report.top_mla)
    writer.writerow(["features", *report.algorithms, "top_mla"])
    for fs in report.feature_sets:
        row = [fs]
        for alg in report.algorithms:
            row.append(format_percent(report.cell(fs, alg).mean_accuracy))
        row.append(top[fs])
        writer.writerow(row)
    writer.writerow(["baseline",
                     *[format_percent(report.baseline) for _ in report.algorithms],
                     ""])
    return buf.getvalue()


def _temporal_lines(report: TemporalReport, delimiter: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    algorithm = report.full.algorithms[0]
    writer.writerow(["features", "early", "late", "full", "algorithm"])
    for fs in report.full.feature_sets:
        writer.writerow([
            fs,
            format_percent(report.early.cell(fs, algorithm).mean_accuracy),
            format_percent(report.late.cell(fs, algorithm).mean_accuracy),
            format_percent(report.full.cell(fs, algorithm).mean_accuracy),
            algorithm,
        ])
    return buf.getvalue()


def render_report(report, fmt: str, meta: dict | None = None) -> str:
    """Render an AccuracyReport or TemporalReport to tsv/csv/json text.
    ``meta`` key/value pairs become leading comment lines (or a JSON meta
    object)."""
    fmt = fmt.lower()
    if fmt not in ("tsv", "csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    temporal = isinstance(report, TemporalReport)
    if fmt == "json":
        payload = {
            "format": TEMPORAL_FORMAT if temporal else REPORT_FORMAT,
            "meta": meta or {},
            "report": report.to_jsonable(),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    delimiter = "\t" if fmt == "tsv" else ","
    table = (_temporal_lines if temporal else _table_lines)(report, delimiter)
    header = "".join(f"# {k}: {v}\n" for k, v in (meta or {}).items())
    return header + table


def emit_report(report, fmt: str, path, meta: dict | None = None) -> None:
    """render_report straight to a file."""
    text = render_report(report, fmt, meta)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write report to {path}: {exc}") from exc


def load_report(path) -> AccuracyReport | TemporalReport:
    """Read back a JSON report emitted by emit_report."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IOFailure(f"cannot read report from {path}: {exc}") from exc
    fmt = payload.get("format")
    if fmt == REPORT_FORMAT:
        return AccuracyReport.from_jsonable(payload["report"])
    if fmt == TEMPORAL_FORMAT:
        return TemporalReport.from_jsonable(payload["report"])
    raise ValueError(f"unknown report file format {fmt!r}")
