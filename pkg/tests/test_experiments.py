"""Evaluation protocol: splits, grids, temporal comparisons, report formats."""

import json

import numpy as np
import pytest

from teamswitch.classifiers import Algorithm, parse_algorithms
from teamswitch.errors import EmptyDataset, EmptyPeriod, IOFailure, LengthMismatch
from teamswitch.experiments import (
    BASELINE,
    AccuracyReport,
    ExperimentSpec,
    TemporalReport,
    _split_indices,
    accuracy,
    emit_report,
    format_percent,
    load_report,
    render_report,
    run_experiment,
    temporal_feature_rows,
    temporal_split_experiment,
    uniform_baseline_accuracy,
)
from teamswitch.features import FeatureSet, LabeledDataset, RowMeta

FAST_ALGS = (Algorithm.create("tree"), Algorithm.create("knn", k=3))
FAST_SETS = (FeatureSet(twitter=True), FeatureSet(position=True))


@pytest.fixture(scope="module")
def report(mini_league):
    spec = ExperimentSpec(FAST_SETS, FAST_ALGS, repetitions=3, seed=5)
    return run_experiment(spec, mini_league.store)


@pytest.fixture(scope="module")
def temporal(mini_league):
    config = mini_league.store.config
    spec = ExperimentSpec((FeatureSet(twitter=True),),
                          (Algorithm.create("knn", k=3),), repetitions=2, seed=9)
    return temporal_split_experiment(spec, config.first_season + 1,
                                     mini_league.store)


class TestAccuracy:
    def test_fraction(self):
        assert accuracy([1, 2, 3, 4], [1, 0, 3, 0]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accuracy([1, 2], [1])

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            accuracy([], [])

    def test_baseline_constant(self):
        assert BASELINE == pytest.approx(1.0 / 29.0)
        assert format_percent(BASELINE) == "3.448"


def synthetic_dataset(y, current):
    """Label/mask-only dataset (the baseline guesser reads nothing else)."""
    teams = tuple(f"T{i:02d}" for i in range(30))
    meta = [RowMeta(f"p{i}", 2000, teams[c]) for i, c in enumerate(current)]
    return LabeledDataset(
        X=np.zeros((len(y), 1)), y=np.asarray(y, dtype=np.int64), meta=meta,
        manifest=("f0",), provenance={"position": (0,)}, teams=teams,
        feature_set=FeatureSet(position=True))


class TestUniformBaseline:
    def test_never_guesses_the_masked_team(self):
        # truth planted on the masked team: a mask-respecting guesser scores 0
        rng = np.random.default_rng(1)
        y = rng.integers(0, 30, size=800)
        ds = synthetic_dataset(y, current=y)
        assert uniform_baseline_accuracy(ds, seed=3) == 0.0

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(2)
        y = rng.integers(0, 30, size=500)
        current = (y + 1) % 30
        ds = synthetic_dataset(y, current=current)
        assert uniform_baseline_accuracy(ds, 9) == uniform_baseline_accuracy(ds, 9)
        assert 0.0 <= uniform_baseline_accuracy(ds, 9) <= 1.0


class TestSpec:
    def test_coerces_sequences_to_tuples(self):
        spec = ExperimentSpec(list(FAST_SETS), parse_algorithms("knn,tree"))
        assert isinstance(spec.feature_sets, tuple)
        assert isinstance(spec.algorithms, tuple)

    @pytest.mark.parametrize("kwargs", [
        {"feature_sets": (), "algorithms": FAST_ALGS},
        {"feature_sets": FAST_SETS, "algorithms": ()},
        {"feature_sets": FAST_SETS, "algorithms": FAST_ALGS, "split_fraction": 1.0},
        {"feature_sets": FAST_SETS, "algorithms": FAST_ALGS, "split_fraction": 0.0},
        {"feature_sets": FAST_SETS, "algorithms": FAST_ALGS, "repetitions": 0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentSpec(**kwargs)


class TestSplits:
    def test_split_partitions_rows(self):
        train, test = _split_indices(10, 0.7, master=0, rep=0)
        assert len(train) == 7 and len(test) == 3
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(10))

    def test_split_reproducible_and_rep_varied(self):
        a = _split_indices(50, 0.7, master=3, rep=1)
        b = _split_indices(50, 0.7, master=3, rep=1)
        c = _split_indices(50, 0.7, master=3, rep=2)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert not np.array_equal(a[0], c[0])

    def test_extreme_fractions_keep_both_sides_nonempty(self):
        train, test = _split_indices(2, 0.99, master=0, rep=0)
        assert len(train) == 1 and len(test) == 1
        train, test = _split_indices(5, 0.01, master=0, rep=0)
        assert len(train) == 1 and len(test) == 4


class TestRunExperiment:
    def test_grid_shape_and_lookup(self, report):
        assert report.feature_sets == ("twitter", "position")
        assert report.algorithms == ("tree", "knn")
        assert len(report.cells) == 4
        cell = report.cell("twitter", "knn")
        assert cell.n_rows == cell.n_train + cell.n_test
        assert len(cell.accuracies) == 3
        assert cell.mean_accuracy == pytest.approx(np.mean(cell.accuracies))
        assert all(0.0 <= a <= 1.0 for a in cell.accuracies)
        with pytest.raises(KeyError):
            report.cell("twitter", "softmax")

    def test_top_mla_is_row_argmax(self, report):
        for fs_name, best in report.top_mla:
            row = [c for c in report.cells if c.feature_set == fs_name]
            assert report.cell(fs_name, best).mean_accuracy == max(
                c.mean_accuracy for c in row)

    def test_deterministic(self, mini_league, report):
        spec = ExperimentSpec(FAST_SETS, FAST_ALGS, repetitions=3, seed=5)
        again = run_experiment(spec, mini_league.store)
        assert again == report

    def test_parallel_matches_serial(self, mini_league, report):
        spec = ExperimentSpec(FAST_SETS, FAST_ALGS, repetitions=3, seed=5)
        assert run_experiment(spec, mini_league.store, jobs=2) == report

    def test_season_range_restricts_rows(self, mini_league, report):
        config = mini_league.store.config
        narrow = ExperimentSpec(FAST_SETS, FAST_ALGS, repetitions=3, seed=5,
                                season_range=(config.first_season,
                                              config.first_season + 1))
        result = run_experiment(narrow, mini_league.store)
        assert result.season_range == (config.first_season, config.first_season + 1)
        assert result.cell("twitter", "knn").n_rows < report.cell("twitter", "knn").n_rows

    def test_empty_range_raises(self, mini_league):
        last = mini_league.store.config.last_season
        spec = ExperimentSpec(FAST_SETS, FAST_ALGS, repetitions=2,
                              season_range=(last, last))
        # the final season has no next season, so nobody can switch in it
        with pytest.raises(EmptyDataset):
            run_experiment(spec, mini_league.store)


class TestReportSerialization:
    def test_jsonable_round_trip_is_exact(self, report):
        wire = json.loads(json.dumps(report.to_jsonable()))
        assert AccuracyReport.from_jsonable(wire) == report

    def test_emit_and_load(self, report, tmp_path):
        path = tmp_path / "report.json"
        emit_report(report, "json", path, meta={"seed": "5"})
        assert load_report(path) == report
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["format"] == "teamswitch-report/1"
        assert payload["meta"] == {"seed": "5"}

    def test_tsv_table_shape(self, report):
        text = render_report(report, "tsv", meta={"tool": "x", "seed": "5"})
        lines = text.splitlines()
        assert lines[0] == "# tool: x" and lines[1] == "# seed: 5"
        assert lines[2] == "features\ttree\tknn\ttop_mla"
        assert len(lines) == 2 + 1 + len(report.feature_sets) + 1
        first = lines[3].split("\t")
        assert first[0] == "twitter"
        assert first[1] == format_percent(report.cell("twitter", "tree").mean_accuracy)
        assert first[3] in report.algorithms
        assert lines[-1] == "baseline\t3.448\t3.448\t"

    def test_csv_delimiter(self, report):
        lines = render_report(report, "csv").splitlines()
        assert lines[0] == "features,tree,knn,top_mla"

    def test_percent_style(self):
        assert format_percent(0.19955) == "19.955"
        assert format_percent(0.0) == "0.000"
        assert format_percent(1.0) == "100.000"

    def test_bad_formats(self, report, tmp_path):
        with pytest.raises(ValueError):
            render_report(report, "xml")
        (tmp_path / "odd.json").write_text('{"format": "who-knows/3"}',
                                           encoding="utf-8")
        with pytest.raises(ValueError):
            load_report(tmp_path / "odd.json")
        with pytest.raises(IOFailure):
            load_report(tmp_path / "missing.json")
        with pytest.raises(IOFailure):
            emit_report(report, "json", tmp_path)  # directory, not a file


class TestTemporal:
    def test_feature_grid(self):
        rows = temporal_feature_rows()
        assert len(rows) == 10
        assert rows[0].active() == ("position", "career_length", "performance",
                                    "rank_value", "twitter")
        assert all(fs.twitter for fs in rows[:6])
        assert all(not fs.twitter for fs in rows[6:])
        singles = [fs.name for fs in rows[6:]]
        assert singles == ["performance", "career_length", "position", "rank_value"]

    def test_periods(self, temporal, mini_league):
        config = mini_league.store.config
        assert temporal.boundary == config.first_season + 1
        assert temporal.early.season_range == (config.first_season, temporal.boundary)
        assert temporal.late.season_range == (temporal.boundary + 1, config.last_season)
        assert temporal.full.season_range == (config.first_season, config.last_season)
        rows = temporal.full.cell("twitter", "knn").n_rows
        assert rows >= temporal.early.cell("twitter", "knn").n_rows
        assert rows >= temporal.late.cell("twitter", "knn").n_rows

    def test_json_round_trip(self, temporal, tmp_path):
        path = tmp_path / "temporal.json"
        emit_report(temporal, "json", path)
        loaded = load_report(path)
        assert isinstance(loaded, TemporalReport)
        assert loaded == temporal

    def test_table_lines(self, temporal):
        lines = render_report(temporal, "tsv").splitlines()
        assert lines[0] == "features\tearly\tlate\tfull\talgorithm"
        assert lines[1].split("\t")[0] == "twitter"
        assert lines[1].split("\t")[4] == "knn"

    def test_empty_periods_raise(self, mini_league):
        config = mini_league.store.config
        spec = ExperimentSpec((FeatureSet(twitter=True),),
                              (Algorithm.create("knn", k=3),), repetitions=2)
        with pytest.raises(EmptyPeriod):
            temporal_split_experiment(spec, config.first_season - 1,
                                      mini_league.store)
        with pytest.raises(EmptyPeriod):
            temporal_split_experiment(spec, config.last_season, mini_league.store)
        with pytest.raises(EmptyPeriod):
            # late period = the final season only, which has no switchers
            temporal_split_experiment(spec, config.last_season - 1,
                                      mini_league.store)
