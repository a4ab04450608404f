"""Run the full feature-ablation accuracy matrix on a league directory.

Rows are the ablation grid (each non-social block with and without the
twitter vector, social-only, everything); columns are the six classifier
families plus the per-row best. Emits the TSV table and a JSON archive.

Usage:
  python scripts/run_matrix.py --input data/mlb --out out/matrix.tsv \
      [--reps 10] [--seed 7] [--trees 500] [--jobs 4]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from teamswitch.classifiers import parse_algorithms
from teamswitch.experiments import ExperimentSpec, emit_report, run_experiment
from teamswitch.features import FeatureSet
from teamswitch.league_data import load_store

ABLATION_ROWS = (
    "position", "position,twitter",
    "team", "team,twitter",
    "career_length", "career_length,twitter",
    "performance", "performance,twitter",
    "rank_value", "rank_value,twitter",
    "college", "college,twitter",
    "twitter",
    "all",
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", required=True, help="league directory")
    ap.add_argument("--out", required=True, help="TSV output path")
    ap.add_argument("--algos", default="tree,forest,extra,ada,xgb-like,softmax,knn")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--split", type=float, default=0.7)
    ap.add_argument("--trees", type=int, default=None)
    ap.add_argument("--rounds", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    overrides = {}
    if args.trees is not None:
        overrides["n_trees"] = args.trees
    if args.rounds is not None:
        overrides["n_rounds"] = args.rounds

    store, issues = load_store(args.input)
    if issues:
        print(f"note: {len(issues)} parse issues in {args.input}", file=sys.stderr)
    spec = ExperimentSpec(
        feature_sets=tuple(FeatureSet.from_string(row) for row in ABLATION_ROWS),
        algorithms=parse_algorithms(args.algos, **overrides),
        split_fraction=args.split,
        repetitions=args.reps,
        seed=args.seed,
    )
    report = run_experiment(spec, store, jobs=args.jobs)

    meta = {"tool": "run_matrix", "input": args.input, "seed": str(args.seed)}
    out = Path(args.out)
    emit_report(report, "tsv", out, meta)
    emit_report(report, "json", out.with_suffix(".json"), meta)
    print(f"wrote {out} and {out.with_suffix('.json')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
