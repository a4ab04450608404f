"""Early/late/full-period accuracy comparison on a league directory.

Uses the ten-row comparison grid (the five social+x pairings, social alone,
and each non-social block alone) with a single algorithm, splitting the
season window at --boundary.

Usage:
  python scripts/run_temporal.py --input data/mlb --boundary 2009 \
      --out out/temporal.tsv [--algo extra] [--reps 10] [--seed 7]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from teamswitch.classifiers import parse_algorithms
from teamswitch.experiments import (
    ExperimentSpec,
    emit_report,
    temporal_feature_rows,
    temporal_split_experiment,
)
from teamswitch.league_data import load_store


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", required=True, help="league directory")
    ap.add_argument("--boundary", type=int, required=True,
                    help="last season of the early period")
    ap.add_argument("--out", required=True, help="TSV output path")
    ap.add_argument("--algo", default="extra")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--split", type=float, default=0.7)
    ap.add_argument("--trees", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    overrides = {"n_trees": args.trees} if args.trees is not None else {}
    store, issues = load_store(args.input)
    if issues:
        print(f"note: {len(issues)} parse issues in {args.input}", file=sys.stderr)
    spec = ExperimentSpec(
        feature_sets=temporal_feature_rows(),
        algorithms=parse_algorithms(args.algo, **overrides),
        split_fraction=args.split,
        repetitions=args.reps,
        seed=args.seed,
    )
    report = temporal_split_experiment(spec, args.boundary, store, jobs=args.jobs)

    meta = {"tool": "run_temporal", "input": args.input,
            "boundary": str(args.boundary), "seed": str(args.seed)}
    out = Path(args.out)
    emit_report(report, "tsv", out, meta)
    emit_report(report, "json", out.with_suffix(".json"), meta)
    print(f"wrote {out} and {out.with_suffix('.json')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
