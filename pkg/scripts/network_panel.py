"""Print the follow-graph statistics panel and centrality leaderboards.

Reports n, m, mean degree, largest-SCC share, mean finite distance,
clustering, reciprocity, and assortativity, then the top players under each
centrality measure.

Usage:
  python scripts/network_panel.py --input data/mlb [--top 10]
  python scripts/network_panel.py --edges follows.csv [--top 10]
"""

import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from teamswitch.league_data import load_store, parse_follow_edges
from teamswitch.socialgraph import (
    CentralityKind,
    build_graph,
    centrality,
    graph_stats,
    top_k,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", help="league directory")
    ap.add_argument("--edges", help="standalone follower,followee CSV")
    ap.add_argument("--top", type=int, default=10)
    args = ap.parse_args()

    if bool(args.input) == bool(args.edges):
        ap.error("pass exactly one of --input or --edges")
    if args.input:
        store, _ = load_store(args.input)
        graph = build_graph(store.edges)
    else:
        with open(args.edges, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        endpoints = {c.strip() for row in rows[1:] for c in row[:2] if c.strip()}
        edges, _ = parse_follow_edges(args.edges, endpoints)
        graph = build_graph(edges)

    stats = graph_stats(graph)
    print("graph statistics")
    for key, value in stats.as_dict().items():
        if isinstance(value, float):
            print(f"  {key:>3} = {value:.4f}")
        else:
            print(f"  {key:>3} = {value}")

    for kind in CentralityKind:
        scores = centrality(graph, kind)
        print(f"\ntop {args.top} by {kind.value}")
        for node, score in top_k(scores, args.top):
            print(f"  {node:<24} {score:.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
