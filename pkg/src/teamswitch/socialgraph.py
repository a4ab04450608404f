"""Directed follow-network representation, summary statistics, centralities.

The graph is simple and directed (no self-loops, no parallel edges), built
once and then immutable. Statistics follow the usual conventions for directed
networks: mean degree c = m/n, S = fraction of nodes in the largest strongly
connected component, mean distance over ordered reachable pairs, clustering
and degree assortativity on the undirected simple projection, reciprocity as
the fraction of edges whose reverse edge also exists.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateGraph, NoEdges


class FollowGraph:
    """Directed graph over string node ids with both adjacency directions."""

    def __init__(self, nodes: tuple[str, ...], out_adj: list[list[int]],
                 in_adj: list[list[int]]):
        self.nodes = nodes
        self.index = {node: i for i, node in enumerate(nodes)}
        self.out_adj = out_adj
        self.in_adj = in_adj
        self.m = sum(len(a) for a in out_adj)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def edges(self):
        for u, adj in enumerate(self.out_adj):
            for v in adj:
                yield u, v

    def out_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.out_adj], dtype=np.int64)

    def in_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.in_adj], dtype=np.int64)


def build_graph(
    edges, nodes=None
) -> FollowGraph:
    """Index an edge list of (follower, followee) id pairs. Self-loops and
    duplicates are dropped, keeping the graph simple. ``nodes`` may declare
    extra isolated nodes; by default nodes are the observed endpoints."""
    if nodes is None:
        seen: set[str] = set()
        for u, v in edges:
            seen.add(u)
            seen.add(v)
        node_tuple = tuple(sorted(seen))
    else:
        node_tuple = tuple(sorted(set(nodes)))
        declared = set(node_tuple)
        for u, v in edges:
            if u not in declared or v not in declared:
                raise ValueError(f"edge ({u}, {v}) touches an undeclared node")
    index = {node: i for i, node in enumerate(node_tuple)}
    pairs = {(index[u], index[v]) for u, v in edges if u != v}
    out_adj: list[list[int]] = [[] for _ in node_tuple]
    in_adj: list[list[int]] = [[] for _ in node_tuple]
    for u, v in sorted(pairs):
        out_adj[u].append(v)
        in_adj[v].append(u)
    return FollowGraph(node_tuple, out_adj, in_adj)


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    c: float
    S: float
    ell: float
    C: float
    r: float
    a: float

    def as_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "c": self.c, "S": self.S,
                "ell": self.ell, "C": self.C, "r": self.r, "a": self.a}


def strongly_connected_components(g: FollowGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep graphs don't hit the recursion
    limit. Returns components as lists of node indices."""
    n = g.n
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index_of[root] != -1:
            continue
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, iter(g.out_adj[root]))]
        while work:
            v, neighbors = work[-1]
            descended = False
            for w in neighbors:
                if index_of[w] == -1:
                    index_of[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(g.out_adj[w])))
                    descended = True
                    break
                if on_stack[w] and index_of[w] < low[v]:
                    low[v] = index_of[w]
            if descended:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index_of[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                components.append(component)
    return components


def single_source_distances(g: FollowGraph, source: int) -> np.ndarray:
    """BFS distances along out-edges; unreachable nodes get inf."""
    dist = np.full(g.n, np.inf)
    dist[source] = 0.0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        for w in g.out_adj[v]:
            if dist[w] == np.inf:
                dist[w] = dv + 1.0
                queue.append(w)
    return dist


def _undirected_projection(g: FollowGraph) -> list[set[int]]:
    neighbors: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges():
        neighbors[u].add(v)
        neighbors[v].add(u)
    return neighbors


def clustering_coefficient(g: FollowGraph) -> float:
    """3 x triangles / connected triples on the undirected simple projection."""
    neighbors = _undirected_projection(g)
    triples = sum(len(nb) * (len(nb) - 1) // 2 for nb in neighbors)
    if triples == 0:
        return 0.0
    closed = 0
    for u, nb in enumerate(neighbors):
        for v in nb:
            if v > u:
                closed += len(nb & neighbors[v])
    # each triangle is counted once per edge, i.e. three times
    return closed / triples


def reciprocity(g: FollowGraph) -> float:
    if g.m == 0:
        return 0.0
    edge_set = {(u, v) for u, v in g.edges()}
    reciprocated = sum(1 for u, v in edge_set if (v, u) in edge_set)
    return reciprocated / g.m


def degree_assortativity(g: FollowGraph) -> float:
    """Pearson correlation of total (in+out) degrees across the endpoints of
    the undirected projection's edges, both orientations; 0 when degenerate."""
    degree = g.in_degrees() + g.out_degrees()
    xs: list[int] = []
    ys: list[int] = []
    seen: set[tuple[int, int]] = set()
    for u, v in g.edges():
        pair = (u, v) if u < v else (v, u)
        if pair in seen:
            continue
        seen.add(pair)
        xs.extend((degree[pair[0]], degree[pair[1]]))
        ys.extend((degree[pair[1]], degree[pair[0]]))
    if not xs:
        return 0.0
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    x -= x.mean()
    y -= y.mean()
    denom = np.sqrt((x * x).sum() * (y * y).sum())
    if denom == 0.0:
        return 0.0
    return float((x * y).sum() / denom)


def mean_distance(g: FollowGraph) -> float:
    """Mean directed distance over ordered pairs (i, j), i != j, restricted to
    pairs with a finite distance; 0 when no pair is connected."""
    total = 0.0
    pairs = 0
    for source in range(g.n):
        dist = single_source_distances(g, source)
        finite = dist[np.isfinite(dist)]
        total += finite.sum()
        pairs += finite.size - 1  # drop the source itself
    return total / pairs if pairs else 0.0


def graph_stats(g: FollowGraph) -> GraphStats:
    if g.n == 0:
        raise DegenerateGraph("statistics need at least one node")
    largest = max((len(c) for c in strongly_connected_components(g)), default=0)
    return GraphStats(
        n=g.n,
        m=g.m,
        c=g.m / g.n,
        S=largest / g.n,
        ell=mean_distance(g),
        C=clustering_coefficient(g),
        r=reciprocity(g),
        a=degree_assortativity(g),
    )


class CentralityKind(str, Enum):
    DEGREE = "degree"
    IN_DEGREE = "in_degree"
    OUT_DEGREE = "out_degree"
    EIGENVECTOR = "eigenvector"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"

    @classmethod
    def parse(cls, raw: str) -> "CentralityKind":
        try:
            return cls(raw.strip().lower().replace("-", "_"))
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown centrality {raw!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class CentralityScores:
    kind: CentralityKind
    scores: dict[str, float]


def betweenness_scores(g: FollowGraph) -> np.ndarray:
    """Brandes accumulation over single-source shortest-path DAGs, directed
    and unnormalized."""
    bc = np.zeros(g.n)
    for s in range(g.n):
        order: list[int] = []
        preds: list[list[int]] = [[] for _ in range(g.n)]
        sigma = np.zeros(g.n)
        sigma[s] = 1.0
        dist = np.full(g.n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in g.out_adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(g.n)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    return bc


def closeness_scores(g: FollowGraph) -> np.ndarray:
    """Reachable-set normalized closeness: (number of nodes reachable from i)
    divided by the sum of their distances; 0 when nothing is reachable."""
    scores = np.zeros(g.n)
    for i in range(g.n):
        dist = single_source_distances(g, i)
        finite = dist[np.isfinite(dist)]
        reachable = finite.size - 1
        total = finite.sum()
        scores[i] = reachable / total if total > 0 else 0.0
    return scores


def eigenvector_scores(
    g: FollowGraph,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Damped power iteration on the follower-propagation map: a node scores
    high when the nodes following it score high. The uniform teleport mass
    keeps the iteration primitive on graphs that are not strongly connected.
    Scores are max-normalized."""
    if g.m == 0:
        raise NoEdges("eigenvector centrality needs at least one edge")
    n = g.n
    tails = np.fromiter((u for u, _ in g.edges()), dtype=np.int64, count=g.m)
    heads = np.fromiter((v for _, v in g.edges()), dtype=np.int64, count=g.m)
    if start is None:
        x = np.full(n, 1.0 / n)
    else:
        x = np.asarray(start, dtype=np.float64)
        if x.shape != (n,) or np.any(x <= 0):
            raise ValueError("start vector must be positive with one entry per node")
        x = x / x.sum()
    for _ in range(max_iter):
        nxt = np.full(n, (1.0 - damping) / n)
        np.add.at(nxt, heads, damping * x[tails])
        nxt /= nxt.sum()
        if np.abs(nxt - x).sum() < tol:
            x = nxt
            break
        x = nxt
    return x / x.max()


def centrality(g: FollowGraph, kind: CentralityKind, **params) -> CentralityScores:
    if g.n == 0:
        raise DegenerateGraph("centrality needs at least one node")
    kind = CentralityKind(kind)
    if kind is CentralityKind.DEGREE:
        values = (g.in_degrees() + g.out_degrees()).astype(np.float64)
    elif kind is CentralityKind.IN_DEGREE:
        values = g.in_degrees().astype(np.float64)
    elif kind is CentralityKind.OUT_DEGREE:
        values = g.out_degrees().astype(np.float64)
    elif kind is CentralityKind.EIGENVECTOR:
        values = eigenvector_scores(g, **params)
    elif kind is CentralityKind.CLOSENESS:
        values = closeness_scores(g)
    else:
        values = betweenness_scores(g)
    return CentralityScores(kind, {node: float(v) for node, v in zip(g.nodes, values)})


def top_k(scores: CentralityScores, k: int) -> list[tuple[str, float]]:
    """Top k by descending score, ties broken by ascending player id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(scores.scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def degree_histogram(g: FollowGraph, kind: CentralityKind) -> list[tuple[int, int]]:
    """Integer-binned counts over consecutive degrees from min to max
    observed; empty graph gives an empty histogram."""
    if kind is CentralityKind.DEGREE:
        degrees = g.in_degrees() + g.out_degrees()
    elif kind is CentralityKind.IN_DEGREE:
        degrees = g.in_degrees()
    elif kind is CentralityKind.OUT_DEGREE:
        degrees = g.out_degrees()
    else:
        raise ValueError(f"histogram requires a degree kind, got {kind.value}")
    if degrees.size == 0:
        return []
    lo, hi = int(degrees.min()), int(degrees.max())
    counts = np.bincount(degrees - lo, minlength=hi - lo + 1)
    return [(lo + offset, int(count)) for offset, count in enumerate(counts)]
