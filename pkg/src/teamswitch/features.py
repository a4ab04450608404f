"""Feature engineering: merged positions, career length, leave/target labels,
per-player team-affinity vectors, and assembly of the labeled training matrix.

The modeling unit is a transitioning player-season: a row exists for season s
of player p only when p left their team after s for another team in the data.
Labels live in the 30-team space with the current team excluded, so every row
has 29 admissible labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyDataset, OwnerNotTransitioning, UnknownPosition
from .league_data import LeagueStore, PlayerSeason
from .leagues import LeagueKind, MLB_POSITION_MERGE, NBA_POSITION_CLASSES
from .socialgraph import FollowGraph, build_graph

TARGET_RETIRED = "RETIRED"
TARGET_STAY = "N/A"

FLAG_ORDER = ("position", "team", "career_length", "performance",
              "rank_value", "twitter", "college")

COLLEGE_NONE = "N/A"
COLLEGE_OTHER = "OTHER"


@dataclass(frozen=True)
class FeatureSet:
    """Which feature blocks enter the matrix; at least one must be on."""

    position: bool = False
    team: bool = False
    career_length: bool = False
    performance: bool = False
    rank_value: bool = False
    twitter: bool = False
    college: bool = False

    def __post_init__(self):
        if not any(getattr(self, flag) for flag in FLAG_ORDER):
            raise ValueError("feature set needs at least one flag")

    @classmethod
    def from_string(cls, spec: str) -> "FeatureSet":
        """Parse a comma list like "twitter,team"; "all" turns on every flag."""
        tokens = [t.strip().lower() for t in spec.split(",") if t.strip()]
        if tokens == ["all"]:
            return cls(**{flag: True for flag in FLAG_ORDER})
        unknown = [t for t in tokens if t not in FLAG_ORDER]
        if unknown:
            raise ValueError(
                f"unknown feature flag(s) {unknown}; expected from {list(FLAG_ORDER)}")
        if not tokens:
            raise ValueError("feature set needs at least one flag")
        return cls(**{flag: flag in tokens for flag in FLAG_ORDER})

    @property
    def name(self) -> str:
        return "+".join(flag for flag in FLAG_ORDER if getattr(self, flag))

    def active(self) -> tuple[str, ...]:
        return tuple(flag for flag in FLAG_ORDER if getattr(self, flag))


@dataclass(frozen=True)
class EngineeredSeason:
    base: PlayerSeason
    merged_position: str
    career_length: int
    leave: bool
    target: str  # team code, TARGET_RETIRED, or TARGET_STAY

    @property
    def switched(self) -> bool:
        return self.leave and self.target not in (TARGET_RETIRED, TARGET_STAY)


@dataclass(frozen=True)
class AffinityVector:
    owner: tuple[str, int]
    weights: Mapping[str, int]


def merge_positions(raw: str, league: LeagueKind) -> str:
    label = raw.strip().upper()
    if league is LeagueKind.MLB:
        merged = MLB_POSITION_MERGE.get(label)
        if merged is None:
            raise UnknownPosition(f"unknown MLB position {raw!r}")
        return merged
    if label not in NBA_POSITION_CLASSES:
        raise UnknownPosition(f"unknown NBA position {raw!r}")
    return label


def compute_career_length(seasons: Sequence[PlayerSeason]) -> dict[int, int]:
    """Seasons must be one player's rows sorted by year. Career length counts
    prior seasons present in the data, so gap years do not count."""
    return {ps.season: i for i, ps in enumerate(seasons)}


def compute_leave_target(
    seasons: Sequence[PlayerSeason],
) -> dict[int, tuple[bool, str]]:
    """Per-season (leave, target) for one player's sorted rows.

    The player leaves after season s when the next calendar season is played
    on a different team or not played at all. Absence with a later return to a
    different team counts as a switch to that team; absence with a return to
    the same team, or no return, counts as a retirement at the gap.
    """
    out: dict[int, tuple[bool, str]] = {}
    for i, ps in enumerate(seasons):
        nxt = seasons[i + 1] if i + 1 < len(seasons) else None
        if nxt is None:
            out[ps.season] = (True, TARGET_RETIRED)
        elif nxt.team == ps.team and nxt.season == ps.season + 1:
            out[ps.season] = (False, TARGET_STAY)
        elif nxt.team != ps.team:
            out[ps.season] = (True, nxt.team)
        else:
            out[ps.season] = (True, TARGET_RETIRED)
    return out


def engineer_store(store: LeagueStore) -> list[EngineeredSeason]:
    """Run the per-player engineering pass over the whole store. Output is
    sorted by (season, player_id)."""
    kind = store.config.kind
    engineered: list[EngineeredSeason] = []
    for player_id in sorted(store.player_ids):
        seasons = store.seasons_of(player_id)
        lengths = compute_career_length(seasons)
        targets = compute_leave_target(seasons)
        for ps in seasons:
            leave, target = targets[ps.season]
            engineered.append(EngineeredSeason(
                base=ps,
                merged_position=merge_positions(ps.position, kind),
                career_length=lengths[ps.season],
                leave=leave,
                target=target,
            ))
    engineered.sort(key=lambda e: (e.base.season, e.base.player_id))
    return engineered


def count_team_follows(
    followed: Iterable[str],
    team_of: Mapping[str, str],
    teams: Sequence[str],
    own_team: str,
) -> dict[str, int]:
    """Shared affinity counting core: how many of the followed players sit on
    each team's roster this season, with the follower's own team zeroed."""
    weights = dict.fromkeys(teams, 0)
    for q in followed:
        team = team_of.get(q)
        if team is not None:
            weights[team] += 1
    weights[own_team] = 0
    return weights


def compute_affinity(
    owner: EngineeredSeason,
    follows: FollowGraph,
    rosters: Mapping[int, Mapping[str, frozenset[str]]],
    teams: Sequence[str],
    league: LeagueKind = LeagueKind.MLB,
) -> AffinityVector:
    """Affinity weights for one transitioning player-season: weights[T] is the
    number of season-T rosterees the owner follows, own team forced to zero.

    MLB mid-season movers are ineligible: their season row mixes two rosters.
    NBA rows snapshot the season-opening team, so the flag does not disqualify
    them there.
    """
    if not owner.switched:
        raise OwnerNotTransitioning(
            f"{owner.base.player_id}/{owner.base.season}: leave={owner.leave}, "
            f"target={owner.target}")
    if league is LeagueKind.MLB and owner.base.mid_season_move:
        raise OwnerNotTransitioning(
            f"{owner.base.player_id}/{owner.base.season}: mid-season mover")
    team_of: dict[str, str] = {}
    for team, members in rosters.get(owner.base.season, {}).items():
        for member in members:
            team_of[member] = team
    idx = follows.index.get(owner.base.player_id)
    followed = (follows.nodes[j] for j in follows.out_adj[idx]) if idx is not None else ()
    weights = count_team_follows(followed, team_of, teams, owner.base.team)
    return AffinityVector((owner.base.player_id, owner.base.season), weights)


@dataclass
class Workspace:
    """Engineered store plus the indexes dataset assembly needs repeatedly."""

    store: LeagueStore
    engineered: list[EngineeredSeason]
    graph: FollowGraph
    social_ids: frozenset[str]
    team_of: dict[int, dict[str, str]]  # season -> player -> team

    @property
    def teams(self) -> tuple[str, ...]:
        return self.store.config.teams


def build_workspace(store: LeagueStore) -> Workspace:
    engineered = engineer_store(store)
    graph = build_graph(store.edges)
    team_of: dict[int, dict[str, str]] = {}
    for season, rosters in store.rosters().items():
        lookup: dict[str, str] = {}
        for team, members in rosters.items():
            for member in members:
                lookup[member] = team
        team_of[season] = lookup
    return Workspace(store, engineered, graph, frozenset(graph.nodes), team_of)


@dataclass(frozen=True)
class RowMeta:
    player_id: str
    season: int
    current_team: str


@dataclass
class LabeledDataset:
    """Assembled feature matrix. Labels are indices into ``teams``; every
    row's label differs from its current team."""

    X: np.ndarray
    y: np.ndarray
    meta: list[RowMeta]
    manifest: tuple[str, ...]
    provenance: dict[str, tuple[int, ...]]
    teams: tuple[str, ...]
    feature_set: FeatureSet

    def __len__(self) -> int:
        return len(self.meta)

    def current_team_indices(self) -> np.ndarray:
        index = {team: i for i, team in enumerate(self.teams)}
        return np.array([index[m.current_team] for m in self.meta], dtype=np.int64)

    def rows_per_season(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for m in self.meta:
            counts[m.season] = counts.get(m.season, 0) + 1
        return dict(sorted(counts.items()))

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows)
        return LabeledDataset(
            X=self.X[rows],
            y=self.y[rows],
            meta=[self.meta[int(i)] for i in rows],
            manifest=self.manifest,
            provenance=self.provenance,
            teams=self.teams,
            feature_set=self.feature_set,
        )


def _season_medians(store: LeagueStore) -> dict[str, dict[int | None, float]]:
    """Per-metric imputation table: season -> median of observed values, with
    the global median under key None; metrics never observed fall back to 0."""
    by_metric: dict[str, dict[int, list[float]]] = {
        m.name: {} for m in store.config.metrics}
    for ps in store.players:
        for name, value in ps.metrics.items():
            if value is not None:
                by_metric[name].setdefault(ps.season, []).append(value)
    table: dict[str, dict[int | None, float]] = {}
    for name, per_season in by_metric.items():
        entry: dict[int | None, float] = {
            season: float(np.median(values)) for season, values in per_season.items()}
        pooled = [v for values in per_season.values() for v in values]
        entry[None] = float(np.median(pooled)) if pooled else 0.0
        table[name] = entry
    return table


def assemble_dataset(
    source: LeagueStore | Workspace,
    feature_set: FeatureSet,
    season_range: tuple[int, int] | None = None,
) -> LabeledDataset:
    """One row per transitioning player-season in range that satisfies the
    feature set's availability filters: the twitter block needs the player in
    the follow file (and, for MLB, no mid-season move); the rank_value block
    needs a fitness row for (season, current team)."""
    ws = source if isinstance(source, Workspace) else build_workspace(source)
    store = ws.store
    config = store.config
    kind = config.kind
    teams = config.teams
    y0, y1 = season_range if season_range is not None else (
        config.first_season, config.last_season)

    rows: list[EngineeredSeason] = []
    for e in ws.engineered:
        if not e.switched or not (y0 <= e.base.season <= y1):
            continue
        if feature_set.twitter:
            if e.base.player_id not in ws.social_ids:
                continue
            if kind is LeagueKind.MLB and e.base.mid_season_move:
                continue
        if feature_set.rank_value and (e.base.season, e.base.team) not in store.fitness:
            continue
        rows.append(e)
    if not rows:
        raise EmptyDataset(
            f"no transitioning rows for features={feature_set.name} in {y0}-{y1}")

    from .leagues import position_classes

    manifest: list[str] = []
    provenance: dict[str, tuple[int, ...]] = {}
    blocks: list[np.ndarray] = []

    def add_block(flag: str, names: list[str], block: np.ndarray) -> None:
        start = len(manifest)
        manifest.extend(names)
        provenance[flag] = tuple(range(start, start + len(names)))
        blocks.append(block)

    n = len(rows)
    if feature_set.position:
        classes = position_classes(kind)
        block = np.zeros((n, len(classes)))
        lookup = {cls: j for j, cls in enumerate(classes)}
        for i, e in enumerate(rows):
            block[i, lookup[e.merged_position]] = 1.0
        add_block("position", [f"pos={cls}" for cls in classes], block)

    team_index = {team: j for j, team in enumerate(teams)}
    if feature_set.team:
        block = np.zeros((n, len(teams)))
        for i, e in enumerate(rows):
            block[i, team_index[e.base.team]] = 1.0
        add_block("team", [f"team={t}" for t in teams], block)

    if feature_set.career_length:
        block = np.array([[float(e.career_length)] for e in rows])
        add_block("career_length", ["career_length"], block)

    if feature_set.performance:
        medians = _season_medians(store)
        names: list[str] = []
        cols: list[np.ndarray] = []
        for metric in config.metrics:
            values = np.empty(n)
            missing = np.zeros(n)
            table = medians[metric.name]
            for i, e in enumerate(rows):
                value = e.base.metrics.get(metric.name)
                if value is None:
                    season_median = table.get(e.base.season, table[None])
                    values[i] = season_median
                    missing[i] = 1.0
                else:
                    values[i] = value
            names.extend([metric.name, f"{metric.name}_missing"])
            cols.extend([values, missing])
        add_block("performance", names, np.column_stack(cols))

    if feature_set.rank_value:
        block = np.empty((n, 2))
        for i, e in enumerate(rows):
            fit = store.fitness[(e.base.season, e.base.team)]
            block[i, 0] = float(fit.rank)
            block[i, 1] = fit.valuation
        add_block("rank_value", ["team_rank", "team_valuation"], block)

    if feature_set.twitter:
        block = np.zeros((n, len(teams)))
        for i, e in enumerate(rows):
            idx = ws.graph.index.get(e.base.player_id)
            followed = (
                (ws.graph.nodes[j] for j in ws.graph.out_adj[idx])
                if idx is not None else ())
            weights = count_team_follows(
                followed, ws.team_of.get(e.base.season, {}), teams, e.base.team)
            for team, w in weights.items():
                block[i, team_index[team]] = float(w)
        add_block("twitter", [f"aff={t}" for t in teams], block)

    if feature_set.college:
        observed = sorted({
            store.colleges.get(e.base.player_id, COLLEGE_NONE) for e in rows
        } - {COLLEGE_NONE})
        vocab = [COLLEGE_NONE] + observed + [COLLEGE_OTHER]
        lookup = {c: j for j, c in enumerate(vocab)}
        block = np.zeros((n, len(vocab)))
        for i, e in enumerate(rows):
            college = store.colleges.get(e.base.player_id, COLLEGE_NONE)
            block[i, lookup.get(college, lookup[COLLEGE_OTHER])] = 1.0
        add_block("college", [f"college={c}" for c in vocab], block)

    X = np.column_stack(blocks) if blocks else np.empty((n, 0))
    y = np.array([team_index[e.target] for e in rows], dtype=np.int64)
    meta = [RowMeta(e.base.player_id, e.base.season, e.base.team) for e in rows]
    return LabeledDataset(X, y, meta, tuple(manifest), provenance, teams, feature_set)


def write_dataset(dataset: LabeledDataset, csv_path, sidecar_path=None,
                  meta_lines: Mapping[str, str] | None = None) -> None:
    """Emit the matrix as CSV (manifest header + label and owner columns) with
    a JSON sidecar mapping each feature flag to its column indices. Optional
    ``meta_lines`` become leading ``# key: value`` comment lines."""
    import csv as _csv
    import json
    from pathlib import Path

    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        for key, value in (meta_lines or {}).items():
            fh.write(f"# {key}: {value}\r\n")
        writer = _csv.writer(fh)
        writer.writerow(list(dataset.manifest) + ["label", "player_id", "season",
                                                  "current_team"])
        for i, meta in enumerate(dataset.meta):
            values = [f"{v:.10g}" for v in dataset.X[i]]
            writer.writerow(values + [dataset.teams[dataset.y[i]], meta.player_id,
                                      meta.season, meta.current_team])
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    payload = {
        "feature_set": dataset.feature_set.name,
        "columns": list(dataset.manifest),
        "provenance": {flag: list(idx) for flag, idx in dataset.provenance.items()},
        "label_space": list(dataset.teams),
        "rows": len(dataset),
    }
    if meta_lines:
        payload["_meta"] = dict(meta_lines)
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
