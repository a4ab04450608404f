"""Parse, validate, and index the four flat-file inputs into a league store.

Input files are UTF-8 CSV with a header row:

  players.csv   player_id, season, position, team, mid_season_move, age, <metrics>
  follows.csv   follower, followee
  fitness.csv   season, team, rank, valuation_musd
  colleges.csv  player_id, college

A league.toml config declares the league kind, season window, and metric
column schema (see leagues.load_league_config). Rows that fail a required
field are rejected and reported with their row number; structural corruption
(duplicates, bad headers, impossible fitness values) raises.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    DuplicateFitnessRow,
    DuplicatePlayerSeason,
    MalformedHeader,
    MalformedRow,
    NonPositiveRank,
    NonPositiveValuation,
    TeamCountMismatch,
    UnknownTeamCode,
)
from .leagues import LeagueConfig, LeagueKind, load_league_config, write_league_config

PLAYER_BASE_COLUMNS = ("player_id", "season", "position", "team", "mid_season_move", "age")
FOLLOW_COLUMNS = ("follower", "followee")
FITNESS_COLUMNS = ("season", "team", "rank", "valuation_musd")
COLLEGE_COLUMNS = ("player_id", "college")

NO_COLLEGE = "N/A"

_TRUE = {"1", "true", "yes", "y"}
_FALSE = {"0", "false", "no", "n", ""}


@dataclass(frozen=True)
class ParseIssue:
    """A rejected or suspicious input row; ``row`` is 1-based, header = 1."""

    row: int | None
    code: str
    message: str


@dataclass(frozen=True)
class PlayerSeason:
    player_id: str
    season: int
    team: str
    position: str
    mid_season_move: bool
    age: int | None
    metrics: Mapping[str, float | None]


@dataclass(frozen=True)
class TeamFitness:
    season: int
    team: str
    rank: int
    valuation: float


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh)]


def _check_header(actual: list[str], expected: Iterable[str], path) -> None:
    got = [c.strip().lower() for c in actual]
    want = [c.lower() for c in expected]
    if got != want:
        raise MalformedHeader(f"{path}: expected header {want}, got {got}")


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_player_seasons(
    path, config: LeagueConfig
) -> tuple[list[PlayerSeason], list[ParseIssue]]:
    """Parse players.csv. Bad required fields reject the row with an issue;
    bad or out-of-bounds metric values degrade to missing with an issue."""
    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, header required")
    expected = PLAYER_BASE_COLUMNS + tuple(m.column for m in config.metrics)
    _check_header(rows[0], expected, path)

    players: list[PlayerSeason] = []
    issues: list[ParseIssue] = []
    seen: set[tuple[str, int]] = set()
    n_base = len(PLAYER_BASE_COLUMNS)

    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(expected):
            issues.append(ParseIssue(lineno, "bad_field_count",
                                     f"expected {len(expected)} fields, got {len(row)}"))
            continue
        player_id = row[0].strip()
        if not player_id:
            issues.append(ParseIssue(lineno, "bad_required_field", "empty player_id"))
            continue
        try:
            season = int(row[1])
        except ValueError:
            issues.append(ParseIssue(lineno, "bad_required_field", f"bad season {row[1]!r}"))
            continue
        if season not in config.seasons:
            issues.append(ParseIssue(lineno, "season_out_of_range",
                                     f"season {season} outside {config.first_season}-{config.last_season}"))
            continue
        try:
            team = _resolve(row[3], season, config.kind)
        except UnknownTeamCode as exc:
            issues.append(ParseIssue(lineno, "unknown_team_code", str(exc)))
            continue
        key = (player_id, season)
        if key in seen:
            raise DuplicatePlayerSeason(lineno, player_id, season)
        seen.add(key)

        try:
            mid_season = _parse_bool(row[4])
        except ValueError:
            issues.append(ParseIssue(lineno, "bad_required_field",
                                     f"bad mid_season_move {row[4]!r}"))
            continue
        age: int | None = None
        if row[5].strip():
            try:
                age = int(row[5])
            except ValueError:
                issues.append(ParseIssue(lineno, "bad_age",
                                         f"unparseable age {row[5]!r}, treated as missing"))

        metrics: dict[str, float | None] = {}
        for spec, raw in zip(config.metrics, row[n_base:]):
            value: float | None = None
            text = raw.strip()
            if text:
                try:
                    value = float(text) / spec.scale
                except ValueError:
                    issues.append(ParseIssue(lineno, "bad_metric",
                                             f"{spec.name}: unparseable {raw!r}, treated as missing"))
                    value = None
                else:
                    if spec.bounded and not (0.0 <= value <= 1.0):
                        issues.append(ParseIssue(
                            lineno, "metric_out_of_bounds",
                            f"{spec.name}: {value} outside [0, 1], treated as missing"))
                        value = None
            metrics[spec.name] = value
        players.append(PlayerSeason(player_id, season, team, row[2].strip(),
                                    mid_season, age, metrics))
    return players, issues


def _resolve(raw: str, season: int, kind: LeagueKind) -> str:
    from .leagues import resolve_team

    return resolve_team(raw, season, kind)


def parse_follow_edges(
    path, roster: set[str] | frozenset[str]
) -> tuple[list[tuple[str, str]], list[ParseIssue]]:
    """Parse follows.csv. Self-loops, duplicates, and edges touching unknown
    players are excluded and counted; malformed rows raise."""
    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, header required")
    _check_header(rows[0], FOLLOW_COLUMNS, path)

    edges: list[tuple[str, str]] = []
    issues: list[ParseIssue] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise MalformedRow(lineno, f"expected 'follower,followee', got {row!r}")
        edge = (row[0].strip(), row[1].strip())
        if edge[0] == edge[1]:
            issues.append(ParseIssue(lineno, "self_loop", f"{edge[0]} follows itself"))
            continue
        if edge[0] not in roster or edge[1] not in roster:
            unknown = edge[0] if edge[0] not in roster else edge[1]
            issues.append(ParseIssue(lineno, "unresolved_endpoint",
                                     f"unknown player {unknown!r}"))
            continue
        if edge in seen:
            issues.append(ParseIssue(lineno, "duplicate_edge", f"{edge[0]} -> {edge[1]}"))
            continue
        seen.add(edge)
        edges.append(edge)
    return edges, issues


def parse_team_fitness(path, config: LeagueConfig) -> list[TeamFitness]:
    """Parse fitness.csv; one validated row per (season, team)."""
    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, header required")
    _check_header(rows[0], FITNESS_COLUMNS, path)

    out: list[TeamFitness] = []
    seen: set[tuple[int, str]] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 4:
            raise MalformedRow(lineno, f"expected 4 fields, got {len(row)}")
        try:
            season = int(row[0])
            rank = int(row[2])
            valuation = float(row[3])
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        team = _resolve(row[1], season, config.kind)
        if rank < 1:
            raise NonPositiveRank(f"row {lineno}: rank must be >= 1, got {rank}")
        if valuation <= 0:
            raise NonPositiveValuation(f"row {lineno}: valuation must be > 0, got {valuation}")
        key = (season, team)
        if key in seen:
            raise DuplicateFitnessRow(lineno, season, team)
        seen.add(key)
        out.append(TeamFitness(season, team, rank, valuation))
    return out


def parse_colleges(path) -> tuple[dict[str, str], list[ParseIssue]]:
    """Parse colleges.csv into player_id -> college, with N/A as a real
    category. A repeated player keeps its first record."""
    rows = _read_rows(path)
    if not rows:
        raise MalformedHeader(f"{path}: empty file, header required")
    _check_header(rows[0], COLLEGE_COLUMNS, path)

    colleges: dict[str, str] = {}
    issues: list[ParseIssue] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2 or not row[0].strip():
            raise MalformedRow(lineno, f"expected 'player_id,college', got {row!r}")
        player_id = row[0].strip()
        college = row[1].strip() or NO_COLLEGE
        if player_id in colleges:
            issues.append(ParseIssue(lineno, "duplicate_college_record",
                                     f"{player_id} already has a college"))
            continue
        colleges[player_id] = college
    return colleges, issues


@dataclass
class LeagueStore:
    """Immutable-after-load bundle of all parsed inputs."""

    config: LeagueConfig
    players: tuple[PlayerSeason, ...]
    edges: tuple[tuple[str, str], ...]
    fitness: dict[tuple[int, str], TeamFitness]
    colleges: dict[str, str]

    def __post_init__(self):
        by_player: dict[str, list[PlayerSeason]] = {}
        for ps in self.players:
            by_player.setdefault(ps.player_id, []).append(ps)
        for seasons in by_player.values():
            seasons.sort(key=lambda ps: ps.season)
        self._by_player = by_player
        rosters: dict[int, dict[str, set[str]]] = {}
        for ps in self.players:
            rosters.setdefault(ps.season, {}).setdefault(ps.team, set()).add(ps.player_id)
        self._rosters = {
            season: {team: frozenset(ids) for team, ids in teams.items()}
            for season, teams in rosters.items()
        }

    def __eq__(self, other):
        if not isinstance(other, LeagueStore):
            return NotImplemented
        return (self.config, self.players, self.edges, self.fitness, self.colleges) == (
            other.config, other.players, other.edges, other.fitness, other.colleges)

    @property
    def player_ids(self) -> frozenset[str]:
        return frozenset(self._by_player)

    def seasons_of(self, player_id: str) -> list[PlayerSeason]:
        return self._by_player.get(player_id, [])

    def rosters(self) -> dict[int, dict[str, frozenset[str]]]:
        return self._rosters

    def seasons_present(self) -> list[int]:
        return sorted(self._rosters)


def build_store(
    config: LeagueConfig,
    players: list[PlayerSeason],
    edges: list[tuple[str, str]],
    fitness: list[TeamFitness],
    colleges: dict[str, str],
) -> LeagueStore:
    players = sorted(players, key=lambda ps: (ps.player_id, ps.season))
    return LeagueStore(
        config=config,
        players=tuple(players),
        edges=tuple(edges),
        fitness={(f.season, f.team): f for f in fitness},
        colleges=dict(sorted(colleges.items())),
    )


def load_store(input_dir) -> tuple[LeagueStore, list[ParseIssue]]:
    """Load league.toml plus the four CSVs from one directory."""
    root = Path(input_dir)
    config = load_league_config(root / "league.toml")
    players, issues = parse_player_seasons(root / "players.csv", config)
    roster = {ps.player_id for ps in players}
    edges, edge_issues = parse_follow_edges(root / "follows.csv", roster)
    fitness = parse_team_fitness(root / "fitness.csv", config)
    colleges_path = root / "colleges.csv"
    if colleges_path.exists():
        colleges, college_issues = parse_colleges(colleges_path)
    else:
        colleges, college_issues = {}, []
    store = build_store(config, players, edges, fitness, colleges)
    return store, issues + edge_issues + college_issues


def write_store(store: LeagueStore, out_dir) -> None:
    """Serialize the store back to the four CSVs plus league.toml.
    load_store(write_store(s)) reproduces an equal store."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    write_league_config(store.config, root / "league.toml")

    header = list(PLAYER_BASE_COLUMNS) + [m.column for m in store.config.metrics]
    with open(root / "players.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ps in store.players:
            row = [
                ps.player_id, ps.season, ps.position, ps.team,
                "true" if ps.mid_season_move else "false",
                "" if ps.age is None else ps.age,
            ]
            for spec in store.config.metrics:
                value = ps.metrics.get(spec.name)
                row.append("" if value is None else repr(value * spec.scale))
            writer.writerow(row)

    with open(root / "follows.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FOLLOW_COLUMNS)
        writer.writerows(store.edges)

    with open(root / "fitness.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FITNESS_COLUMNS)
        for key in sorted(store.fitness):
            f = store.fitness[key]
            writer.writerow([f.season, f.team, f.rank, repr(f.valuation)])

    with open(root / "colleges.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLLEGE_COLUMNS)
        for player_id in sorted(store.colleges):
            writer.writerow([player_id, store.colleges[player_id]])


@dataclass(frozen=True)
class SeasonValidation:
    players: int
    teams: int


@dataclass(frozen=True)
class ValidationReport:
    per_season: dict[int, SeasonValidation]
    follow_covered: int
    total_players: int
    fitness_covered: int
    fitness_expected: int
    college_covered: int

    @property
    def follow_coverage(self) -> float:
        return self.follow_covered / self.total_players if self.total_players else 0.0

    @property
    def fitness_coverage(self) -> float:
        return self.fitness_covered / self.fitness_expected if self.fitness_expected else 0.0

    @property
    def college_coverage(self) -> float:
        return self.college_covered / self.total_players if self.total_players else 0.0

    def as_dict(self) -> dict:
        return {
            "per_season": {
                str(season): {"players": v.players, "teams": v.teams}
                for season, v in sorted(self.per_season.items())
            },
            "follow_coverage": {
                "players_with_edges": self.follow_covered,
                "total_players": self.total_players,
                "fraction": self.follow_coverage,
            },
            "fitness_coverage": {
                "rows_present": self.fitness_covered,
                "rows_expected": self.fitness_expected,
                "fraction": self.fitness_coverage,
            },
            "college_coverage": {
                "players_with_record": self.college_covered,
                "total_players": self.total_players,
                "fraction": self.college_coverage,
            },
        }


def validate_league(store: LeagueStore) -> ValidationReport:
    """Cross-check the parsed inputs. The only hard failure is a season inside
    the configured window that does not field exactly 30 teams."""
    expected_teams = len(store.config.teams)
    per_season: dict[int, SeasonValidation] = {}
    counts: dict[int, int] = {}
    for ps in store.players:
        counts[ps.season] = counts.get(ps.season, 0) + 1
    for season in store.config.seasons:
        teams = len(store.rosters().get(season, {}))
        per_season[season] = SeasonValidation(counts.get(season, 0), teams)
        if teams != expected_teams:
            raise TeamCountMismatch(season, teams, expected_teams)

    players = store.player_ids
    social = set()
    for follower, followee in store.edges:
        social.add(follower)
        social.add(followee)
    fitness_expected = len(list(store.config.seasons)) * expected_teams
    fitness_covered = sum(
        1 for (season, _team) in store.fitness if season in store.config.seasons
    )
    return ValidationReport(
        per_season=per_season,
        follow_covered=len(social & players),
        total_players=len(players),
        fitness_covered=fitness_covered,
        fitness_expected=fitness_expected,
        college_covered=len(set(store.colleges) & players),
    )


@dataclass(frozen=True)
class TransitionSummary:
    players: int
    leaving: int
    retiring: int
    switched: int


def summarize_transitions(engineered) -> dict[int, TransitionSummary]:
    """Per-season counts of players, leavers, retirees, and team switchers.
    Expects seasons already run through the feature-engineering pass, so each
    item carries .base, .leave, and .target."""
    from .features import TARGET_RETIRED, TARGET_STAY

    rows: dict[int, dict[str, int]] = {}
    for e in engineered:
        acc = rows.setdefault(e.base.season, {"players": 0, "leaving": 0,
                                              "retiring": 0, "switched": 0})
        acc["players"] += 1
        if e.leave:
            acc["leaving"] += 1
            if e.target == TARGET_RETIRED:
                acc["retiring"] += 1
            elif e.target != TARGET_STAY:
                acc["switched"] += 1
    return {
        season: TransitionSummary(**acc) for season, acc in sorted(rows.items())
    }
