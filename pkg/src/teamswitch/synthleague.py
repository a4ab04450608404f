"""Synthetic league generator with a known social-transition link.

The generator simulates a 30-team league whose switchers pick their next team
from softmax(beta * affinity + fitness_coupling * team-fitness z-score), where
affinity is counted from a generated follow graph by the exact rule the
feature pipeline uses. Because the generative probabilities are recorded per
switcher, the output doubles as an end-to-end oracle: a sound pipeline must
recover social signal when beta > 0 and must not beat the Bayes ceiling.

Everything is drawn from one seeded stream, so equal configs produce
byte-identical output directories.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import EmptyDataset, InfeasibleConfig, IOFailure
from .features import count_team_follows
from .league_data import LeagueStore, PlayerSeason, TeamFitness, build_store, write_store
from .leagues import LeagueConfig, LeagueKind, canonical_teams

GROUNDTRUTH_FORMAT = "teamswitch-groundtruth/1"

# Calibration defaults observed in the real leagues: roster sizes, the share
# of players leaving their team each season, and the share of leavers who
# retire rather than switch.
_LEAGUE_DEFAULTS = {
    LeagueKind.MLB: {"roster_size": 40, "leave_rate": 0.487, "retire_share": 0.497},
    LeagueKind.NBA: {"roster_size": 17, "leave_rate": 0.60, "retire_share": 0.33},
}

_MLB_RAW_POSITIONS = ("SP", "RP", "C", "1B", "2B", "3B", "SS", "LF", "CF", "RF")
_NBA_RAW_POSITIONS = ("PG", "SG", "SF", "PF", "C")


@dataclass(frozen=True)
class SynthConfig:
    league: LeagueKind = LeagueKind.MLB
    n_seasons: int = 10
    start_season: int = 2002
    roster_size: int | None = None      # league default when None
    leave_rate: float | None = None     # league default when None
    retire_share: float | None = None   # league default when None
    mean_follows: float = 15.0          # mean out-degree before sociability
    sociability_sigma: float = 0.8      # lognormal spread of out-degree
    attractiveness_sigma: float = 1.0   # lognormal spread of in-degree pull
    same_team_boost: float = 4.0        # extra pull toward same-affiliation targets
    beta: float = 1.0                   # social coupling in the destination softmax
    beta_ramp: tuple[float, float] | None = None  # linear per-season override of beta
    fitness_coupling: float = 0.0       # team-fitness bias in the destination softmax
    performance_persistence: float = 0.8
    performance_noise: float = 0.6
    metric_missing_rate: float = 0.05
    college_rate: float = 0.6
    n_colleges: int = 40
    reserve_factor: float = 1.8         # sizing slack for the debutant pool
    seed: int = 0

    def __post_init__(self):
        defaults = _LEAGUE_DEFAULTS[self.league]
        for name in ("roster_size", "leave_rate", "retire_share"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, defaults[name])
        if self.beta_ramp is not None:
            object.__setattr__(self, "beta_ramp", tuple(float(b) for b in self.beta_ramp))

        if self.n_seasons < 2:
            raise InfeasibleConfig("n_seasons must be >= 2 to observe transitions")
        if self.roster_size < 2:
            raise InfeasibleConfig("roster_size must be >= 2")
        for name in ("leave_rate", "retire_share", "metric_missing_rate", "college_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InfeasibleConfig(f"{name} must be in [0, 1], got {value}")
        betas = self.beta_ramp if self.beta_ramp is not None else (self.beta,)
        if len(betas) != 1 and len(betas) != 2:
            raise InfeasibleConfig("beta_ramp must hold exactly (start, end)")
        for b in betas:
            if b < 0 or not math.isfinite(b):
                raise InfeasibleConfig(f"social coupling must be finite and >= 0, got {b}")
        if self.mean_follows < 0:
            raise InfeasibleConfig("mean_follows must be >= 0")
        if self.reserve_factor < 0:
            raise InfeasibleConfig("reserve_factor must be >= 0")
        if self.n_colleges < 1:
            raise InfeasibleConfig("n_colleges must be >= 1")

    @property
    def last_season(self) -> int:
        return self.start_season + self.n_seasons - 1

    def beta_for(self, season: int) -> float:
        """Social coupling used for transitions out of ``season``."""
        if self.beta_ramp is None:
            return self.beta
        start, end = self.beta_ramp
        span = self.n_seasons - 2  # transitions happen out of all but the last season
        if span <= 0:
            return start
        t = (season - self.start_season) / span
        return start + (end - start) * t

    def league_config(self) -> LeagueConfig:
        return LeagueConfig(self.league, self.start_season, self.last_season)


def load_synth_config(path) -> SynthConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    table = data.get("synth", {})
    kwargs = dict(table)
    if "league" in kwargs:
        kwargs["league"] = LeagueKind.parse(kwargs["league"])
    if "beta_ramp" in kwargs:
        kwargs["beta_ramp"] = tuple(kwargs["beta_ramp"])
    return SynthConfig(**kwargs)


def write_synth_config(config: SynthConfig, path) -> None:
    lines = ["[synth]", f'league = "{config.league.value}"']
    for name in ("n_seasons", "start_season", "roster_size", "seed", "n_colleges"):
        lines.append(f"{name} = {getattr(config, name)}")
    for name in ("leave_rate", "retire_share", "mean_follows", "sociability_sigma",
                 "attractiveness_sigma", "same_team_boost", "beta", "fitness_coupling",
                 "performance_persistence", "performance_noise", "metric_missing_rate",
                 "college_rate", "reserve_factor"):
        lines.append(f"{name} = {float(getattr(config, name))!r}")
    if config.beta_ramp is not None:
        lines.append(f"beta_ramp = [{config.beta_ramp[0]!r}, {config.beta_ramp[1]!r}]")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class GroundTruth:
    """Generative destination distribution for every realized switcher.

    Each row maps "player_id:season" to a probability vector over ``teams``
    (canonical order); the current team's entry is zero and rows sum to one.
    """

    teams: tuple[str, ...]
    rows: dict[str, tuple[float, ...]] = field(default_factory=dict)
    beta_start: float = 0.0
    beta_end: float = 0.0

    def probability(self, player_id: str, season: int) -> tuple[float, ...]:
        return self.rows[f"{player_id}:{season}"]


def bayes_accuracy(truth: GroundTruth) -> float:
    """Expected accuracy of always guessing each row's modal destination —
    the ceiling for any classifier evaluated on this generation."""
    if not truth.rows:
        raise EmptyDataset("ground truth holds no transitions")
    return float(np.mean([max(row) for row in truth.rows.values()]))


def write_ground_truth(truth: GroundTruth, path) -> None:
    payload = {
        "format": GROUNDTRUTH_FORMAT,
        "teams": list(truth.teams),
        "beta_start": truth.beta_start,
        "beta_end": truth.beta_end,
        "bayes_accuracy": bayes_accuracy(truth) if truth.rows else None,
        "rows": {key: list(row) for key, row in sorted(truth.rows.items())},
    }
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write ground truth to {path}: {exc}") from exc


def load_ground_truth(path) -> GroundTruth:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IOFailure(f"cannot read ground truth from {path}: {exc}") from exc
    if payload.get("format") != GROUNDTRUTH_FORMAT:
        raise ValueError(f"unexpected ground truth format {payload.get('format')!r}")
    return GroundTruth(
        teams=tuple(payload["teams"]),
        rows={key: tuple(row) for key, row in payload["rows"].items()},
        beta_start=payload["beta_start"],
        beta_end=payload["beta_end"],
    )


@dataclass
class SynthResult:
    config: SynthConfig
    store: LeagueStore
    truth: GroundTruth

    def write(self, out_dir) -> None:
        """Emit league.toml, the four CSVs, and groundtruth.json."""
        root = Path(out_dir)
        try:
            root.mkdir(parents=True, exist_ok=True)
            write_store(self.store, root)
        except OSError as exc:
            raise IOFailure(f"cannot write league files to {root}: {exc}") from exc
        write_ground_truth(self.truth, root / "groundtruth.json")


def _sample_follow_targets(rng, k: int, weights: np.ndarray, self_index: int) -> np.ndarray:
    """Weighted sampling of k distinct targets via exponential race: the k
    smallest Exp(1)/w arrival times are exactly a weighted draw without
    replacement."""
    keys = rng.exponential(size=weights.shape[0]) / weights
    keys[self_index] = np.inf
    if k >= keys.shape[0]:
        return np.flatnonzero(np.isfinite(keys))
    picked = np.argpartition(keys, k)[:k]
    return picked[np.isfinite(keys[picked])]


def _stable_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def generate(config: SynthConfig) -> SynthResult:
    """Simulate the league season by season and return the parsed-store view
    of the emitted files plus the per-switcher generative distributions."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    league_cfg = config.league_config()
    teams = canonical_teams(config.league)
    n_teams = len(teams)
    roster_size = config.roster_size

    n_slots = roster_size * n_teams
    seasons = list(range(config.start_season, config.last_season + 1))
    expected_new = n_slots * (config.n_seasons - 1) * config.leave_rate * config.retire_share
    n_reserve = int(math.ceil(expected_new * config.reserve_factor)) + n_teams
    n_players = n_slots + n_reserve
    width = max(6, len(str(n_players)))
    ids = [f"P{i:0{width}d}" for i in range(n_players)]

    # Static identity: every player gets an affiliation anchor used for the
    # follow graph's same-team boost and for which reserve queue they debut
    # from. Slot players anchor to their opening team; reserves round-robin.
    anchor = np.empty(n_players, dtype=np.int64)
    for t in range(n_teams):
        anchor[t * roster_size:(t + 1) * roster_size] = t
    anchor[n_slots:] = np.arange(n_reserve) % n_teams

    attractiveness = rng.lognormal(0.0, config.attractiveness_sigma, n_players)
    sociability = rng.lognormal(0.0, config.sociability_sigma, n_players)
    quality = rng.normal(0.0, 1.0, n_players)
    if config.league is LeagueKind.MLB:
        raw_positions = _MLB_RAW_POSITIONS
        pos_weights = np.array([0.25, 0.2, 0.09, 0.06, 0.06, 0.06, 0.06, 0.07, 0.07, 0.08])
    else:
        raw_positions = _NBA_RAW_POSITIONS
        pos_weights = np.full(len(raw_positions), 1.0 / len(raw_positions))
    position_idx = rng.choice(len(raw_positions), size=n_players, p=pos_weights)
    quality += 0.2 * position_idx  # per-position mean shift
    entry_age = rng.integers(19, 28, size=n_players)

    # Follow graph: heavy-tailed out-degrees, targets pulled by heavy-tailed
    # attractiveness with a same-affiliation boost.
    out_edges: list[list[int]] = []
    degree_mean = np.clip(config.mean_follows * sociability, 0.0, float(n_players - 1))
    out_degree = np.minimum(rng.poisson(degree_mean), n_players - 1)
    for i in range(n_players):
        k = int(out_degree[i])
        if k == 0:
            out_edges.append([])
            continue
        weights = attractiveness * np.where(anchor == anchor[i],
                                            1.0 + config.same_team_boost, 1.0)
        targets = _sample_follow_targets(rng, k, weights, i)
        out_edges.append(sorted(int(t) for t in targets))

    # Team fitness: persistent wealth with mild drift; rank 1 = most valuable.
    wealth = rng.lognormal(0.0, 0.5, n_teams)
    fitness_rows: list[TeamFitness] = []
    fitness_z: dict[int, np.ndarray] = {}
    for s_index, season in enumerate(seasons):
        noise = rng.lognormal(0.0, 0.05, n_teams)
        valuations = np.round(900.0 * wealth * (1.0 + 0.03 * s_index) * noise, 1)
        valuations = np.maximum(valuations, 1.0)
        order = np.lexsort((np.arange(n_teams), -valuations))
        ranks = np.empty(n_teams, dtype=np.int64)
        ranks[order] = np.arange(1, n_teams + 1)
        std = valuations.std()
        fitness_z[season] = ((valuations - valuations.mean()) / std
                             if std > 0 else np.zeros(n_teams))
        for t, team in enumerate(teams):
            fitness_rows.append(TeamFitness(season, team, int(ranks[t]), float(valuations[t])))

    reserve_queues: list[list[int]] = [[] for _ in range(n_teams)]
    for i in range(n_slots, n_players):
        reserve_queues[anchor[i]].append(i)
    for queue in reserve_queues:
        queue.reverse()  # pop() then debuts lowest index first

    team_of_idx: dict[int, int] = {i: int(anchor[i]) for i in range(n_slots)}
    debut_season: dict[int, int] = {i: config.start_season for i in range(n_slots)}
    player_rows: list[PlayerSeason] = []
    truth_rows: dict[str, tuple[float, ...]] = {}
    metric_specs = league_cfg.metrics

    def metric_values(z: float) -> dict[str, float | None]:
        if config.league is LeagueKind.MLB:
            raw = {
                "FLD_PCT": 1.0 / (1.0 + math.exp(-(3.0 + 0.5 * z))),
                "OWN_PCT": 1.0 / (1.0 + math.exp(-0.4 * z)),
                "BT_RUNS": 8.0 * z,
                "BT_WINS": 0.8 * z,
            }
        else:
            raw = {"PER": 15.0 + 5.0 * z, "WS": 5.0 + 3.0 * z, "BPM": 2.5 * z}
        return {name: round(value, 4) for name, value in raw.items()}

    for season in seasons:
        members = sorted(team_of_idx)
        n_active = len(members)
        skill = (config.performance_persistence * quality[members]
                 + config.performance_noise * rng.normal(0.0, 1.0, n_active))
        missing = rng.random((n_active, len(metric_specs))) < config.metric_missing_rate
        for j, i in enumerate(members):
            values = metric_values(float(skill[j]))
            metrics: dict[str, float | None] = {}
            for m_index, spec in enumerate(metric_specs):
                metrics[spec.name] = None if missing[j, m_index] else values[spec.name]
            player_rows.append(PlayerSeason(
                player_id=ids[i],
                season=season,
                team=teams[team_of_idx[i]],
                position=raw_positions[position_idx[i]],
                mid_season_move=False,
                age=int(entry_age[i]) + (season - debut_season[i]),
                metrics=metrics,
            ))

        if season == config.last_season:
            break

        # Transition draws: who leaves, who retires, and where switchers go.
        beta = config.beta_for(season)
        leaves = rng.random(n_active) < config.leave_rate
        retires = rng.random(n_active) < config.retire_share
        roster_ids = {ids[i]: teams[team_of_idx[i]] for i in members}
        fit_bias = config.fitness_coupling * fitness_z[season]
        next_team_of: dict[int, int] = {}
        for j, i in enumerate(members):
            if not leaves[j]:
                next_team_of[i] = team_of_idx[i]
                continue
            if retires[j]:
                continue
            own = team_of_idx[i]
            followed = (ids[t] for t in out_edges[i])
            affinity = count_team_follows(followed, roster_ids, teams, teams[own])
            logits = beta * np.array([affinity[t] for t in teams], dtype=np.float64)
            logits += fit_bias
            logits[own] = -np.inf
            probs = _stable_softmax(logits)
            destination = int(rng.choice(n_teams, p=probs))
            next_team_of[i] = destination
            truth_rows[f"{ids[i]}:{season}"] = tuple(float(p) for p in probs)

        # Refill every team to nominal size with debutants from its own
        # queue, stealing from the deepest other queue when it runs dry.
        team_of_idx = next_team_of
        counts = np.zeros(n_teams, dtype=np.int64)
        for t in team_of_idx.values():
            counts[t] += 1
        for t in range(n_teams):
            while counts[t] < roster_size:
                if reserve_queues[t]:
                    i = reserve_queues[t].pop()
                else:
                    donor = max(range(n_teams), key=lambda u: len(reserve_queues[u]))
                    if not reserve_queues[donor]:
                        raise InfeasibleConfig(
                            f"reserve pool exhausted refilling season {season + 1}; "
                            f"increase reserve_factor")
                    i = reserve_queues[donor].pop()
                team_of_idx[i] = t
                debut_season[i] = season + 1
                counts[t] += 1

    appearing = {ps.player_id for ps in player_rows}
    edges = [
        (ids[i], ids[t])
        for i in range(n_players) if ids[i] in appearing
        for t in out_edges[i] if ids[t] in appearing
    ]

    college_pool = [f"COLL{k:02d}" for k in range(config.n_colleges)]
    colleges: dict[str, str] = {}
    for i in range(n_players):
        if ids[i] not in appearing:
            continue
        if rng.random() < config.college_rate:
            colleges[ids[i]] = college_pool[int(rng.integers(0, config.n_colleges))]
        else:
            colleges[ids[i]] = "N/A"

    store = build_store(league_cfg, player_rows, edges, fitness_rows, colleges)
    betas = (config.beta_for(seasons[0]), config.beta_for(seasons[-2]))
    truth = GroundTruth(teams=tuple(teams), rows=truth_rows,
                        beta_start=betas[0], beta_end=betas[1])
    return SynthResult(config=config, store=store, truth=truth)
