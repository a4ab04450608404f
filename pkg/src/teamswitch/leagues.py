"""League reference tables: franchises, relocations, positions, metric schemas.

Both leagues are modeled as a fixed set of 30 canonical franchise codes.
Historic relocations and renames collapse onto the canonical code so the
label space stays constant across seasons.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import UnknownTeamCode


class LeagueKind(str, enum.Enum):
    MLB = "MLB"
    NBA = "NBA"

    @classmethod
    def parse(cls, raw: str) -> "LeagueKind":
        try:
            return cls(raw.strip().upper())
        except ValueError:
            raise ValueError(f"unknown league kind: {raw!r}") from None


MLB_TEAMS = (
    "ARI", "ATL", "BAL", "BOS", "CHC", "CHW", "CIN", "CLE", "COL", "DET",
    "HOU", "KCR", "LAA", "LAD", "MIA", "MIL", "MIN", "NYM", "NYY", "OAK",
    "PHI", "PIT", "SDP", "SEA", "SFG", "STL", "TBR", "TEX", "TOR", "WSN",
)

NBA_TEAMS = (
    "ATL", "BOS", "BRK", "CHI", "CHO", "CLE", "DAL", "DEN", "DET", "GSW",
    "HOU", "IND", "LAC", "LAL", "MEM", "MIA", "MIL", "MIN", "NOP", "NYK",
    "OKC", "ORL", "PHI", "PHO", "POR", "SAC", "SAS", "TOR", "UTA", "WAS",
)

# Spelling variants that are the same franchise in the same city.
MLB_ALIASES = {
    "KC": "KCR", "SD": "SDP", "SF": "SFG", "TB": "TBR",
    "WSH": "WSN", "CWS": "CHW",
}
NBA_ALIASES = {
    "BKN": "BRK", "PHX": "PHO", "NO": "NOP", "NY": "NYK", "GS": "GSW",
    "SA": "SAS", "UTAH": "UTA", "WSH": "WAS", "CHA": "CHO",
}

# (raw code, last season it was valid) -> canonical code.  A raw code used
# after its window is treated as unknown, matching the franchise timeline.
MLB_RELOCATIONS = {
    "MON": (2004, "WSN"),   # Montreal -> Washington
    "ANA": (2004, "LAA"),   # Anaheim rebrand
    "TBD": (2007, "TBR"),   # Devil Rays rebrand
    "FLA": (2011, "MIA"),   # Florida -> Miami
}
NBA_RELOCATIONS = {
    "VAN": (2001, "MEM"),   # Vancouver -> Memphis
    "CHH": (2002, "NOP"),   # original Charlotte Hornets -> New Orleans
    "NOH": (2013, "NOP"),   # New Orleans Hornets rebrand
    "NOK": (2007, "NOP"),   # New Orleans/Oklahoma City interim
    "SEA": (2008, "OKC"),   # Seattle -> Oklahoma City
    "NJN": (2012, "BRK"),   # New Jersey -> Brooklyn
}

# Raw roster labels grouped into the three coarse baseball classes.
MLB_POSITION_MERGE = {
    "P": "PITCHER", "SP": "PITCHER", "RP": "PITCHER",
    "C": "CATCHER",
    "1B": "FIELDER", "2B": "FIELDER", "3B": "FIELDER", "SS": "FIELDER",
    "LF": "FIELDER", "CF": "FIELDER", "RF": "FIELDER", "OF": "FIELDER",
    "IF": "FIELDER", "DH": "FIELDER", "UT": "FIELDER", "PH": "FIELDER",
    "PR": "FIELDER", "FD": "FIELDER",
}
MLB_POSITION_CLASSES = ("PITCHER", "CATCHER", "FIELDER")
NBA_POSITION_CLASSES = ("PG", "SG", "SF", "PF", "C")


def canonical_teams(kind: LeagueKind) -> tuple[str, ...]:
    return MLB_TEAMS if kind is LeagueKind.MLB else NBA_TEAMS


def position_classes(kind: LeagueKind) -> tuple[str, ...]:
    return MLB_POSITION_CLASSES if kind is LeagueKind.MLB else NBA_POSITION_CLASSES


def resolve_team(raw: str, season: int, kind: LeagueKind) -> str:
    """Map a raw franchise code for a given season to its canonical code.

    Raises UnknownTeamCode when the code is not in the franchise table or is
    used outside the seasons it existed.
    """
    code = raw.strip().upper()
    teams = canonical_teams(kind)
    if code in teams:
        return code
    aliases = MLB_ALIASES if kind is LeagueKind.MLB else NBA_ALIASES
    if code in aliases:
        return aliases[code]
    relocations = MLB_RELOCATIONS if kind is LeagueKind.MLB else NBA_RELOCATIONS
    if code in relocations:
        last_season, target = relocations[code]
        if season <= last_season:
            return target
        raise UnknownTeamCode(
            f"{raw!r} not a valid {kind.value} code in season {season} "
            f"(last used {last_season})"
        )
    raise UnknownTeamCode(f"{raw!r} is not a known {kind.value} franchise code")


@dataclass(frozen=True)
class MetricSpec:
    """One performance metric column.

    ``scale`` divides the raw value on ingest, so percent-style columns can be
    declared with scale 100 and fraction-style columns with scale 1.
    ``bounded`` marks metrics that must land in [0, 1] after scaling.
    """

    name: str
    column: str
    scale: float = 1.0
    bounded: bool = False


MLB_METRICS = (
    MetricSpec("FLD_PCT", "fld_pct", 1.0, True),
    MetricSpec("OWN_PCT", "own_pct", 1.0, True),
    MetricSpec("BT_RUNS", "bt_runs"),
    MetricSpec("BT_WINS", "bt_wins"),
)
NBA_METRICS = (
    MetricSpec("PER", "per"),
    MetricSpec("WS", "ws"),
    MetricSpec("BPM", "bpm"),
)


@dataclass(frozen=True)
class LeagueConfig:
    """League kind, the season window under study, and the metric schema."""

    kind: LeagueKind
    first_season: int
    last_season: int
    metrics: tuple[MetricSpec, ...] = field(default=())

    def __post_init__(self):
        if self.first_season > self.last_season:
            raise ValueError("first_season must be <= last_season")
        if not self.metrics:
            object.__setattr__(self, "metrics", default_metrics(self.kind))

    @property
    def teams(self) -> tuple[str, ...]:
        return canonical_teams(self.kind)

    @property
    def seasons(self) -> range:
        return range(self.first_season, self.last_season + 1)

    def metric_names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.metrics)


def default_metrics(kind: LeagueKind) -> tuple[MetricSpec, ...]:
    return MLB_METRICS if kind is LeagueKind.MLB else NBA_METRICS


def default_config(kind: LeagueKind) -> LeagueConfig:
    if kind is LeagueKind.MLB:
        return LeagueConfig(kind, 2002, 2018)
    return LeagueConfig(kind, 2001, 2018)


def load_league_config(path) -> LeagueConfig:
    """Read a league config from a TOML file (see write_league_config)."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    league = data.get("league", {})
    kind = LeagueKind.parse(league["kind"])
    metrics = tuple(
        MetricSpec(
            name=m["name"],
            column=m.get("column", m["name"].lower()),
            scale=float(m.get("scale", 1.0)),
            bounded=bool(m.get("bounded", False)),
        )
        for m in data.get("metrics", ())
    ) or default_metrics(kind)
    return LeagueConfig(
        kind=kind,
        first_season=int(league["first_season"]),
        last_season=int(league["last_season"]),
        metrics=metrics,
    )


def write_league_config(config: LeagueConfig, path) -> None:
    lines = [
        "[league]",
        f'kind = "{config.kind.value}"',
        f"first_season = {config.first_season}",
        f"last_season = {config.last_season}",
        "",
    ]
    for m in config.metrics:
        lines += [
            "[[metrics]]",
            f'name = "{m.name}"',
            f'column = "{m.column}"',
            f"scale = {m.scale}",
            f"bounded = {str(m.bounded).lower()}",
            "",
        ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
