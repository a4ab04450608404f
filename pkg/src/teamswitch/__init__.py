"""Roster-transition prediction toolkit.

Ingests player-season, follow-graph, team-fitness, and college data for a
30-team league; engineers social-affinity features; trains from-scratch
classifier families to predict a switching player's destination team; and
reports directed-network statistics. A synthetic-league generator with known
ground truth closes the loop for verification.
"""

from .errors import DataError, TeamswitchError
from .leagues import LeagueConfig, LeagueKind, default_config

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "LeagueConfig",
    "LeagueKind",
    "TeamswitchError",
    "default_config",
    "__version__",
]
