"""Exception hierarchy shared across the toolkit.

DataError covers everything wrong with input content; IOFailure wraps OS
errors raised while reading or writing artifacts. The CLI maps each to its
own exit code.
"""


class TeamswitchError(Exception):
    """Base for all toolkit errors."""


class DataError(TeamswitchError):
    """Input data violates a documented contract."""


class IOFailure(TeamswitchError):
    """The operating system refused a read or write."""


# -- ingestion -------------------------------------------------------------

class MalformedHeader(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class UnknownTeamCode(DataError):
    pass


class DuplicatePlayerSeason(DataError):
    def __init__(self, row: int, player_id: str, season: int):
        super().__init__(f"row {row}: duplicate (player_id, season) = ({player_id}, {season})")
        self.row = row


class DuplicateFitnessRow(DataError):
    def __init__(self, row: int, season: int, team: str):
        super().__init__(f"row {row}: duplicate fitness entry for ({season}, {team})")
        self.row = row


class NonPositiveValuation(DataError):
    pass


class NonPositiveRank(DataError):
    pass


class TeamCountMismatch(DataError):
    def __init__(self, season: int, count: int, expected: int):
        super().__init__(f"season {season} has {count} distinct teams, expected {expected}")
        self.season = season
        self.count = count


# -- feature engineering ---------------------------------------------------

class UnknownPosition(DataError):
    pass


class OwnerNotTransitioning(DataError):
    """Affinity is only defined for eligible team switchers."""


class EmptyDataset(DataError):
    pass


# -- classifiers -----------------------------------------------------------

class DegenerateLabels(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class ManifestMismatch(TeamswitchError):
    """Prediction input does not match the column manifest used in training."""


# -- graphs ----------------------------------------------------------------

class DegenerateGraph(DataError):
    pass


class NoEdges(DataError):
    pass


# -- experiments -----------------------------------------------------------

class LengthMismatch(TeamswitchError):
    pass


class EmptyPeriod(DataError):
    pass


# -- synthesis -------------------------------------------------------------

class InfeasibleConfig(DataError):
    pass
