"""Shared fixtures: synthetic leagues generated once per session.

The frozen configs below are the calibration points the acceptance suite
relies on; regenerating them is cheap (a few seconds total) but they are
session-scoped so every test file can reuse the same objects.
"""

import pytest

from teamswitch.leagues import LeagueKind
from teamswitch.synthleague import SynthConfig, generate

# bayes_accuracy = 0.3006 with 5330 switchers (beta tuned on seed 101)
CAL_CONFIG = SynthConfig(league=LeagueKind.NBA, n_seasons=11, roster_size=45,
                         mean_follows=15.0, beta=2.65, seed=101)

# zero coupling, same social structure: every truth vector uniform over 29
NULL_SMALL_CONFIG = SynthConfig(league=LeagueKind.NBA, n_seasons=8, roster_size=30,
                                mean_follows=15.0, beta=0.0, seed=404)

# zero coupling at scale: >= 10,000 switchers for baseline sanity checks
NULL_10K_CONFIG = SynthConfig(league=LeagueKind.NBA, n_seasons=15, roster_size=60,
                              mean_follows=1.0, beta=0.0, seed=303)

# coupling rising linearly across seasons for temporal-direction checks
RAMP_CONFIG = SynthConfig(league=LeagueKind.NBA, n_seasons=11, roster_size=24,
                          mean_follows=15.0, beta_ramp=(0.3, 5.0), seed=202)

# small all-purpose league for unit tests
MINI_CONFIG = SynthConfig(league=LeagueKind.MLB, n_seasons=5, roster_size=4,
                          mean_follows=6.0, beta=1.5, seed=7)


@pytest.fixture(scope="session")
def cal_league():
    return generate(CAL_CONFIG)


@pytest.fixture(scope="session")
def null_small_league():
    return generate(NULL_SMALL_CONFIG)


@pytest.fixture(scope="session")
def null_10k_league():
    return generate(NULL_10K_CONFIG)


@pytest.fixture(scope="session")
def ramp_league():
    return generate(RAMP_CONFIG)


@pytest.fixture(scope="session")
def mini_league():
    return generate(MINI_CONFIG)


@pytest.fixture(scope="session")
def mini_league_dir(mini_league, tmp_path_factory):
    root = tmp_path_factory.mktemp("mini_league")
    mini_league.write(root)
    return root
