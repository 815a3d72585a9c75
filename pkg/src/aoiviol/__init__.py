"""Age-of-information violation probability for single-server status-update
systems: sample-path simulation, exact formulas, Monte-Carlo bounds and an
event-log oracle."""

from .analytic import (
    AnalyticResult,
    ExistenceError,
    departure_rate,
    dm11_violation,
    general_violation,
    mm11_expected_aoi,
    mm11_violation,
    zero_wait_exp_violation,
)
from .bounds import (
    BoundConfig,
    BoundReport,
    eta,
    gamma_star_lower_bound,
    guarantee_check,
    phi1,
    phi1_curve,
    phi2,
    phi2_curve,
)
from .dists import (
    Deterministic,
    Erlang,
    Exponential,
    RngStream,
    ShiftedExponential,
    parse_distribution,
    with_rate,
)
from .events import EventLog
from .experiment import ResultTable, Scenario, ScenarioError, load_scenario, parse_scenario, plot, run
from .oracle import MalformedLogError, mean_age, time_above, trajectory_from_log
from .sample_path import (
    Discipline,
    PeakRecord,
    SamplePath,
    SystemSpec,
    g_values,
    mean_aoi_estimate,
    renewal_reward_estimate,
    siid_diagnostic,
    simulate,
    violation_estimate,
)

__version__ = "0.1.0"
