"""RIS-assisted near-space URLLC toolkit.

Simulates a BS -> RIS-mounted HAP -> UAV -> ground-robot downlink at desk
scale: sparse angular-domain channel estimation with a recurrent
LMMSE/MMSE message-passing estimator, RIS phase alignment, finite
blocklength reliability modeling, and two-layer energy-efficiency
resource optimization.
"""

from .channels import (
    ArrayConfig,
    BsHapChannel,
    Scenario,
    SparseChannelInstance,
    UtgChannel,
    make_bs_hap_channel,
    sample_hap_uav_channel,
    sample_utg_channels,
    steering_vector,
)
from .sparse_model import (
    AngularGrid,
    MeasurementModel,
    SparsePrior,
    build_grid,
    build_measurement,
    noise_variance_for_snr,
    simulate_pilot_reception,
)
from .roamp import PosteriorEstimate, RoampConfig, run_roamp
from .greedy import GreedyConfig, omp, sp
from .estimators import OmpChannelEstimator, RoampChannelEstimator, SpChannelEstimator
from .ris_phase import (
    CascadeGain,
    PhaseConfiguration,
    align_phases,
    baseline_phases,
    cascade_snr,
    coherent_gain_closed_form,
    mrt_precoder,
)
from .urllc import (
    LinkBudget,
    exact_dep,
    expected_dep_monte_carlo,
    expected_dep_rayleigh,
    linearized_dep,
    make_link_budget,
    mar,
    overall_dep,
    q_function,
    q_function_inv,
)
from .optimizer import (
    EEOutcome,
    InfeasibleError,
    ResourceDecision,
    bs_blocklength_search,
    bs_power_closed_form,
    robot_blocklength_search,
    run_ptpb,
    uav_power_dinkelbach,
)
from .config import default_array_config, default_scenario, load_scenario
from .harness import ExperimentSpec, nmse, run_experiment, write_csv

__all__ = [
    "ArrayConfig",
    "BsHapChannel",
    "Scenario",
    "SparseChannelInstance",
    "UtgChannel",
    "make_bs_hap_channel",
    "sample_hap_uav_channel",
    "sample_utg_channels",
    "steering_vector",
    "AngularGrid",
    "MeasurementModel",
    "SparsePrior",
    "build_grid",
    "build_measurement",
    "noise_variance_for_snr",
    "simulate_pilot_reception",
    "PosteriorEstimate",
    "RoampConfig",
    "run_roamp",
    "GreedyConfig",
    "omp",
    "sp",
    "RoampChannelEstimator",
    "OmpChannelEstimator",
    "SpChannelEstimator",
    "CascadeGain",
    "PhaseConfiguration",
    "align_phases",
    "baseline_phases",
    "cascade_snr",
    "coherent_gain_closed_form",
    "mrt_precoder",
    "LinkBudget",
    "make_link_budget",
    "q_function",
    "q_function_inv",
    "exact_dep",
    "linearized_dep",
    "expected_dep_monte_carlo",
    "expected_dep_rayleigh",
    "overall_dep",
    "mar",
    "EEOutcome",
    "InfeasibleError",
    "ResourceDecision",
    "bs_power_closed_form",
    "bs_blocklength_search",
    "uav_power_dinkelbach",
    "robot_blocklength_search",
    "run_ptpb",
    "default_array_config",
    "default_scenario",
    "load_scenario",
    "ExperimentSpec",
    "nmse",
    "run_experiment",
    "write_csv",
]
