"""Monte Carlo experiment drivers and CSV emission.

Each experiment kind sweeps one parameter, averages a per-trial metric
over seeded independent trials, and emits one CSV row per (sweep value,
method).  Seeding is keyed by (master seed, sweep index, trial index), so
results are byte-identical across reruns and independent of execution
order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .channels import ArrayConfig, Scenario, make_bs_hap_channel, sample_hap_uav_channel, sample_utg_channels
from .config import DEFAULT_NUM_PILOTS, place_robots
from .greedy import GreedyConfig, omp, sp
from .optimizer import InfeasibleError, run_ptpb
from .ris_phase import align_phases, baseline_phases, cascade_snr, exhaustive_phase_search, mrt_precoder
from .roamp import RoampConfig, RoampDivergenceError, run_roamp
from .sparse_model import (
    GridCollisionError,
    assign_to_grid,
    build_grid,
    build_measurement,
    noise_variance_for_snr,
    simulate_pilot_reception,
)

NMSE_FLOOR_DB = -200.0

EXPERIMENT_KINDS = (
    "nmse_vs_snr",
    "nmse_vs_pilots",
    "gain_vs_N",
    "ee_vs_N",
    "ee_vs_Pu",
    "ee_vs_area",
)

CSV_HEADER = ("experiment", "sweep", "method", "metric", "value", "trials", "failures", "seed")

DEFAULT_SWEEPS = {
    "nmse_vs_snr": [0.0, 4.0, 8.0, 12.0, 16.0, 20.0],
    "nmse_vs_pilots": [30, 40, 50, 60, 70],
    "gain_vs_N": [96, 128, 160, 192, 224, 256],
    "ee_vs_N": [96, 128, 160, 192, 224, 256],
    "ee_vs_Pu": [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    "ee_vs_area": [100.0, 300.0, 500.0, 700.0, 900.0],
}

# metric name and whether trial values are averaged linearly then reported in dB
_KIND_METRICS = {
    "nmse_vs_snr": ("nmse_db", True),
    "nmse_vs_pilots": ("nmse_db", True),
    "gain_vs_N": ("gain_db", True),
    "ee_vs_N": ("min_ee", False),
    "ee_vs_Pu": ("min_ee", False),
    "ee_vs_area": ("min_ee", False),
}

_FAILURE_EXCEPTIONS = (GridCollisionError, RoampDivergenceError, InfeasibleError,
                       np.linalg.LinAlgError, FloatingPointError)


def nmse(estimate: np.ndarray, truth: np.ndarray, floor_db: float = NMSE_FLOOR_DB) -> float:
    """Normalized mean square error in dB: 10 log10(||est - h||^2 / ||h||^2)."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth must have equal shapes")
    denom = float(np.linalg.norm(truth) ** 2)
    if denom == 0:
        raise ValueError("zero truth vector")
    ratio = float(np.linalg.norm(estimate - truth) ** 2) / denom
    if ratio <= 10 ** (floor_db / 10):
        return floor_db
    return float(10 * np.log10(ratio))


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep experiment: kind, sweep values, scenario, seeding."""

    kind: str
    sweep: tuple
    scenario: Scenario
    array_config: ArrayConfig
    trials: int = 200
    num_pilots: int = DEFAULT_NUM_PILOTS
    master_seed: int = 0
    snr_db: float = 15.0  # fixed estimation SNR for the pilot-count sweep

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        object.__setattr__(self, "sweep", tuple(self.sweep))
        if not self.sweep:
            raise ValueError("sweep must be non-empty")


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def max_failure_fraction(self) -> float:
        if not self.rows:
            return 0.0
        return max(r["failures"] / r["trials"] for r in self.rows)

    @property
    def fully_infeasible(self) -> bool:
        """True when some (sweep, method) cell produced no successful trial."""
        return any(r["failures"] == r["trials"] for r in self.rows)


def _sample_representable_instance(scenario, array_config, grid, rng, max_tries=200):
    """Draw a channel whose paths land on distinct grid bins.

    The estimation experiments assume the ground truth is exactly
    representable in the off-grid model (one dictionary column per path);
    colliding draws are rejected and resampled.
    """
    for _ in range(max_tries):
        instance = sample_hap_uav_channel(scenario, array_config, rng)
        try:
            assign_to_grid(grid, instance)
        except GridCollisionError:
            continue
        return instance
    raise GridCollisionError(f"no collision-free channel draw in {max_tries} tries")


def _nmse_trial(scenario, array_config, num_pilots, snr_db, rng):
    grid = build_grid(array_config.num_ris_elements, array_config.ris_spacing)
    bs_hap = make_bs_hap_channel(scenario, array_config)
    instance = _sample_representable_instance(scenario, array_config, grid, rng)
    model = build_measurement(grid, bs_hap, array_config, num_pilots, rng)
    sigma = noise_variance_for_snr(model, instance, snr_db)
    model = model.with_noise_variance(sigma)
    y = simulate_pilot_reception(model, instance, sigma, rng)
    truth = instance.dense_channel

    out = {}
    try:
        est = run_roamp(y, model, RoampConfig())
        out["roamp"] = float(np.linalg.norm(est.reconstructed_channel - truth) ** 2
                             / np.linalg.norm(truth) ** 2)
    except _FAILURE_EXCEPTIONS:
        out["roamp"] = None
    f0 = model.matrix()
    a0 = grid.dictionary()
    cfg = GreedyConfig(target_sparsity=scenario.num_paths)
    for name, solver in (("omp", omp), ("sp", sp)):
        try:
            x = solver(y, f0, cfg)
            out[name] = float(np.linalg.norm(a0 @ x - truth) ** 2 / np.linalg.norm(truth) ** 2)
        except _FAILURE_EXCEPTIONS:
            out[name] = None
    return out


def _gain_trial(scenario, array_config, rng):
    bs_hap = make_bs_hap_channel(scenario, array_config)
    instance = sample_hap_uav_channel(scenario, array_config, rng)
    precoder = mrt_precoder(bs_hap, array_config)

    def snr_of(config):
        return cascade_snr(instance.dense_channel, config, bs_hap, precoder,
                           scenario.bs_power_budget, scenario.antenna_gain,
                           scenario.noise_power_uav).snr

    out = {}
    aligned = align_phases(instance.path_gains, instance.path_aods, bs_hap.aoa, array_config)
    out["aligned"] = snr_of(aligned)
    exhaustive = exhaustive_phase_search(instance.path_gains, instance.path_aods,
                                         bs_hap.aoa, array_config)
    out["exhaustive"] = snr_of(exhaustive)
    out["random"] = snr_of(baseline_phases("random", array_config.num_ris_elements, rng))
    out["zero"] = snr_of(baseline_phases("zero", array_config.num_ris_elements))
    return out


def _ee_trial(scenario, array_config, rng):
    bs_hap = make_bs_hap_channel(scenario, array_config)
    instance = sample_hap_uav_channel(scenario, array_config, rng)
    utg = sample_utg_channels(scenario, rng)
    out = {}
    for mode in ("ptpb", "mtp", "mbl"):
        try:
            _, outcome = run_ptpb(scenario, array_config, bs_hap, instance, utg, mode=mode)
            out[mode] = outcome.min_ee
        except _FAILURE_EXCEPTIONS:
            out[mode] = None
    return out


def _trial_values(spec: ExperimentSpec, sweep_value, rng):
    """Dispatch one trial; returns {method: linear value or None}."""
    scenario = spec.scenario
    array_config = spec.array_config
    if spec.kind == "nmse_vs_snr":
        return _nmse_trial(scenario, array_config, spec.num_pilots, float(sweep_value), rng)
    if spec.kind == "nmse_vs_pilots":
        return _nmse_trial(scenario, array_config, int(sweep_value), spec.snr_db, rng)
    if spec.kind in ("gain_vs_N", "ee_vs_N"):
        array_config = replace(array_config, num_ris_elements=int(sweep_value))
        if spec.kind == "gain_vs_N":
            return _gain_trial(scenario, array_config, rng)
        return _ee_trial(scenario, array_config, rng)
    if spec.kind == "ee_vs_Pu":
        scenario = replace(scenario, uav_power_budget=float(sweep_value))
        return _ee_trial(scenario, array_config, rng)
    # ee_vs_area: redraw the robot drop inside the resized square
    side = float(sweep_value)
    positions = place_robots(scenario.num_robots, scenario.area_center, side, rng)
    scenario = replace(scenario, area_side=side, robot_positions=positions)
    return _ee_trial(scenario, array_config, rng)


def run_experiment(spec: ExperimentSpec, collect_traces: bool = False) -> ExperimentResult:
    """Run the sweep; averages each method's metric over the trials.

    Failed trials (grid collisions, estimator divergence, infeasible
    resource problems) are excluded from the average and counted in the
    ``failures`` column.  Deterministic given the master seed.
    """
    metric, to_db = _KIND_METRICS[spec.kind]
    result = ExperimentResult()
    for sweep_index, sweep_value in enumerate(spec.sweep):
        sums: dict[str, float] = {}
        counts: dict[str, int] = {}
        failures: dict[str, int] = {}
        for trial in range(spec.trials):
            rng = np.random.default_rng([spec.master_seed, sweep_index, trial])
            try:
                values = _trial_values(spec, sweep_value, rng)
            except _FAILURE_EXCEPTIONS:
                values = None
            if values is None:
                # whole-trial failure: charge every method of this kind
                keys = list(sums) or _method_names(spec.kind)
                values = {k: None for k in keys}
            for method, value in values.items():
                sums.setdefault(method, 0.0)
                counts.setdefault(method, 0)
                failures.setdefault(method, 0)
                if value is None or not np.isfinite(value):
                    failures[method] += 1
                else:
                    sums[method] += value
                    counts[method] += 1
            if collect_traces:
                result.traces.append({
                    "sweep": sweep_value,
                    "trial": trial,
                    "values": {k: (None if v is None else float(v)) for k, v in values.items()},
                })
        for method in sums:
            if counts[method] > 0:
                mean = sums[method] / counts[method]
                value = 10 * np.log10(max(mean, 10 ** (NMSE_FLOOR_DB / 10))) if to_db else mean
            else:
                value = float("nan")
            result.rows.append({
                "experiment": spec.kind,
                "sweep": sweep_value,
                "method": method,
                "metric": metric,
                "value": float(value),
                "trials": spec.trials,
                "failures": failures[method],
                "seed": spec.master_seed,
            })
    return result


def _method_names(kind: str) -> list[str]:
    if kind.startswith("nmse"):
        return ["roamp", "omp", "sp"]
    if kind.startswith("gain"):
        return ["aligned", "exhaustive", "random", "zero"]
    return ["ptpb", "mtp", "mbl"]


def _format_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def write_csv(rows: list, path) -> None:
    """Emit result rows with the stable schema and deterministic bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_format_value(row[k]) for k in CSV_HEADER])
