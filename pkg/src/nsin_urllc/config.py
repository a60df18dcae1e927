"""Default parameters and flat key=value configuration loading.

Defaults mirror the reference deployment: a 32-antenna BS at the origin,
a 128-element RIS on a HAP at [1, 0, 18] km, a UAV relay at [80, 0, 0.05]
km, and 10 ground robots in a 500 m square centered 80 km downrange.
Aggregate antenna-aperture gains on the long stratospheric links are
folded into negative excess-loss terms so the default link budget closes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channels import ArrayConfig, Scenario

DEFAULT_NUM_PILOTS = 48

# net aperture/array gains (dB) on the two long links beyond free space
_DEFAULT_EXCESS_BS_HAP_DB = -25.0
_DEFAULT_EXCESS_HAP_UAV_DB = -25.0

_SCENARIO_FLOAT_KEYS = (
    "antenna_gain",
    "noise_power_uav",
    "noise_power_robot",
    "bs_power_budget",
    "uav_power_budget",
    "bs_packet_bits",
    "robot_packet_bits",
    "dep_threshold_uav",
    "dep_threshold_robot",
    "utg_carrier_hz",
    "angular_spread",
    "excess_loss_bs_hap_db",
    "excess_loss_hap_uav_db",
    "excess_loss_utg_db",
    "utg_pathloss_exponent",
    "area_side",
)
_SCENARIO_INT_KEYS = (
    "bs_blocklength_min",
    "bs_blocklength_max",
    "robot_blocklength_min",
    "robot_blocklength_max",
    "num_paths",
    "rng_seed",
)
_ARRAY_INT_KEYS = ("num_bs_antennas", "num_ris_elements")
_ARRAY_FLOAT_KEYS = ("bs_spacing", "ris_spacing", "carrier_hz")


@dataclass(frozen=True)
class SimulationSettings:
    """Everything a simulation run needs: scenario, arrays, pilot count."""

    scenario: Scenario
    array_config: ArrayConfig
    num_pilots: int = DEFAULT_NUM_PILOTS


def default_array_config(**overrides) -> ArrayConfig:
    """32-antenna BS, 128-element half-wavelength RIS at 6 GHz."""
    return ArrayConfig(**overrides)


def place_robots(num_robots: int, area_center: tuple[float, float], area_side: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Uniform robot drops inside the square service area."""
    cx, cy = area_center
    half = area_side / 2
    x = rng.uniform(cx - half, cx + half, size=num_robots)
    y = rng.uniform(cy - half, cy + half, size=num_robots)
    return np.column_stack([x, y])


def default_scenario(num_robots: int = 10, rng_seed: int = 0, **overrides) -> Scenario:
    """Reference deployment with deterministic robot placement.

    Robot positions are drawn from ``rng_seed`` unless ``robot_positions``
    is supplied explicitly; any :class:`Scenario` field can be overridden.
    """
    area_center = overrides.pop("area_center", (80_000.0, 0.0))
    area_side = overrides.pop("area_side", 500.0)
    positions = overrides.pop("robot_positions", None)
    if positions is None:
        positions = place_robots(num_robots, area_center, area_side,
                                 np.random.default_rng(rng_seed))
    base = dict(
        hap_position=np.array([1000.0, 0.0, 18_000.0]),
        uav_position=np.array([80_000.0, 0.0, 50.0]),
        robot_positions=positions,
        excess_loss_bs_hap_db=_DEFAULT_EXCESS_BS_HAP_DB,
        excess_loss_hap_uav_db=_DEFAULT_EXCESS_HAP_UAV_DB,
        area_center=area_center,
        area_side=area_side,
        rng_seed=rng_seed,
    )
    base.update(overrides)
    return Scenario(**base)


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(t) for t in text.replace(",", " ").split()])


def _parse_positions(text: str) -> np.ndarray:
    rows = [r for r in (s.strip() for s in text.split(";")) if r]
    return np.vstack([_parse_vector(r) for r in rows])


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val.strip()
    return values


def load_scenario(path) -> SimulationSettings:
    """Load a scenario from a flat key=value file.

    Unknown keys are rejected.  Power-like keys accept explicit unit
    suffixes: ``<name>_dbm`` converts dBm to watts and ``<name>_db``
    converts dB to a linear gain (excess-loss keys, whose canonical names
    already end in ``_db``, stay in dB).
    """
    with open(path) as fh:
        raw = parse_config_text(fh.read())

    scen_kwargs: dict = {}
    arr_kwargs: dict = {}
    num_pilots = DEFAULT_NUM_PILOTS
    num_robots = None

    for key, val in raw.items():
        if key in ("hap_position", "uav_position"):
            scen_kwargs[key] = _parse_vector(val)
        elif key == "robot_positions":
            scen_kwargs[key] = _parse_positions(val)
        elif key == "area_center":
            scen_kwargs[key] = tuple(_parse_vector(val))
        elif key == "num_robots":
            num_robots = int(val)
        elif key == "num_pilots":
            num_pilots = int(val)
        elif key in _SCENARIO_FLOAT_KEYS:
            scen_kwargs[key] = float(val)
        elif key in _SCENARIO_INT_KEYS:
            scen_kwargs[key] = int(val)
        elif key in _ARRAY_INT_KEYS:
            arr_kwargs[key] = int(val)
        elif key in _ARRAY_FLOAT_KEYS:
            arr_kwargs[key] = float(val)
        elif key.endswith("_dbm") and key[:-4] in _SCENARIO_FLOAT_KEYS:
            scen_kwargs[key[:-4]] = 10 ** ((float(val) - 30) / 10)
        elif key.endswith("_db") and key[:-3] in _SCENARIO_FLOAT_KEYS:
            scen_kwargs[key[:-3]] = 10 ** (float(val) / 10)
        else:
            raise ValueError(f"unknown config key {key!r}")

    if num_robots is not None and "robot_positions" in scen_kwargs:
        raise ValueError("give either num_robots or robot_positions, not both")
    if num_robots is not None:
        scen_kwargs["num_robots"] = num_robots
    scenario = default_scenario(**scen_kwargs)
    array_config = default_array_config(**arr_kwargs)
    if not 1 <= num_pilots <= array_config.num_ris_elements:
        raise ValueError("num_pilots must lie in [1, num_ris_elements]")
    return SimulationSettings(scenario=scenario, array_config=array_config,
                              num_pilots=num_pilots)


def with_ris_elements(settings: SimulationSettings, n: int) -> SimulationSettings:
    """Copy of the settings with a different RIS size."""
    return replace(settings, array_config=replace(settings.array_config, num_ris_elements=n))
