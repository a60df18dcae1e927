"""Physical channel models for the BS -> HAP -> UAV -> robot downlink.

Three channels are generated here: the rank-1 line-of-sight BS-HAP matrix,
the sparse multipath HAP-UAV vector, and the Rayleigh-faded UAV-to-ground
links.  All angles are in radians, all gains linear; dB/dBm conversion
happens at config-load time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayConfig:
    """BS and RIS array geometry.

    Spacings are normalized by the carrier wavelength (0.5 means
    half-wavelength).
    """

    num_bs_antennas: int = 32
    num_ris_elements: int = 128
    bs_spacing: float = 0.5
    ris_spacing: float = 0.5
    carrier_hz: float = 6e9

    def __post_init__(self):
        if self.num_bs_antennas < 1 or self.num_ris_elements < 1:
            raise ValueError("array sizes must be >= 1")
        if self.bs_spacing <= 0 or self.ris_spacing <= 0:
            raise ValueError("element spacings must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz


@dataclass(frozen=True)
class Scenario:
    """Full deployment geometry and link budget.

    Positions are in meters; the BS sits at the origin.  Robot positions
    are ground-plane (x, y) pairs.  Excess-loss terms are aggregate
    gains/losses (antenna apertures, atmospheric margin) the free-space
    amplitude does not capture; negative dB means net gain.
    """

    hap_position: np.ndarray
    uav_position: np.ndarray
    robot_positions: np.ndarray  # (K, 2)
    antenna_gain: float = 10 ** 0.4  # 4 dB
    noise_power_uav: float = 10 ** ((-134 - 30) / 10)  # -134 dBm
    noise_power_robot: float = 10 ** ((-143 - 30) / 10)  # -143 dBm
    bs_power_budget: float = 120.0
    uav_power_budget: float = 0.5
    bs_packet_bits: float = 80.0
    robot_packet_bits: float = 80.0
    bs_blocklength_min: int = 100
    bs_blocklength_max: int = 1000
    robot_blocklength_min: int = 100
    robot_blocklength_max: int = 1000
    dep_threshold_uav: float = 5e-5
    dep_threshold_robot: float = 5e-5
    utg_carrier_hz: float = 2e9
    num_paths: int = 8
    angular_spread: float = np.pi / 12
    excess_loss_bs_hap_db: float = 0.0
    excess_loss_hap_uav_db: float = 0.0
    excess_loss_utg_db: float = 0.0
    utg_pathloss_exponent: float = 2.0
    area_center: tuple[float, float] = (80_000.0, 0.0)
    area_side: float = 500.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hap_position", np.asarray(self.hap_position, float))
        object.__setattr__(self, "uav_position", np.asarray(self.uav_position, float))
        object.__setattr__(self, "robot_positions", np.atleast_2d(np.asarray(self.robot_positions, float)))
        for p in (self.bs_power_budget, self.uav_power_budget, self.antenna_gain,
                  self.noise_power_uav, self.noise_power_robot):
            if p <= 0:
                raise ValueError("powers and gains must be positive")
        for eps in (self.dep_threshold_uav, self.dep_threshold_robot):
            if not 0 < eps < 1:
                raise ValueError("DEP thresholds must lie in (0, 1)")
        if self.bs_blocklength_min > self.bs_blocklength_max:
            raise ValueError("empty BS blocklength range")
        if self.robot_blocklength_min > self.robot_blocklength_max:
            raise ValueError("empty robot blocklength range")
        cx, cy = self.area_center
        half = self.area_side / 2 + 1e-9
        pos = self.robot_positions
        if np.any(np.abs(pos[:, 0] - cx) > half) or np.any(np.abs(pos[:, 1] - cy) > half):
            raise ValueError("robot positions must lie inside the configured area")

    @property
    def num_robots(self) -> int:
        return self.robot_positions.shape[0]


@dataclass(frozen=True)
class BsHapChannel:
    """Rank-1 LoS channel from the BS array to the RIS on the HAP."""

    matrix: np.ndarray  # (N, M)
    gain: complex
    aod: float  # at the BS array
    aoa: float  # at the RIS


@dataclass(frozen=True)
class SparseChannelInstance:
    """Ground-truth multipath HAP-UAV channel.

    ``dense_channel`` equals sum_l path_gains[l] * a_RIS(path_aods[l]).
    """

    path_gains: np.ndarray  # (L,) complex
    path_aods: np.ndarray  # (L,) rad
    dense_channel: np.ndarray  # (N,) complex
    large_scale_gain: float

    @property
    def num_paths(self) -> int:
        return len(self.path_gains)


@dataclass(frozen=True)
class UtgChannel:
    """One UAV-to-ground link: large-scale amplitude plus a Rayleigh draw."""

    large_scale_gain: float
    small_scale_sample: complex
    mean_snr_per_watt: float

    def snr(self, uav_power: float, noise_power: float) -> float:
        return uav_power * abs(self.large_scale_gain * self.small_scale_sample) ** 2 / noise_power


def steering_vector(angle: float, length: int, normalized_spacing: float = 0.5) -> np.ndarray:
    """ULA steering vector, element n = exp(-j 2 pi n d sin(angle)).

    Element 0 is always 1; entries are unit modulus.
    """
    n = np.arange(length)
    return np.exp(-2j * np.pi * n * normalized_spacing * np.sin(angle))


def steering_vector_derivative(angle: float, length: int, normalized_spacing: float = 0.5) -> np.ndarray:
    """d/d(angle) of :func:`steering_vector`."""
    n = np.arange(length)
    a = steering_vector(angle, length, normalized_spacing)
    return (-2j * np.pi * n * normalized_spacing * np.cos(angle)) * a


def friis_amplitude(distance: float, wavelength: float, excess_loss_db: float = 0.0) -> float:
    """Free-space amplitude lambda/(4 pi d) with an extra dB term."""
    if distance <= 0:
        raise ValueError("degenerate geometry: zero propagation distance")
    return wavelength / (4 * np.pi * distance) * 10 ** (-excess_loss_db / 20)


def elevation_angle(p_from: np.ndarray, p_to: np.ndarray) -> float:
    """Angle from the vertical boresight between two 3-D points."""
    d = np.asarray(p_to, float) - np.asarray(p_from, float)
    horiz = np.hypot(d[0], d[1])
    dz = abs(d[2])
    if horiz == 0 and dz == 0:
        raise ValueError("degenerate geometry: coincident positions")
    return np.arctan2(horiz, dz)


def make_bs_hap_channel(scenario: Scenario, array_config: ArrayConfig) -> BsHapChannel:
    """Build the rank-1 BS-HAP matrix from geometry and free-space loss.

    Both arrays are modeled with a vertical boresight, so the AoD at the
    BS and the AoA at the RIS share the same elevation geometry.
    """
    bs = np.zeros(3)
    p_h = scenario.hap_position
    if p_h[2] <= bs[2]:
        raise ValueError("HAP must be above the BS horizon")
    d = float(np.linalg.norm(p_h - bs))
    lam = array_config.wavelength
    amp = friis_amplitude(d, lam, scenario.excess_loss_bs_hap_db)
    gain = amp * np.exp(-2j * np.pi * d / lam)
    angle = elevation_angle(bs, p_h)
    a_ris = steering_vector(angle, array_config.num_ris_elements, array_config.ris_spacing)
    a_bs = steering_vector(angle, array_config.num_bs_antennas, array_config.bs_spacing)
    matrix = gain * np.outer(a_ris, a_bs.conj())
    return BsHapChannel(matrix=matrix, gain=gain, aod=angle, aoa=angle)


def hap_uav_los_angle(scenario: Scenario) -> float:
    """Depression angle of the UAV below the RIS horizontal plane.

    The RIS boresight faces downrange, so angles on this link are measured
    from horizontal; this keeps the multipath cluster in the well-resolved
    region of the sin-uniform angular grid.
    """
    d = scenario.uav_position - scenario.hap_position
    horiz = np.hypot(d[0], d[1])
    if horiz == 0 and d[2] == 0:
        raise ValueError("degenerate geometry: coincident positions")
    return np.arctan2(abs(d[2]), horiz)


def sample_hap_uav_channel(
    scenario: Scenario,
    array_config: ArrayConfig,
    rng: np.random.Generator,
    num_paths: int | None = None,
) -> SparseChannelInstance:
    """Draw a sparse multipath HAP-UAV channel.

    AoDs are i.i.d. uniform in an interval of ``angular_spread`` centered
    on the geometric LoS direction; per-path small-scale coefficients are
    standard complex Gaussian scaled by 1/sqrt(L) so the expected channel
    energy does not depend on L.
    """
    L = scenario.num_paths if num_paths is None else num_paths
    if L < 1:
        raise ValueError("need at least one path")
    los = hap_uav_los_angle(scenario)
    half = scenario.angular_spread / 2
    aods = rng.uniform(los - half, los + half, size=L)
    aods = np.clip(aods, -np.pi / 2 + 1e-9, np.pi / 2 - 1e-9)
    d = float(np.linalg.norm(scenario.uav_position - scenario.hap_position))
    large = friis_amplitude(d, array_config.wavelength, scenario.excess_loss_hap_uav_db)
    small = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2 * L)
    gains = large * small
    n_ris = array_config.num_ris_elements
    h = np.zeros(n_ris, complex)
    for beta, omega in zip(gains, aods):
        h += beta * steering_vector(omega, n_ris, array_config.ris_spacing)
    return SparseChannelInstance(path_gains=gains, path_aods=aods, dense_channel=h, large_scale_gain=large)


def sample_utg_channels(scenario: Scenario, rng: np.random.Generator) -> list[UtgChannel]:
    """Draw the K UAV-to-ground links.

    Large scale is a log-distance model anchored at the free-space 1 m
    intercept; small scale is unit-mean-power Rayleigh, so the
    instantaneous SNR is exponential with mean P_u * |g^L|^2 / sigma_k^2.
    """
    lam = SPEED_OF_LIGHT / scenario.utg_carrier_hz
    out = []
    for pos in scenario.robot_positions:
        ground = np.array([pos[0], pos[1], 0.0])
        d = float(np.linalg.norm(scenario.uav_position - ground))
        if d <= 0:
            raise ValueError("degenerate geometry: robot under the UAV antenna")
        gain_sq = (lam / (4 * np.pi)) ** 2 * d ** (-scenario.utg_pathloss_exponent)
        gain_sq *= 10 ** (-scenario.excess_loss_utg_db / 10)
        g_large = float(np.sqrt(gain_sq))
        small = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
        out.append(
            UtgChannel(
                large_scale_gain=g_large,
                small_scale_sample=complex(small),
                mean_snr_per_watt=g_large ** 2 / scenario.noise_power_robot,
            )
        )
    return out
