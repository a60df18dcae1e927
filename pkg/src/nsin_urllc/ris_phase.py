"""MRT precoding, RIS phase alignment, and cascaded SNR computation.

Phase alignment picks one estimated path and sets each element's shift so
that path adds coherently at the UAV.  The alignment path minimizes the
gain-weighted absolute angular deviation, which reduces to a weighted
median and needs no LP solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scipy.optimize import minimize_scalar

from .channels import ArrayConfig, BsHapChannel, SparseChannelInstance, steering_vector


@dataclass(frozen=True)
class PhaseConfiguration:
    phase_shifts: np.ndarray  # (N,) in [0, 2*pi)
    alignment_angle: float
    strategy: str


@dataclass(frozen=True)
class CascadeGain:
    precoder: np.ndarray
    snr: float
    delta_b: float  # SNR per watt of BS power


def mrt_precoder(channel: BsHapChannel, array_config: ArrayConfig) -> np.ndarray:
    """Unit-norm precoder along the BS steering direction.

    For the rank-1 BS-HAP channel this is the dominant eigenvector of the
    cascade Gram matrix, i.e. maximum ratio transmission.
    """
    a = steering_vector(channel.aod, array_config.num_bs_antennas, array_config.bs_spacing)
    return a / np.linalg.norm(a)


def coherent_gain_closed_form(delta_sin: float, num_elements: int, spacing: float = 0.5) -> float:
    """Squared Dirichlet kernel |sin(pi N d x) / sin(pi d x)|^2.

    ``delta_sin`` is the sin-domain mismatch between a path and the
    alignment direction.  Removable singularities return N^2.
    """
    den = np.sin(np.pi * spacing * delta_sin)
    if abs(den) < 1e-12:
        return float(num_elements ** 2)
    num = np.sin(np.pi * num_elements * spacing * delta_sin)
    return float((num / den) ** 2)


def coherent_sum(delta_sin: np.ndarray, num_elements: int, spacing: float = 0.5) -> np.ndarray:
    """Complex array factor sum_n exp(j 2 pi n d x), vectorized over x."""
    x = np.atleast_1d(np.asarray(delta_sin, float))
    out = np.empty(x.shape, complex)
    den = np.sin(np.pi * spacing * x)
    small = np.abs(den) < 1e-12
    out[small] = num_elements
    xs = x[~small]
    out[~small] = (
        np.exp(1j * np.pi * (num_elements - 1) * spacing * xs)
        * np.sin(np.pi * num_elements * spacing * xs)
        / den[~small]
    )
    return out if np.ndim(delta_sin) else out[0]


def weighted_median_angle(angles: np.ndarray, weights: np.ndarray) -> float:
    """Minimizer of sum_l w_l |angle_l - a|; ties break to the smaller angle."""
    order = np.argsort(angles)
    a = np.asarray(angles, float)[order]
    w = np.asarray(weights, float)[order]
    total = w.sum()
    cum = np.cumsum(w)
    idx = int(np.searchsorted(cum, total / 2))
    return float(a[min(idx, len(a) - 1)])


def alignment_phase_shifts(alignment_angle: float, aoa: float, num_elements: int,
                           spacing: float, theta_free: float = 0.0) -> np.ndarray:
    n = np.arange(num_elements)
    theta = theta_free - 2 * np.pi * n * spacing * (np.sin(alignment_angle) - np.sin(aoa))
    return np.mod(theta, 2 * np.pi)


def align_phases(
    path_gains: np.ndarray,
    path_aods: np.ndarray,
    aoa: float,
    array_config: ArrayConfig,
    theta_free: float = 0.0,
) -> PhaseConfiguration:
    """Weighted-median alignment of the RIS phases to one estimated path.

    The weighted median gives a closed-form candidate; it is then checked
    against each path angle under the exact coherent-combination
    objective, and the winner is polished by a bounded 1-D search within
    one beamwidth.  The result stays a single-direction alignment but
    tracks the exhaustive grid search closely at a fraction of its cost.
    """
    gains = np.asarray(path_gains, complex)
    aods = np.asarray(path_aods, float)
    if len(gains) < 1:
        raise ValueError("need at least one path")
    if not np.all(np.isfinite(gains)):
        raise ValueError("path gains must be finite")
    n_elem = array_config.num_ris_elements
    d = array_config.ris_spacing

    def coherent_objective(omega: float) -> float:
        delta = np.sin(aods) - np.sin(omega)
        return float(abs(np.sum(np.conj(gains) * coherent_sum(delta, n_elem, d))) ** 2)

    weights = np.abs(gains * np.cos(aods))
    if np.all(weights == 0):
        omega0 = float(aods[int(np.argmax(np.abs(gains)))])
    else:
        omega0 = weighted_median_angle(aods, weights)
    candidates = np.concatenate(([omega0], aods))
    values = [coherent_objective(c) for c in candidates]
    omega0 = float(candidates[int(np.argmax(values))])
    best_value = max(values)
    beamwidth = 1.0 / (n_elem * d)
    polish = minimize_scalar(lambda om: -coherent_objective(om), method="bounded",
                             bounds=(omega0 - beamwidth, omega0 + beamwidth),
                             options={"xatol": 1e-9})
    if polish.success and -polish.fun > best_value:
        omega0 = float(polish.x)
    theta = alignment_phase_shifts(omega0, aoa, n_elem, array_config.ris_spacing, theta_free)
    return PhaseConfiguration(phase_shifts=theta, alignment_angle=omega0, strategy="aligned")


def alignment_objective(path_gains, path_aods, candidate: float) -> float:
    """Weighted absolute deviation the alignment minimizes."""
    w = np.abs(np.asarray(path_gains) * np.cos(path_aods))
    return float(np.sum(w * np.abs(np.asarray(path_aods) - candidate)))


def cascade_snr(
    h: np.ndarray,
    phase_config: PhaseConfiguration,
    bs_hap_channel: BsHapChannel,
    precoder: np.ndarray,
    bs_power: float,
    antenna_gain: float,
    noise_power: float,
) -> CascadeGain:
    """SNR of the BS -> RIS -> UAV cascade for a given phase pattern."""
    theta = np.exp(1j * phase_config.phase_shifts)
    val = np.vdot(h, theta * (bs_hap_channel.matrix @ precoder))
    delta_b = antenna_gain * abs(val) ** 2 / noise_power
    return CascadeGain(precoder=precoder, snr=bs_power * delta_b, delta_b=delta_b)


def cascade_snr_path_domain(
    instance: SparseChannelInstance,
    phase_config: PhaseConfiguration,
    bs_hap_channel: BsHapChannel,
    array_config: ArrayConfig,
    bs_power: float,
    antenna_gain: float,
    noise_power: float,
) -> float:
    """Cross-validation form of the cascade SNR summed over paths.

    Equals the matrix form of :func:`cascade_snr` when ``instance`` holds
    the exact multipath decomposition of ``h`` and the precoder is MRT.
    """
    n = np.arange(array_config.num_ris_elements)
    total = 0j
    for beta, omega in zip(instance.path_gains, instance.path_aods):
        phase = phase_config.phase_shifts + 2 * np.pi * n * array_config.ris_spacing * (
            np.sin(omega) - np.sin(bs_hap_channel.aoa)
        )
        total += np.conj(beta) * np.sum(np.exp(1j * phase))
    factor = abs(bs_hap_channel.gain) ** 2 * array_config.num_bs_antennas
    return float(bs_power * antenna_gain * factor * abs(total) ** 2 / noise_power)


def exhaustive_phase_search(
    path_gains: np.ndarray,
    path_aods: np.ndarray,
    aoa: float,
    array_config: ArrayConfig,
    resolution: float = 1e-4,
    search_interval: tuple[float, float] = (0.0, np.pi / 2),
) -> PhaseConfiguration:
    """Grid search of the alignment direction maximizing cascade SNR."""
    lo, hi = search_interval
    candidates = np.arange(lo, hi + resolution, resolution)
    gains = np.asarray(path_gains, complex)
    n_elem = array_config.num_ris_elements
    d = array_config.ris_spacing
    best_val = -np.inf
    best = candidates[0]
    # chunked to bound memory on fine grids
    for chunk in np.array_split(candidates, max(1, len(candidates) // 4096)):
        delta = np.sin(np.asarray(path_aods))[None, :] - np.sin(chunk)[:, None]
        sums = np.empty(delta.shape, complex)
        for l in range(delta.shape[1]):
            sums[:, l] = coherent_sum(delta[:, l], n_elem, d)
        vals = np.abs(sums @ gains.conj()) ** 2
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best = float(chunk[i])
    theta = alignment_phase_shifts(best, aoa, n_elem, d)
    return PhaseConfiguration(phase_shifts=theta, alignment_angle=best, strategy="exhaustive")


def baseline_phases(
    strategy: str,
    num_elements: int,
    rng: np.random.Generator | None = None,
) -> PhaseConfiguration:
    """Random or all-zero phase patterns used as comparison points."""
    if strategy == "random":
        if rng is None:
            raise ValueError("random strategy needs an rng")
        theta = rng.uniform(0, 2 * np.pi, size=num_elements)
    elif strategy == "zero":
        theta = np.zeros(num_elements)
    else:
        raise ValueError(f"unknown baseline strategy {strategy!r}")
    return PhaseConfiguration(phase_shifts=theta, alignment_angle=np.nan, strategy=strategy)
