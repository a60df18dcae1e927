"""Off-grid angular dictionary, sparse prior, and pilot measurement model.

The angular grid is uniform in sin-space so the nominal dictionary A(0) is
a scaled-unitary DFT-like matrix at half-wavelength spacing, which is what
the partial-DFT random-permutation (pDFT-RP) pilot design presupposes.
Measurements are realized over P pilot slots with one effective sensing
row per slot; F(offsets) is those rows applied to the offset dictionary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ArrayConfig, BsHapChannel, SparseChannelInstance, steering_vector, steering_vector_derivative


class GridCollisionError(ValueError):
    """Two true paths map to the same grid index; resample the instance."""


@dataclass(frozen=True)
class SparsePrior:
    """Bernoulli-Gaussian (spike-and-slab) prior on the angular channel."""

    sparsity: float
    gain_mean: complex = 0.0
    gain_variance: float = 1.0

    def __post_init__(self):
        if not 0 < self.sparsity < 1:
            raise ValueError("sparsity must lie in (0, 1)")
        if self.gain_variance <= 0:
            raise ValueError("gain variance must be positive")


class AngularGrid:
    """Uniform sin-space sampling of the angular domain (-pi/2, pi/2).

    Grid point n (1-based) satisfies sin(w_n) = -1 + (2n - 1)/N.
    """

    def __init__(self, num_points: int, spacing: float = 0.5):
        if num_points < 2:
            raise ValueError("need at least two grid points")
        self.num_points = num_points
        self.spacing = spacing
        n = np.arange(1, num_points + 1)
        self.sin_values = -1 + (2 * n - 1) / num_points
        self.grid_points = np.arcsin(self.sin_values)
        self.offsets = np.zeros(num_points)
        # clip radius: half the distance to the nearest neighbor in angle
        gaps = np.diff(self.grid_points)
        half = np.empty(num_points)
        half[0] = gaps[0] / 2
        half[-1] = gaps[-1] / 2
        half[1:-1] = np.minimum(gaps[:-1], gaps[1:]) / 2
        self.half_spacing = half

    def column(self, index: int, offset: float = 0.0) -> np.ndarray:
        return steering_vector(self.grid_points[index] + offset, self.num_points, self.spacing)

    def dictionary(self, offsets: np.ndarray | None = None) -> np.ndarray:
        """A(offsets): column n is the steering vector at w_n + offset_n."""
        angles = self.grid_points if offsets is None else self.grid_points + offsets
        m = np.arange(self.num_points)[:, None]
        return np.exp(-2j * np.pi * m * self.spacing * np.sin(angles)[None, :])

    def dictionary_derivative(self, offsets: np.ndarray | None = None) -> np.ndarray:
        """Column-wise derivative of the dictionary w.r.t. each offset."""
        angles = self.grid_points if offsets is None else self.grid_points + offsets
        m = np.arange(self.num_points)[:, None]
        a = np.exp(-2j * np.pi * m * self.spacing * np.sin(angles)[None, :])
        return (-2j * np.pi * m * self.spacing * np.cos(angles)[None, :]) * a

    def nearest_index(self, angle: float) -> int:
        return int(np.argmin(np.abs(self.grid_points - angle)))


def build_grid(num_points: int, spacing: float = 0.5) -> AngularGrid:
    return AngularGrid(num_points, spacing)


@dataclass(frozen=True)
class MeasurementModel:
    """Pilot-slot sensing model y = F(offsets) x + n.

    ``effective_rows`` holds the per-slot sensing functionals E so that
    F(offsets) = E @ A(offsets); at zero offsets this reproduces the
    pDFT-RP matrix c * S * D * R exactly.
    """

    grid: AngularGrid
    effective_rows: np.ndarray  # (P, N)
    per_slot_ris_patterns: np.ndarray  # (P, N), unit modulus
    cascade_scalar: complex
    noise_variance: float
    selected_rows: np.ndarray
    permutation: np.ndarray

    @property
    def num_pilots(self) -> int:
        return self.effective_rows.shape[0]

    @property
    def num_grid_points(self) -> int:
        return self.grid.num_points

    def matrix(self, offsets: np.ndarray | None = None) -> np.ndarray:
        """F(offsets), shape (P, N)."""
        return self.effective_rows @ self.grid.dictionary(offsets)

    def with_noise_variance(self, noise_variance: float) -> "MeasurementModel":
        return MeasurementModel(
            grid=self.grid,
            effective_rows=self.effective_rows,
            per_slot_ris_patterns=self.per_slot_ris_patterns,
            cascade_scalar=self.cascade_scalar,
            noise_variance=noise_variance,
            selected_rows=self.selected_rows,
            permutation=self.permutation,
        )


def build_measurement(
    grid: AngularGrid,
    bs_hap_channel: BsHapChannel | None,
    array_config: ArrayConfig | None,
    num_pilots: int,
    rng: np.random.Generator,
    noise_variance: float = 0.0,
    selected_rows: np.ndarray | None = None,
    permutation: np.ndarray | None = None,
) -> MeasurementModel:
    """Construct the pDFT-RP pilot model over ``num_pilots`` slots.

    The cascade scalar absorbs the known BS-HAP factor (complex gain times
    the MRT array factor sqrt(M)); pass ``bs_hap_channel=None`` for a
    unit scalar.  ``selected_rows``/``permutation`` override the random
    draws, mainly for tests.
    """
    n = grid.num_points
    if not 1 <= num_pilots <= n:
        raise ValueError("need 1 <= num_pilots <= grid size")
    if selected_rows is None:
        selected_rows = rng.permutation(n)[:num_pilots]
    else:
        selected_rows = np.asarray(selected_rows, int)
    if permutation is None:
        permutation = rng.permutation(n)
    else:
        permutation = np.asarray(permutation, int)

    if bs_hap_channel is None:
        cascade = 1.0 + 0.0j
    else:
        m = array_config.num_bs_antennas
        cascade = bs_hap_channel.gain * np.sqrt(m)

    k = np.arange(n)
    dft = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    f0 = cascade * dft[selected_rows][:, permutation]

    a0 = grid.dictionary()
    # E solves E @ A(0) = F(0); A(0) is square and well conditioned for a
    # sin-uniform grid.
    rows = np.linalg.solve(a0.T, f0.T).T

    phases = np.exp(1j * np.angle(np.where(rows == 0, 1.0, rows)))
    return MeasurementModel(
        grid=grid,
        effective_rows=rows,
        per_slot_ris_patterns=phases,
        cascade_scalar=complex(cascade),
        noise_variance=noise_variance,
        selected_rows=selected_rows,
        permutation=permutation,
    )


def assign_to_grid(grid: AngularGrid, instance: SparseChannelInstance) -> tuple[np.ndarray, np.ndarray]:
    """Place each true path on its nearest grid index.

    Returns (x_true, true_offsets), both length N.  Raises
    :class:`GridCollisionError` when two paths share an index.
    """
    n = grid.num_points
    x = np.zeros(n, complex)
    offsets = np.zeros(n)
    used: set[int] = set()
    for beta, omega in zip(instance.path_gains, instance.path_aods):
        idx = grid.nearest_index(omega)
        if idx in used:
            raise GridCollisionError(f"two paths map to grid index {idx}")
        used.add(idx)
        x[idx] = beta
        offsets[idx] = omega - grid.grid_points[idx]
    return x, offsets


def simulate_pilot_reception(
    model: MeasurementModel,
    instance: SparseChannelInstance,
    noise_variance: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received pilots y = E h + noise for the continuous multipath channel.

    Equivalent to F(true offsets) x_true when the paths occupy distinct
    grid bins, but defined for arbitrary instances.
    """
    if len(instance.dense_channel) != model.num_grid_points:
        raise ValueError("instance and measurement model disagree on N")
    y = model.effective_rows @ instance.dense_channel
    if noise_variance > 0:
        p = model.num_pilots
        noise = (rng.standard_normal(p) + 1j * rng.standard_normal(p)) * np.sqrt(noise_variance / 2)
        y = y + noise
    return y


def noise_variance_for_snr(model: MeasurementModel, instance: SparseChannelInstance, snr_db: float) -> float:
    """Noise variance giving the requested per-measurement estimation SNR.

    SNR is average received pilot energy per measurement over the noise
    variance: sigma_e^2 = ||E h||^2 / (P * 10^(SNR/10)).
    """
    energy = float(np.linalg.norm(model.effective_rows @ instance.dense_channel) ** 2)
    return energy / (model.num_pilots * 10 ** (snr_db / 10))
