"""Recurrent orthogonal-AMP channel estimator.

Alternates a linear MMSE stage exploiting row-orthogonal pilots (Module A)
with a Bernoulli-Gaussian MMSE denoiser (Module B), exchanging extrinsic
Gaussian messages.  Prior hyperparameters are learned by EM, and the
dictionary's off-grid angle offsets are refined by gradient ascent on an
EM-style surrogate of the likelihood with backtracking line search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sparse_model import AngularGrid, MeasurementModel, SparsePrior

_TINY = 1e-30


class RoampDivergenceError(RuntimeError):
    """Raised when the message-passing recursion loses numerical validity."""


@dataclass
class RoampConfig:
    max_inner_iterations: int = 50
    inner_tolerance: float = 1e-6
    max_outer_iterations: int = 100
    outer_tolerance: float = 1e-6
    damping: float = 0.7
    em_updates: bool = True
    init_sparsity: float = 1 / 16
    init_gain_mean: complex = 0.0
    init_gain_variance: float = 1.0
    extrinsic_clamp_factor: float = 1e8
    armijo_initial_step: float = 1.0
    armijo_shrink: float = 0.5
    armijo_slope: float = 1e-3
    min_step: float = 1e-12
    support_threshold: float = 0.5
    refine_offsets: bool = True
    collect_trace: bool = False


@dataclass
class PosteriorEstimate:
    """Output of a full estimator run."""

    x_hat: np.ndarray
    posterior_variance: float
    support_posterior: np.ndarray
    refined_offsets: np.ndarray
    reconstructed_channel: np.ndarray
    prior: SparsePrior
    inner_iterations: int
    outer_iterations: int
    trace: list = field(default_factory=list)


def module_a_lmmse(x_pri, v_pri, y, f_matrix, noise_variance, aspect_ratio=None):
    """LMMSE update for a sensing matrix with orthonormal rows.

    ``aspect_ratio`` is P/N; the posterior variance follows the
    divergence-free recursion v_post = v - (P/N) v^2 / (v + sigma^2).
    """
    if v_pri <= 0:
        raise RoampDivergenceError(f"non-positive prior variance {v_pri}")
    p, n = f_matrix.shape
    ratio = p / n if aspect_ratio is None else aspect_ratio
    gain = v_pri / (v_pri + noise_variance)
    x_post = x_pri + gain * (f_matrix.conj().T @ (y - f_matrix @ x_pri))
    v_post = v_pri - ratio * v_pri ** 2 / (v_pri + noise_variance)
    if v_post <= 0:
        v_post = _TINY
    return x_post, v_post


def extrinsic(post_mean, post_var, pri_mean, pri_var, clamp_factor=1e8):
    """Gaussian division: remove the prior message from the posterior.

    When the posterior is not sharper than the prior the division is
    undefined; the variance is clamped large and the mean passed through,
    a standard turbo-estimation safeguard.
    """
    inv = 1 / post_var - 1 / pri_var
    if inv <= 0:
        return np.copy(post_mean) if np.ndim(post_mean) else post_mean, clamp_factor * post_var
    ext_var = 1 / inv
    ext_mean = ext_var * (post_mean / post_var - pri_mean / pri_var)
    return ext_mean, ext_var


def module_b_mmse(x_pri, v_pri, prior: SparsePrior):
    """Per-index MMSE denoising under the spike-and-slab prior.

    Returns (x_post, v_post, support_prob, cond_means, cond_var) where
    cond_means/cond_var describe the slab-conditional posterior.
    """
    v = max(v_pri, _TINY)
    lam = prior.sparsity
    zeta = prior.gain_mean
    rho = prior.gain_variance
    # log weights of the two mixture components of the marginal of x_pri
    log_slab = np.log(lam) - np.log(np.pi * (v + rho)) - np.abs(x_pri - zeta) ** 2 / (v + rho)
    log_spike = np.log1p(-lam) - np.log(np.pi * v) - np.abs(x_pri) ** 2 / v
    pi = 1 / (1 + np.exp(np.clip(log_spike - log_slab, -700, 700)))
    cond_mean = (rho * x_pri + v * zeta) / (v + rho)
    cond_var = v * rho / (v + rho)
    x_post = pi * cond_mean
    per_index_var = pi * cond_var + pi * (1 - pi) * np.abs(cond_mean) ** 2
    v_post = max(float(np.mean(per_index_var)), _TINY)
    return x_post, v_post, pi, cond_mean, cond_var


def em_update(pi, cond_means, cond_var, previous: SparsePrior) -> SparsePrior:
    """Hyperparameter re-estimation from the Module-B posterior."""
    mass = float(np.sum(pi))
    if mass <= 0:
        return previous
    lam = float(np.clip(np.mean(pi), 1e-6, 1 - 1e-6))
    zeta = complex(np.sum(pi * cond_means) / mass)
    rho = float(np.sum(pi * (np.abs(cond_means - zeta) ** 2 + cond_var)) / mass)
    return SparsePrior(sparsity=lam, gain_mean=zeta, gain_variance=max(rho, 1e-20))


def surrogate_value(y, effective_rows, grid: AngularGrid, offsets, x_post, v_post, noise_variance):
    """EM surrogate of the offset likelihood (up to an additive constant).

    r = -(||y - F(offsets) x||^2 + v * ||F(offsets)||_F^2) / sigma^2
    """
    f = effective_rows @ grid.dictionary(offsets)
    sigma = max(noise_variance, _TINY)
    return float(-(np.linalg.norm(y - f @ x_post) ** 2 + v_post * np.linalg.norm(f) ** 2) / sigma)


def offset_gradient(y, effective_rows, grid: AngularGrid, offsets, x_post, v_post, noise_variance):
    """Gradient of :func:`surrogate_value` w.r.t. each offset."""
    sigma = max(noise_variance, _TINY)
    f = effective_rows @ grid.dictionary(offsets)
    b = effective_rows @ grid.dictionary_derivative(offsets)
    r = y - f @ x_post
    bf = np.sum(b.conj() * f, axis=0)
    br = b.conj().T @ r
    phi1 = -(np.abs(x_post) ** 2 + v_post) / sigma
    return 2 * np.real(bf) * phi1 + (2 / sigma) * np.real(np.conj(x_post) * br + np.abs(x_post) ** 2 * bf)


def offset_step(
    y,
    effective_rows,
    grid: AngularGrid,
    offsets,
    x_post,
    v_post,
    noise_variance,
    gradient,
    config: RoampConfig | None = None,
):
    """Backtracking (Armijo) ascent step on the surrogate, with clipping.

    Offsets stay within half the local grid spacing.  Returns
    (new_offsets, accepted); on line-search exhaustion the offsets are
    returned unchanged with accepted=False.
    """
    cfg = config or RoampConfig()
    g = np.asarray(gradient, float)
    if not np.all(np.isfinite(g)):
        raise RoampDivergenceError("non-finite offset gradient")
    gnorm2 = float(g @ g)
    if gnorm2 == 0:
        return offsets, True
    base = surrogate_value(y, effective_rows, grid, offsets, x_post, v_post, noise_variance)
    step = cfg.armijo_initial_step
    while step >= cfg.min_step:
        cand = np.clip(offsets + step * g, -grid.half_spacing, grid.half_spacing)
        val = surrogate_value(y, effective_rows, grid, cand, x_post, v_post, noise_variance)
        if val >= base + cfg.armijo_slope * step * gnorm2:
            return cand, True
        step *= cfg.armijo_shrink
    return offsets, False


def _masked_step(y, rows, grid, offsets, x, v, sigma, gradient, mask, cfg, f_cache):
    """Line search touching only masked columns; updates f_cache in place."""
    g = np.where(mask, gradient, 0.0)
    gnorm2 = float(g @ g)
    if gnorm2 == 0 or not np.any(mask):
        return offsets, False
    idx = np.flatnonzero(mask)
    tr_all = np.sum(np.abs(f_cache) ** 2)
    resid_base = y - f_cache @ x
    base = -(np.linalg.norm(resid_base) ** 2 + v * tr_all) / sigma

    def value_at(cand_offsets):
        angles = grid.grid_points[idx] + cand_offsets[idx]
        m = np.arange(grid.num_points)[:, None]
        cols = np.exp(-2j * np.pi * m * grid.spacing * np.sin(angles)[None, :])
        f_cols = rows @ cols
        tr = tr_all - np.sum(np.abs(f_cache[:, idx]) ** 2) + np.sum(np.abs(f_cols) ** 2)
        resid = resid_base + (f_cache[:, idx] - f_cols) @ x[idx]
        return float(-(np.linalg.norm(resid) ** 2 + v * tr) / sigma), f_cols

    step = cfg.armijo_initial_step
    while step >= cfg.min_step:
        cand = np.clip(offsets + step * g, -grid.half_spacing, grid.half_spacing)
        val, f_cols = value_at(cand)
        if val >= base + cfg.armijo_slope * step * gnorm2:
            f_cache[:, idx] = f_cols
            return cand, True
        step *= cfg.armijo_shrink
    return offsets, False


def run_roamp(y, model: MeasurementModel, config: RoampConfig | None = None) -> PosteriorEstimate:
    """Full estimator: message passing, EM, and off-grid refinement.

    ``y`` is the received pilot vector; the measurement model supplies the
    effective sensing rows, cascade scalar, and noise variance.  Raises
    :class:`RoampDivergenceError` on numerical failure.
    """
    cfg = config or RoampConfig()
    grid = model.grid
    c = model.cascade_scalar
    rows = model.effective_rows / c
    yn = np.asarray(y, complex) / c
    sigma = max(model.noise_variance / abs(c) ** 2, _TINY)
    n = grid.num_points
    p = model.num_pilots

    prior = SparsePrior(cfg.init_sparsity, cfg.init_gain_mean, cfg.init_gain_variance)
    offsets = np.zeros(n)
    x_pri_a = np.zeros(n, complex)
    v_pri_a = prior.sparsity * prior.gain_variance
    x_pri_b = None
    f = rows @ grid.dictionary(offsets)

    x_post_b = np.zeros(n, complex)
    v_post_b = v_pri_a
    pi = np.full(n, prior.sparsity)
    trace: list = []
    total_inner = 0
    outer = 0

    for outer in range(1, cfg.max_outer_iterations + 1):
        prev_post = None
        for _ in range(cfg.max_inner_iterations):
            total_inner += 1
            x_post_a, v_post_a = module_a_lmmse(x_pri_a, v_pri_a, yn, f, sigma, aspect_ratio=p / n)
            cand_mean, v_pri_b = extrinsic(x_post_a, v_post_a, x_pri_a, v_pri_a, cfg.extrinsic_clamp_factor)
            if x_pri_b is None:
                x_pri_b = cand_mean
            else:
                x_pri_b = cfg.damping * cand_mean + (1 - cfg.damping) * x_pri_b

            x_post_b, v_post_b, pi, cond_means, cond_var = module_b_mmse(x_pri_b, v_pri_b, prior)
            if cfg.em_updates:
                prior = em_update(pi, cond_means, cond_var, prior)

            cand_mean, v_pri_a_new = extrinsic(x_post_b, v_post_b, x_pri_b, v_pri_b, cfg.extrinsic_clamp_factor)
            x_pri_a = cfg.damping * cand_mean + (1 - cfg.damping) * x_pri_a
            v_pri_a = v_pri_a_new

            if not (np.all(np.isfinite(x_post_b)) and np.isfinite(v_post_b) and np.isfinite(v_pri_a)):
                raise RoampDivergenceError(
                    f"divergence at inner iteration {total_inner}: "
                    f"v_post_a={v_post_a:.3e} v_post_b={v_post_b:.3e}"
                )
            if cfg.collect_trace:
                trace.append({
                    "inner": total_inner,
                    "outer": outer,
                    "v_post_a": v_post_a,
                    "v_post_b": v_post_b,
                })
            if prev_post is not None:
                denom = np.linalg.norm(x_post_b)
                if denom > 0 and np.linalg.norm(x_post_b - prev_post) / denom < cfg.inner_tolerance:
                    break
            prev_post = x_post_b.copy()

        if not cfg.refine_offsets:
            break
        grad = offset_gradient(yn, rows, grid, offsets, x_post_b, v_post_b, sigma)
        mask = pi > cfg.support_threshold
        new_offsets, accepted = _masked_step(
            yn, rows, grid, offsets, x_post_b, v_post_b, sigma, grad, mask, cfg, f
        )
        change = float(np.max(np.abs(new_offsets - offsets))) if accepted else 0.0
        offsets = new_offsets
        if cfg.collect_trace:
            trace.append({"outer": outer, "offsets": offsets.copy(), "accepted": accepted})
        if not accepted or change < cfg.outer_tolerance:
            break

    return PosteriorEstimate(
        x_hat=x_post_b,
        posterior_variance=v_post_b,
        support_posterior=pi,
        refined_offsets=offsets,
        reconstructed_channel=grid.dictionary(offsets) @ x_post_b,
        prior=prior,
        inner_iterations=total_inner,
        outer_iterations=outer,
        trace=trace,
    )
