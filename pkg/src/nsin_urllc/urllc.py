"""Finite-blocklength rate and decoding-error-probability machinery."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2))."""
    return 0.5 * special.erfc(x / np.sqrt(2))


def q_function_inv(p: float) -> float:
    """Inverse of :func:`q_function` on (0, 1)."""
    if not 0 < p < 1:
        raise ValueError("probability must lie in (0, 1)")
    return float(np.sqrt(2) * special.erfcinv(2 * p))


@dataclass(frozen=True)
class LinkBudget:
    """One finite-blocklength link: blocklength, packet size, SNR.

    Derived quantities: rate R = F/b, SNR threshold gamma = 2^R - 1, the
    linearization slope parameter chi, and the edges of the linear DEP
    region [snr_low, snr_up].
    """

    blocklength: int
    packet_bits: float
    snr: float

    def __post_init__(self):
        if self.blocklength < 1:
            raise ValueError("blocklength must be >= 1")
        if self.packet_bits <= 0:
            raise ValueError("packet size must be positive")

    @property
    def rate(self) -> float:
        return self.packet_bits / self.blocklength

    @property
    def gamma(self) -> float:
        return 2 ** self.rate - 1

    @property
    def chi(self) -> float:
        return np.sqrt(self.blocklength / (2 * np.pi)) / np.sqrt(2 ** (2 * self.rate) - 1)

    @property
    def snr_low(self) -> float:
        return self.gamma - 1 / self.chi

    @property
    def snr_up(self) -> float:
        return self.gamma + 1 / self.chi


def make_link_budget(blocklength: int, packet_bits: float, snr: float) -> LinkBudget:
    return LinkBudget(blocklength=int(blocklength), packet_bits=packet_bits, snr=snr)


def exact_dep(budget: LinkBudget) -> float:
    """Normal-approximation decoding error probability.

    Q( sqrt(b / (1 - (1+SNR)^-2)) * (log2(1+SNR) - R) * ln 2 )
    """
    snr = budget.snr
    if snr <= 0:
        raise ValueError("SNR must be positive")
    dispersion = 1 - (1 + snr) ** -2
    arg = np.sqrt(budget.blocklength / dispersion) * (np.log2(1 + snr) - budget.rate) * np.log(2)
    return q_function(arg)


def linearized_dep(budget: LinkBudget) -> float:
    """Piecewise-linear DEP approximation around SNR = gamma."""
    snr = budget.snr
    if snr <= budget.snr_low:
        return 1.0
    if snr >= budget.snr_up:
        return 0.0
    return 0.5 - (budget.chi / 2) * (snr - budget.gamma)


def expected_dep_rayleigh(budget: LinkBudget, mean_snr: float) -> float:
    """Expected DEP over exponential SNR fading, high-mean-SNR form.

    Returns 2 gamma / mean_snr clamped to [0, 1]; the approximation is
    accurate once mean_snr >> gamma.
    """
    if mean_snr <= 0:
        raise ValueError("mean SNR must be positive")
    return float(np.clip(2 * budget.gamma / mean_snr, 0.0, 1.0))


def expected_dep_monte_carlo(
    budget: LinkBudget,
    mean_snr: float,
    rng: np.random.Generator,
    num_samples: int = 10 ** 6,
) -> float:
    """Monte Carlo integration of the fading-averaged DEP.

    Estimates chi * integral of the exponential SNR CDF over the linear
    DEP window [snr_low, snr_up] by uniform sampling; converges to
    :func:`expected_dep_rayleigh` when mean_snr >> gamma.
    """
    if mean_snr <= 0:
        raise ValueError("mean SNR must be positive")
    lo = max(budget.snr_low, 0.0)
    hi = budget.snr_up
    x = rng.uniform(lo, hi, size=num_samples)
    cdf = 1 - np.exp(-x / mean_snr)
    return float(budget.chi * (hi - lo) * np.mean(cdf))


def overall_dep(dep_relay: float, dep_robot: float, use_bound: bool = False) -> float:
    """Two-hop decode-and-forward error probability.

    The exact form is eps_u + eps_k - eps_u * eps_k; ``use_bound`` returns
    the additive upper bound instead.
    """
    for eps in (dep_relay, dep_robot):
        if not 0 <= eps <= 1:
            raise ValueError("DEPs must lie in [0, 1]")
    if use_bound:
        return dep_relay + dep_robot
    return dep_relay + dep_robot - dep_relay * dep_robot


def mar(blocklength: int, snr: float, dep: float) -> tuple[float, bool]:
    """Maximum achievable rate under the normal approximation.

    R = log2(1+SNR) - sqrt((1 - (1+SNR)^-2)/b) * Qinv(dep) / ln 2.
    Returns (rate, short_block_flag); the flag is set when the blocklength
    is below the 50-symbol validity range of the approximation.
    """
    if snr <= 0:
        raise ValueError("SNR must be positive")
    if not 0 < dep < 1:
        raise ValueError("DEP must lie in (0, 1)")
    short = blocklength < 50
    dispersion = 1 - (1 + snr) ** -2
    rate = np.log2(1 + snr) - np.sqrt(dispersion / blocklength) * q_function_inv(dep) / np.log(2)
    return float(rate), short
