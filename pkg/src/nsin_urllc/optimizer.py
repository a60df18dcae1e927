"""Two-layer energy-efficiency resource optimization (PTPB).

The BS layer picks transmit power in closed form and the BS blocklength
exhaustively; the UAV layer alternates a Dinkelbach fractional power
control (1-D concave inner maximization via golden-section search) with
independent per-robot blocklength searches.  MTP and MBL baseline modes
pin powers or blocklengths at their maxima.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ArrayConfig, BsHapChannel, Scenario, SparseChannelInstance, UtgChannel
from .ris_phase import align_phases, cascade_snr, mrt_precoder
from .urllc import LinkBudget, linearized_dep, make_link_budget

_GOLDEN = (np.sqrt(5) - 1) / 2


class InfeasibleError(RuntimeError):
    """The QoS constraints admit no decision; message names the binding part."""


@dataclass(frozen=True)
class ResourceDecision:
    bs_power: float
    uav_power: float
    bs_blocklength: int
    robot_blocklengths: np.ndarray
    bs_power_budget: float
    uav_power_budget: float

    @property
    def normalized_bs_power(self) -> float:
        return self.bs_power / self.bs_power_budget

    @property
    def normalized_uav_power(self) -> float:
        return self.uav_power / self.uav_power_budget


@dataclass(frozen=True)
class EEOutcome:
    per_robot_ee: np.ndarray
    min_ee: float
    eps_u_normalized: float
    eps_k_normalized: np.ndarray
    rate_bs: float
    rates_robot: np.ndarray
    constraints_ok: bool
    constraint_report: dict = field(default_factory=dict)


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Argmax of a unimodal (concave) function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def _uav_gamma(blocklength: int, scenario: Scenario) -> float:
    return 2 ** (scenario.bs_packet_bits / blocklength) - 1


def _robot_gamma(blocklength: int, scenario: Scenario) -> float:
    return 2 ** (scenario.robot_packet_bits / blocklength) - 1


def bs_power_closed_form(bs_blocklength: int, delta_b: float, scenario: Scenario) -> float:
    """Minimum power that drives the linearized BS-hop DEP to zero.

    P_b = min(P_B, SNR_up / delta_b); raises when even the full budget
    violates the UAV DEP threshold.
    """
    if delta_b <= 0:
        raise ValueError("delta_b must be positive")
    budget = make_link_budget(bs_blocklength, scenario.bs_packet_bits, 1.0)
    p_b = min(scenario.bs_power_budget, budget.snr_up / delta_b)
    eps = linearized_dep(make_link_budget(bs_blocklength, scenario.bs_packet_bits, p_b * delta_b))
    if eps > scenario.dep_threshold_uav:
        raise InfeasibleError(
            f"BS hop infeasible at blocklength {bs_blocklength}: "
            f"DEP {eps:.3e} > threshold {scenario.dep_threshold_uav:.1e} at full power"
        )
    return p_b


def _robot_terms(scenario: Scenario, utg_channels: list[UtgChannel],
                 robot_blocklengths: np.ndarray, uav_power: float) -> tuple[np.ndarray, np.ndarray]:
    """Rates and threshold-normalized expected DEPs, one entry per robot."""
    rates = scenario.robot_packet_bits / np.asarray(robot_blocklengths, float)
    gammas = 2 ** rates - 1
    mean_snr = uav_power * np.array([ch.mean_snr_per_watt for ch in utg_channels])
    eps = np.clip(2 * gammas / mean_snr, 0.0, 1.0)
    return rates, eps / scenario.dep_threshold_robot


def _ee_value(rate_bs, eps_u_norm, rates_robot, eps_k_norm, p_bar_b, p_bar_u) -> np.ndarray:
    return (rate_bs * (1 - eps_u_norm) + rates_robot * (1 - eps_k_norm)) / (p_bar_b + p_bar_u)


def bs_blocklength_search(
    delta_b: float,
    scenario: Scenario,
    utg_channels: list[UtgChannel],
    robot_blocklengths: np.ndarray,
    uav_power: float,
    fixed_bs_power: float | None = None,
) -> tuple[int, float]:
    """Exhaustive integer search of the BS blocklength.

    For each candidate the BS power is the closed-form optimum (or the
    pinned value for the MTP baseline); ties go to the smaller
    blocklength.  Returns (blocklength, power).
    """
    p_bar_u = uav_power / scenario.uav_power_budget
    rates_k, eps_k_norm = _robot_terms(scenario, utg_channels, robot_blocklengths, uav_power)
    robot_floor = float(np.min(rates_k * (1 - eps_k_norm)))

    best = None
    for b_u in range(scenario.bs_blocklength_min, scenario.bs_blocklength_max + 1):
        if fixed_bs_power is None:
            try:
                p_b = bs_power_closed_form(b_u, delta_b, scenario)
            except InfeasibleError:
                continue
        else:
            p_b = fixed_bs_power
        budget = make_link_budget(b_u, scenario.bs_packet_bits, p_b * delta_b)
        eps_u = linearized_dep(budget)
        if eps_u > scenario.dep_threshold_uav:
            continue
        eps_u_norm = eps_u / scenario.dep_threshold_uav
        value = (budget.rate * (1 - eps_u_norm) + robot_floor) / (p_b / scenario.bs_power_budget + p_bar_u)
        if best is None or value > best[0]:
            best = (value, b_u, p_b)
    if best is None:
        raise InfeasibleError("no feasible BS blocklength in the configured range")
    return best[1], best[2]


def uav_power_dinkelbach(
    scenario: Scenario,
    utg_channels: list[UtgChannel],
    robot_blocklengths: np.ndarray,
    rate_bs: float,
    eps_u_norm: float,
    p_bar_b: float,
    tol: float = 1e-3,
    max_iterations: int = 50,
) -> tuple[float, float, float]:
    """Dinkelbach power control for the UAV hop.

    Each parametric subproblem max_p min_k V_k(p) - eta * S(p) is concave
    in the normalized power and solved by golden-section search.  Returns
    (uav_power, subtractive_optimum_y, energy_efficiency).
    """
    gammas = np.array([_robot_gamma(b, scenario) for b in robot_blocklengths])
    mean_per_watt = np.array([ch.mean_snr_per_watt for ch in utg_channels])
    # kappa_k / p_bar is the threshold-normalized expected DEP of robot k
    kappa = 2 * gammas / (mean_per_watt * scenario.uav_power_budget * scenario.dep_threshold_robot)
    p_min = float(np.max(kappa))
    if p_min > 1:
        worst = int(np.argmax(kappa))
        raise InfeasibleError(
            f"UAV hop infeasible: robot {worst} needs normalized power {p_min:.3f} > 1"
        )
    p_min = max(p_min, 1e-12)
    rates_k = scenario.robot_packet_bits / np.asarray(robot_blocklengths, float)
    base = rate_bs * (1 - eps_u_norm)

    def min_numerator(p_bar: float) -> float:
        return float(np.min(base + rates_k * (1 - kappa / p_bar)))

    eta = 0.0
    y = 0.0
    p_star = 1.0
    for _ in range(max_iterations):
        def subtractive(p_bar, eta=eta):
            return min_numerator(p_bar) - eta * (p_bar_b + p_bar)

        p_star = golden_section_max(subtractive, p_min, 1.0)
        for edge in (p_min, 1.0):
            if subtractive(edge) > subtractive(p_star):
                p_star = edge
        y_new = subtractive(p_star)
        eta = min_numerator(p_star) / (p_bar_b + p_star)
        if abs(y_new - y) <= tol and abs(y_new) <= tol:
            y = y_new
            break
        y = y_new
    return p_star * scenario.uav_power_budget, y, eta


def robot_blocklength_search(uav_power: float, utg_channel: UtgChannel, scenario: Scenario) -> int:
    """Exhaustive integer search of one robot's blocklength.

    Maximizes R_k (1 - normalized expected DEP) subject to the DEP
    threshold; ties go to the smaller blocklength.
    """
    b = np.arange(scenario.robot_blocklength_min, scenario.robot_blocklength_max + 1)
    rates = scenario.robot_packet_bits / b
    gammas = 2 ** rates - 1
    mean_snr = uav_power * utg_channel.mean_snr_per_watt
    eps = 2 * gammas / mean_snr
    feasible = eps <= scenario.dep_threshold_robot
    if not np.any(feasible):
        raise InfeasibleError("no feasible robot blocklength in the configured range")
    objective = np.where(feasible, rates * (1 - eps / scenario.dep_threshold_robot), -np.inf)
    return int(b[np.argmax(objective)])  # argmax returns the first (smallest) maximizer


def verify_constraints(
    decision: ResourceDecision,
    scenario: Scenario,
    utg_channels: list[UtgChannel],
    delta_b: float,
) -> dict:
    """Re-check every constraint of the joint problem on a decision."""
    report = {}
    budget = make_link_budget(decision.bs_blocklength, scenario.bs_packet_bits,
                              decision.bs_power * delta_b)
    report["uav_dep"] = linearized_dep(budget) <= scenario.dep_threshold_uav
    _, eps_k_norm = _robot_terms(scenario, utg_channels, decision.robot_blocklengths, decision.uav_power)
    report["robot_dep"] = bool(np.all(eps_k_norm <= 1 + 1e-12))
    report["bs_blocklength"] = (
        scenario.bs_blocklength_min <= decision.bs_blocklength <= scenario.bs_blocklength_max
    )
    b_k = np.asarray(decision.robot_blocklengths)
    report["robot_blocklengths"] = bool(
        np.all((b_k >= scenario.robot_blocklength_min) & (b_k <= scenario.robot_blocklength_max))
        and np.all(b_k == b_k.astype(int))
    )
    report["bs_power"] = 0 < decision.bs_power <= scenario.bs_power_budget
    report["uav_power"] = 0 < decision.uav_power <= scenario.uav_power_budget + 1e-12
    return report


def run_ptpb(
    scenario: Scenario,
    array_config: ArrayConfig,
    bs_hap: BsHapChannel,
    instance: SparseChannelInstance,
    utg_channels: list[UtgChannel],
    mode: str = "ptpb",
    estimated_paths: tuple[np.ndarray, np.ndarray] | None = None,
    max_uav_rounds: int = 100,
    max_layer_rounds: int = 20,
) -> tuple[ResourceDecision, EEOutcome]:
    """Full joint pipeline: phase alignment, BS layer, UAV layer.

    The two layers alternate until the decision is stable, so the BS
    blocklength is chosen against the converged UAV power rather than its
    initial guess.  ``mode`` selects the proposed algorithm ("ptpb") or
    the baselines ("mtp": powers pinned at budget, "mbl": blocklengths
    pinned at maximum).  ``estimated_paths`` = (gains, aods) makes the
    alignment use estimator output instead of the true multipath
    decomposition.
    """
    if mode not in ("ptpb", "mtp", "mbl"):
        raise ValueError(f"unknown mode {mode!r}")
    gains, aods = estimated_paths if estimated_paths is not None else (
        instance.path_gains, instance.path_aods)
    precoder = mrt_precoder(bs_hap, array_config)
    phases = align_phases(gains, aods, bs_hap.aoa, array_config)
    cascade = cascade_snr(instance.dense_channel, phases, bs_hap, precoder, scenario.bs_power_budget,
                          scenario.antenna_gain, scenario.noise_power_uav)
    delta_b = cascade.delta_b

    k = scenario.num_robots
    b_robot = np.full(k, scenario.robot_blocklength_max, int)
    uav_power = scenario.uav_power_budget
    b_u = p_b = None

    for _ in range(max_layer_rounds):
        # BS layer
        if mode == "mbl":
            b_u_new = scenario.bs_blocklength_max
            p_b_new = bs_power_closed_form(b_u_new, delta_b, scenario)
        elif mode == "mtp":
            p_b_new = scenario.bs_power_budget
            b_u_new, _ = bs_blocklength_search(delta_b, scenario, utg_channels, b_robot,
                                               uav_power, fixed_bs_power=p_b_new)
        else:
            b_u_new, p_b_new = bs_blocklength_search(delta_b, scenario, utg_channels,
                                                     b_robot, uav_power)
        bs_converged = b_u_new == b_u and p_b is not None and abs(p_b_new - p_b) <= 1e-12
        b_u, p_b = b_u_new, p_b_new

        bs_budget = make_link_budget(b_u, scenario.bs_packet_bits, p_b * delta_b)
        eps_u = linearized_dep(bs_budget)
        eps_u_norm = eps_u / scenario.dep_threshold_uav
        p_bar_b = p_b / scenario.bs_power_budget

        # UAV layer: alternate power control and blocklength search
        for _ in range(max_uav_rounds):
            if mode == "mtp":
                uav_power_new = scenario.uav_power_budget
            else:
                uav_power_new, _, _ = uav_power_dinkelbach(
                    scenario, utg_channels, b_robot, bs_budget.rate, eps_u_norm, p_bar_b)
            if mode == "mbl":
                b_new = np.full(k, scenario.robot_blocklength_max, int)
            else:
                b_new = np.array([
                    robot_blocklength_search(uav_power_new, ch, scenario) for ch in utg_channels
                ])
            converged = np.array_equal(b_new, b_robot) and abs(uav_power_new - uav_power) <= 1e-9
            b_robot, uav_power = b_new, uav_power_new
            if converged:
                break
        if bs_converged:
            break

    decision = ResourceDecision(
        bs_power=p_b,
        uav_power=uav_power,
        bs_blocklength=b_u,
        robot_blocklengths=b_robot,
        bs_power_budget=scenario.bs_power_budget,
        uav_power_budget=scenario.uav_power_budget,
    )
    rates_k, eps_k_norm = _robot_terms(scenario, utg_channels, b_robot, uav_power)
    per_robot = _ee_value(bs_budget.rate, eps_u_norm, rates_k, eps_k_norm,
                          decision.normalized_bs_power, decision.normalized_uav_power)
    report = verify_constraints(decision, scenario, utg_channels, delta_b)
    outcome = EEOutcome(
        per_robot_ee=per_robot,
        min_ee=float(np.min(per_robot)),
        eps_u_normalized=eps_u_norm,
        eps_k_normalized=eps_k_norm,
        rate_bs=bs_budget.rate,
        rates_robot=rates_k,
        constraints_ok=all(report.values()),
        constraint_report=report,
    )
    if not outcome.constraints_ok:
        raise InfeasibleError(f"returned decision violates constraints: {report}")
    return decision, outcome
