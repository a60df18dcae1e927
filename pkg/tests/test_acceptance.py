"""End-to-end acceptance checks.

Each test covers one release criterion and prints a single PASS/FAIL
summary line in addition to the usual pytest verdict.
"""

import numpy as np

from nsin_urllc.channels import UtgChannel
from nsin_urllc.cli import EXIT_OK, main
from nsin_urllc.config import default_array_config, default_scenario
from nsin_urllc.harness import DEFAULT_SWEEPS, ExperimentSpec, run_experiment, write_csv
from nsin_urllc.optimizer import InfeasibleError, run_ptpb, uav_power_dinkelbach
from nsin_urllc.ris_phase import coherent_gain_closed_form, weighted_median_angle
from nsin_urllc.roamp import module_a_lmmse, offset_gradient, surrogate_value
from nsin_urllc.sparse_model import build_grid
from nsin_urllc.urllc import exact_dep, expected_dep_monte_carlo, make_link_budget, mar


def _report(label: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"\n{tag}: {label}{suffix}")
    assert ok, f"{label}{suffix}"


def _rows_by_method(result, method):
    return {r["sweep"]: r["value"] for r in result.rows if r["method"] == method}


def test_acceptance_1_oracle_equivalences():
    rng = np.random.default_rng(0)
    checks = []

    # linear estimator update vs explicit matrix-inversion form
    worst = 0.0
    for _ in range(50):
        p, n = 8, 16
        q, _ = np.linalg.qr(rng.standard_normal((n, p)) + 1j * rng.standard_normal((n, p)))
        f = q.conj().T
        x_pri = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = float(rng.uniform(0.1, 2.0))
        sigma = float(rng.uniform(0.01, 1.0))
        y = f @ (rng.standard_normal(n) + 1j * rng.standard_normal(n)) + 0.1 * rng.standard_normal(p)
        x_post, _ = module_a_lmmse(x_pri, v, y, f, sigma)
        direct = x_pri + v * f.conj().T @ np.linalg.solve(
            v * (f @ f.conj().T) + sigma * np.eye(p), y - f @ x_pri)
        worst = max(worst, float(np.max(np.abs(x_post - direct))))
    checks.append(("lmmse", worst < 1e-10))

    # offset-likelihood gradient vs central finite differences
    worst = 0.0
    for _ in range(20):
        grid = build_grid(16)
        rows = rng.standard_normal((8, 16)) + 1j * rng.standard_normal((8, 16))
        off = rng.uniform(-0.005, 0.005, 16)
        x = (rng.standard_normal(16) + 1j * rng.standard_normal(16)) * (rng.random(16) < 0.3)
        v = float(rng.uniform(1e-4, 0.1))
        sigma = float(rng.uniform(0.01, 1.0))
        y = rows @ grid.dictionary(off) @ x + 0.1 * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
        g = offset_gradient(y, rows, grid, off, x, v, sigma)
        h = 1e-6
        fd = np.empty(16)
        for i in range(16):
            e = np.zeros(16)
            e[i] = h
            fd[i] = (surrogate_value(y, rows, grid, off + e, x, v, sigma)
                     - surrogate_value(y, rows, grid, off - e, x, v, sigma)) / (2 * h)
        scale = max(np.max(np.abs(fd)), 1.0)
        worst = max(worst, float(np.max(np.abs(g - fd)) / scale))
    checks.append(("offset-gradient", worst < 1e-4))

    # coherent-gain closed form vs direct phasor summation
    ok = coherent_gain_closed_form(0.0, 128) == 128 ** 2
    for _ in range(50):
        dx = float(rng.uniform(-2, 2))
        n = int(rng.integers(2, 256))
        direct = abs(np.sum(np.exp(1j * np.pi * np.arange(n) * dx))) ** 2
        ok = ok and abs(coherent_gain_closed_form(dx, n) - direct) <= 1e-10 * max(direct, 1.0)
    checks.append(("coherent-gain", ok))

    # weighted-median alignment vs dense grid minimization
    ok = True
    grid_pts = np.linspace(0, np.pi / 2, 100_001)
    for _ in range(100):
        k = int(rng.integers(2, 9))
        angles = np.sort(rng.uniform(0, np.pi / 2, k))
        weights = rng.uniform(0.01, 1.0, k)
        wm = weighted_median_angle(angles, weights)
        obj = np.sum(weights[None, :] * np.abs(angles[None, :] - grid_pts[:, None]), axis=1)
        ok = ok and np.sum(weights * np.abs(angles - wm)) <= obj.min() + 1e-9
    checks.append(("weighted-median", ok))

    # fractional power control vs brute-force grid
    sc = default_scenario()
    ok = True
    tested = 0
    for _ in range(50):
        k = int(rng.integers(1, 8))
        utg = [UtgChannel(1.0, 1.0 + 0j, float(rng.uniform(1e7, 1e9))) for _ in range(k)]
        b_robot = rng.integers(100, 1001, k)
        rate_bs = float(rng.uniform(0.05, 0.5))
        eps_u = float(rng.uniform(0, 1))
        p_bar_b = float(rng.uniform(0.01, 1))
        try:
            _, y, eta = uav_power_dinkelbach(sc, utg, b_robot, rate_bs, eps_u, p_bar_b)
        except InfeasibleError:
            continue
        tested += 1
        rates_k = sc.robot_packet_bits / b_robot
        kappa = 2 * (2 ** rates_k - 1) / (
            np.array([c.mean_snr_per_watt for c in utg]) * sc.uav_power_budget
            * sc.dep_threshold_robot)
        grid1 = np.linspace(max(np.max(kappa), 1e-12), 1.0, 100_001)
        numer = rate_bs * (1 - eps_u) + np.min(
            rates_k[:, None] * (1 - kappa[:, None] / grid1[None, :]), axis=0)
        best = float(np.max(numer / (p_bar_b + grid1)))
        ok = ok and abs(y) <= 1e-3 and abs(eta - best) <= 1e-3 * max(abs(best), 1.0)
    checks.append(("dinkelbach", ok and tested >= 30))

    # achievable-rate / decoding-error-probability round trip
    ok = True
    for _ in range(100):
        b = int(rng.integers(100, 1000))
        snr = float(rng.uniform(0.1, 10.0))
        eps = float(rng.uniform(1e-6, 0.4))
        rate, _ = mar(b, snr, eps)
        if rate > 0:
            ok = ok and abs(exact_dep(make_link_budget(b, rate * b, snr)) - eps) <= 1e-9
    checks.append(("mar-dep-roundtrip", ok))

    failed = [name for name, good in checks if not good]
    _report("criterion 1: oracle equivalences", not failed,
            f"failed: {failed}" if failed else "6/6 exact checks")


def test_acceptance_2_estimation_trends():
    scenario = default_scenario(rng_seed=0)
    arrays = default_array_config()
    snr_spec = ExperimentSpec(kind="nmse_vs_snr", sweep=DEFAULT_SWEEPS["nmse_vs_snr"],
                              scenario=scenario, array_config=arrays, trials=200)
    result = run_experiment(snr_spec)
    roamp = _rows_by_method(result, "roamp")
    omp_v = _rows_by_method(result, "omp")
    sp_v = _rows_by_method(result, "sp")
    snrs = list(snr_spec.sweep)

    decreasing = all(roamp[b] < roamp[a] for a, b in zip(snrs, snrs[1:]))
    never_worse = all(roamp[s] <= omp_v[s] and roamp[s] <= sp_v[s] for s in snrs)
    margin = min(min(omp_v[s], sp_v[s]) - roamp[s] for s in snrs if s >= 8.0)

    pilot_spec = ExperimentSpec(kind="nmse_vs_pilots", sweep=(30, 70), scenario=scenario,
                                array_config=arrays, trials=200, snr_db=15.0)
    pilots = _rows_by_method(run_experiment(pilot_spec), "roamp")
    pilot_drop = pilots[30] - pilots[70]

    ok = decreasing and never_worse and margin >= 1.0 and pilot_drop >= 10.0
    _report("criterion 2: estimation trends", ok,
            f"monotone={decreasing}, never_worse={never_worse}, "
            f"margin={margin:.2f} dB, pilot_drop={pilot_drop:.2f} dB")


def test_acceptance_3_phase_alignment():
    scenario = default_scenario(rng_seed=0)
    arrays = default_array_config()
    spec = ExperimentSpec(kind="gain_vs_N", sweep=DEFAULT_SWEEPS["gain_vs_N"],
                          scenario=scenario, array_config=arrays, trials=200)
    result = run_experiment(spec)
    aligned = _rows_by_method(result, "aligned")
    exhaustive = _rows_by_method(result, "exhaustive")
    random_v = _rows_by_method(result, "random")
    zero_v = _rows_by_method(result, "zero")
    ns = list(spec.sweep)

    baseline_gap = min(min(aligned[n] - random_v[n], aligned[n] - zero_v[n]) for n in ns)
    exhaustive_gap = max(exhaustive[n] - aligned[n] for n in ns)
    monotone = all(aligned[b] >= aligned[a] for a, b in zip(ns, ns[1:]))

    ok = baseline_gap >= 15.0 and exhaustive_gap <= 3.0 and monotone
    _report("criterion 3: phase alignment", ok,
            f"baseline_gap={baseline_gap:.2f} dB, exhaustive_gap={exhaustive_gap:.2f} dB, "
            f"monotone={monotone}")


def test_acceptance_4_resource_optimization():
    arrays = default_array_config()
    dominance_ok = True
    detail = []
    improvement = None
    for eps in (5e-5, 5e-6):
        scenario = default_scenario(rng_seed=0, dep_threshold_uav=eps, dep_threshold_robot=eps)
        for kind in ("ee_vs_N", "ee_vs_Pu"):
            spec = ExperimentSpec(kind=kind, sweep=DEFAULT_SWEEPS[kind], scenario=scenario,
                                  array_config=arrays, trials=200)
            result = run_experiment(spec)
            ptpb = _rows_by_method(result, "ptpb")
            mtp = _rows_by_method(result, "mtp")
            mbl = _rows_by_method(result, "mbl")
            worst = min(min(ptpb[s] - mtp[s], ptpb[s] - mbl[s]) for s in spec.sweep)
            dominance_ok = dominance_ok and worst >= -1e-9
            detail.append(f"{kind}@eps={eps:g}: min gap {worst:.3g}")
            if eps == 5e-6 and kind == "ee_vs_Pu":
                improvement = (ptpb[0.5] - mtp[0.5]) / mtp[0.5]

    # explicit constraint re-verification on freshly solved instances
    from nsin_urllc.channels import make_bs_hap_channel, sample_hap_uav_channel, sample_utg_channels

    constraints_ok = True
    for eps in (5e-5, 5e-6):
        scenario = default_scenario(rng_seed=0, dep_threshold_uav=eps, dep_threshold_robot=eps)
        bs_hap = make_bs_hap_channel(scenario, arrays)
        for seed in range(10):
            rng = np.random.default_rng(seed)
            inst = sample_hap_uav_channel(scenario, arrays, rng)
            utg = sample_utg_channels(scenario, rng)
            _, outcome = run_ptpb(scenario, arrays, bs_hap, inst, utg)
            constraints_ok = constraints_ok and all(outcome.constraint_report.values())

    ok = dominance_ok and improvement is not None and improvement >= 0.20 and constraints_ok
    _report("criterion 4: resource optimization", ok,
            f"{'; '.join(detail)}; improvement_over_mtp={improvement:.1%}, "
            f"constraints_ok={constraints_ok}")


def test_acceptance_5_dep_model():
    rng = np.random.default_rng(0)
    worst = 0.0
    for budget in (make_link_budget(500, 500, 1.0), make_link_budget(800, 80, 1.0),
                   make_link_budget(200, 80, 1.0)):
        for ratio in (100.0, 300.0, 1000.0):
            mean_snr = ratio * budget.gamma
            mc = expected_dep_monte_carlo(budget, mean_snr, rng, num_samples=10 ** 6)
            closed = 2 * budget.gamma / mean_snr
            worst = max(worst, abs(mc - closed) / closed)
    _report("criterion 5: fading-averaged DEP model", worst < 0.10,
            f"worst relative error {worst:.3f} over 9 (threshold, mean SNR) points")


def test_acceptance_6_determinism(tmp_path):
    scenario = default_scenario(rng_seed=0)
    arrays = default_array_config()
    ok = True
    for kind in ("nmse_vs_snr", "nmse_vs_pilots", "gain_vs_N", "ee_vs_N", "ee_vs_Pu", "ee_vs_area"):
        spec = ExperimentSpec(kind=kind, sweep=(DEFAULT_SWEEPS[kind][0],), scenario=scenario,
                              array_config=arrays, trials=2, master_seed=7)
        a, b = tmp_path / f"{kind}_a.csv", tmp_path / f"{kind}_b.csv"
        write_csv(run_experiment(spec).rows, a)
        write_csv(run_experiment(spec).rows, b)
        ok = ok and a.read_bytes() == b.read_bytes()

    # full path through the command-line entry point
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("num_robots = 4\nrng_seed = 0\n")
    c1, c2 = tmp_path / "cli_a.csv", tmp_path / "cli_b.csv"
    argv = [str(cfg), "--experiment", "gain_vs_N", "--trials", "2", "--sweep", "96", "--seed", "3"]
    ok = ok and main(argv + ["--out", str(c1)]) == EXIT_OK
    ok = ok and main(argv + ["--out", str(c2)]) == EXIT_OK
    ok = ok and c1.read_bytes() == c2.read_bytes()
    _report("criterion 6: deterministic reruns", ok, "byte-identical CSV for all experiment kinds")
