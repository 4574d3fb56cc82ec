"""Acceptance gate: one test per stated criterion, one printed verdict line each.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines.
"""

import json
import math
import time

import numpy as np

import winfree as wf
from winfree.thresholds import BoundParams


SPEC = wf.sinusoidal()


def _verdict(number, ok, started, detail):
    elapsed = time.monotonic() - started
    status = "PASS" if ok else "FAIL"
    print(f"criterion {number}: {status} ({elapsed:.1f}s) - {detail}")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_critical_coupling_closed_form():
    started = time.monotonic()
    target = 4.0 / (3.0 * math.sqrt(3.0))
    worst = 0.0
    for n in range(1, 17):
        kc = wf.critical_coupling(np.ones(n))
        worst = max(worst, abs(kc - target))
    _verdict(1, worst < 1e-9, started,
             f"equal-frequency kappa_c vs 4/(3*sqrt(3)), max err {worst:.2e} (tol 1e-9)")


def test_criterion_02_critical_coupling_bounds():
    started = time.monotonic()
    rng = np.random.default_rng(20240817)
    ok = True
    for _ in range(100):
        n = int(rng.integers(1, 9))
        omega = rng.uniform(-2.0, 2.0, n)
        omega_max = float(np.max(np.abs(omega)))
        if omega_max == 0.0:
            continue
        ratio = wf.critical_coupling(omega) / omega_max
        lo = 2.0 * n / (4.0 * n - 1.0)
        hi = 4.0 / (3.0 * math.sqrt(3.0))
        ok = ok and (lo - 1e-12 <= ratio <= hi + 1e-12)
    _verdict(2, ok, started, "100 seeded instances, lower/upper kappa_c ratio bounds (tol 1e-12)")


def test_criterion_03_w_polynomial_exactness():
    started = time.monotonic()
    cfg = wf.SystemConfig(n=1, omega=np.array([0.1]), kappa=1.0)
    w = wf.build_W_polynomial(cfg)
    coeff_ok = bool(np.max(np.abs(np.asarray(w.coeffs) - np.array([0.01, 0, 0, -2.0, 1.0]))) < 1e-12)
    roots = w.roots_in(0.1, 2.0)
    eq_rs = sorted(r.R for r in wf.enumerate_equilibria(cfg))
    root_ok = len(roots) >= len(eq_rs) and all(
        np.min(np.abs(roots - r)) < 1e-6 for r in eq_rs
    )
    rng = np.random.default_rng(7)
    random_ok = True
    for _ in range(50):
        n = int(rng.integers(1, 6))
        c = wf.SystemConfig(n=n, omega=rng.uniform(-0.5, 0.5, n), kappa=rng.uniform(0.5, 2.5))
        records = wf.enumerate_equilibria(c)
        if len(records) > 2 ** (n + 1):
            random_ok = False
            break
        if records:
            rts = wf.build_W_polynomial(c).roots_in(0.0, 2.1)
            if any(np.min(np.abs(rts - r.R)) >= 1e-6 for r in records):
                random_ok = False
                break
    _verdict(3, coeff_ok and root_ok and random_ok, started,
             "reference coefficients (tol 1e-12), root/equilibrium match (tol 1e-6), 50 instances")


def test_criterion_04_reference_numbers():
    started = time.monotonic()
    t0 = wf.sincos_death_time(800, 6.0, 1.0)
    t0_ok = abs(t0 - 0.40156699) < 1e-6
    p = wf.probability_bound("SincosMain", 800, BoundParams(epsilon=1.0))
    p_ok = abs(p - (1.0 - 1.266e-14)) < 1e-17
    _verdict(4, t0_ok and p_ok, started,
             f"T0={t0:.8f} (tol 1e-6), bound err {abs(p - (1.0 - 1.266e-14)):.1e} (tol 1e-17)")


def _criterion5_result(workers):
    rng = np.random.default_rng(501)
    n = 50
    omega = rng.uniform(-1.0, 1.0, n)
    cfg = wf.SystemConfig(n=n, omega=omega, kappa=2.5)
    floor = wf.limit_R_lower_bound(1.0, 2.5) - 0.02
    opts = wf.dp45_options(horizon=500.0, sample_stride=5.0,
                           abs_tol=1e-6, rel_tol=1e-6, max_dt=0.5)
    mc = wf.McConfig(samples=200, seed=502, workers=workers)
    est = wf.empirical_death_probability(cfg, SPEC, opts, mc, r_floor=floor)
    payload = wf.result_json_dict(
        "death", {"n": n, "kappa": 2.5, "r_floor": floor}, est, None
    )
    return json.dumps(payload, sort_keys=True).encode()


def test_criterion_05_oscillator_death_reproduction():
    started = time.monotonic()
    blob = _criterion5_result(workers=2)
    est = json.loads(blob)["estimate"]
    _verdict(5, est == 1.0, started,
             f"200 seeded runs at N=50, kappa=2.5: death+floor fraction {est:.3f} (need 1.0)")


def _criterion9_cdf_results(workers):
    blobs = []
    for n in (5, 10, 20):
        for t in (0.2, 0.5, 0.8):
            mc = wf.McConfig(samples=10**5, seed=901, workers=workers)
            est = wf.empirical_order_param_cdf(n, t, mc)
            bound = wf.probability_bound("OrderParamCDF", n, BoundParams(t_level=t))
            payload = wf.result_json_dict("order-param-cdf", {"n": n, "t": t}, est, bound)
            blobs.append(json.dumps(payload, sort_keys=True).encode())
    return blobs


def _criterion9_escape_result(workers):
    cfg = wf.SystemConfig(n=10, omega=np.zeros(10), kappa=2.0)
    opts = wf.dp45_options(horizon=10.0, sample_stride=0.25,
                           abs_tol=1e-6, rel_tol=1e-6, max_dt=0.5)
    mc = wf.McConfig(samples=10**4, seed=902, workers=workers)
    est = wf.estimate_escape_measure(cfg, SPEC, 0.5, 10.0, opts, mc)
    bound = wf.probability_bound(
        "EscapeMeasure", 10, BoundParams(delta=0.5, T=10.0, kappa=2.0)
    )
    payload = wf.result_json_dict(
        "escape", {"n": 10, "kappa": 2.0, "delta": 0.5, "T": 10.0}, est, bound
    )
    return json.dumps(payload, sort_keys=True).encode()


def test_criterion_09_concentration_bounds():
    started = time.monotonic()
    ok = True
    details = []
    for blob in _criterion9_cdf_results(workers=2):
        data = json.loads(blob)
        if not (data["estimate"] <= data["bound"] + 3.0 * data["std_error"] + 1e-12):
            ok = False
            details.append(f"cdf violated at {data['params']}")
    esc = json.loads(_criterion9_escape_result(workers=2))
    if not (esc["estimate"] <= esc["bound"] + 3.0 * esc["std_error"] + 1e-12):
        ok = False
        details.append("escape bound violated")
    _verdict(9, ok, started,
             "empirical CDF (9 cells, 1e5 samples) and escape measure (1e4 samples) "
             "within bound + 3*SE" + ("; " + "; ".join(details) if details else ""))


def test_criterion_06_sharp_coefficient_inequality():
    started = time.monotonic()
    grid = np.linspace(2.0 / 10**4, 2.0, 10**4)
    min_margin, argmin = wf.appendix_inequality_check(grid)
    at1 = wf.appendix_inequality_check(np.array([1.0]))[0]
    at2 = wf.appendix_inequality_check(np.array([2.0]))[0]
    ok = min_margin >= -1e-9 and abs(at1) < 1e-12 and abs(at2) < 1e-12
    _verdict(6, ok, started,
             f"grid min margin {min_margin:.2e} at R0={argmin:.4f} (tol -1e-9); "
             f"equality residuals {abs(at1):.1e}, {abs(at2):.1e} (tol 1e-12)")


def test_criterion_07_gradient_flow_identity():
    started = time.monotonic()
    rng = np.random.default_rng(701)
    grad_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 8))
        cfg = wf.SystemConfig(n=n, omega=rng.uniform(-1, 1, n), kappa=rng.uniform(0.3, 3.0))
        theta = rng.uniform(-np.pi, np.pi, n)
        f_val = wf.vector_field(cfg, SPEC, theta)
        eps = 1e-6
        grad = np.zeros(n)
        for j in range(n):
            e = np.zeros(n)
            e[j] = eps
            grad[j] = (wf.potential(cfg, SPEC, theta + e) - wf.potential(cfg, SPEC, theta - e)) / (2 * eps)
        if np.max(np.abs(grad + f_val)) / np.max(np.abs(f_val)) >= 1e-6:
            grad_ok = False
            break
    mono_ok = True
    for _ in range(20):
        n = int(rng.integers(2, 6))
        cfg = wf.SystemConfig(n=n, omega=rng.uniform(-0.5, 0.5, n), kappa=rng.uniform(0.5, 2.5))
        opts = wf.dp45_options(horizon=15.0, sample_stride=0.25)
        traj = wf.simulate(cfg, SPEC, rng.uniform(-np.pi, np.pi, n), opts)
        v_vals = np.array([wf.potential(cfg, SPEC, traj.states[k]) for k in range(len(traj.times))])
        if np.any(np.diff(v_vals) > 10.0 * traj.solver_tol):
            mono_ok = False
            break
    _verdict(7, grad_ok and mono_ok, started,
             "grad V = -F on 100 states (rel tol 1e-6); V non-increasing on 20 trajectories "
             "(slack 10x solver tol)")


def test_criterion_08_jacobian_divergence_instability():
    started = time.monotonic()
    rng = np.random.default_rng(801)
    trace_ok = True
    for _ in range(10**4):
        n = int(rng.integers(1, 7))
        cfg = wf.SystemConfig(n=n, omega=rng.uniform(-1, 1, n), kappa=rng.uniform(-3, 3))
        theta = rng.uniform(-np.pi, np.pi, n)
        div = wf.divergence(cfg, SPEC, theta)
        tr = float(np.trace(wf.jacobian(cfg, theta)))
        if abs(div - tr) >= 1e-12 * max(1.0, abs(div)):
            trace_ok = False
            break
    unstable_ok = True
    checked = 0
    for _ in range(50):
        n = int(rng.integers(1, 6))
        cfg = wf.SystemConfig(n=n, omega=rng.uniform(-0.4, 0.4, n), kappa=rng.uniform(0.5, 2.5))
        for rec in wf.enumerate_equilibria(cfg):
            if 0.0 < rec.R < 1.0 and rec.stability != "Indeterminate":
                checked += 1
                if rec.stability != "Unstable":
                    unstable_ok = False
    _verdict(8, trace_ok and unstable_ok and checked > 0, started,
             f"trace=divergence on 1e4 states (tol 1e-12); {checked} low-R equilibria all Unstable")


def test_criterion_10_theorem_conclusion_verification():
    started = time.monotonic()
    rng = np.random.default_rng(1001)
    ok = True
    passed = 0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        omega = rng.uniform(-0.2, 0.2, n)
        theta0 = rng.uniform(-1.2, 1.2, n)
        r0 = wf.order_parameter(SPEC, theta0)
        mu = 0.5 * min(r0, 1.0)
        omega_max = float(np.max(np.abs(omega)))
        kappa = 1.5 * wf.sinusoidal_threshold(r0, mu, omega_max) + 0.5
        cfg = wf.SystemConfig(n=n, omega=omega, kappa=kappa)
        opts = wf.dp45_options(horizon=40.0, sample_stride=0.1)
        traj = wf.simulate(cfg, SPEC, theta0, opts)
        report = wf.verify_theorem_conclusions(traj, cfg, mu)
        if report.all_ok:
            passed += 1
        else:
            ok = False
    _verdict(10, ok, started,
             f"{passed}/50 seeded strong-coupling instances pass all trajectory conclusions")


def test_criterion_11_determinism_across_worker_counts():
    started = time.monotonic()
    death_ok = _criterion5_result(workers=1) == _criterion5_result(workers=2)
    cdf_ok = _criterion9_cdf_results(workers=1) == _criterion9_cdf_results(workers=3)
    escape_ok = _criterion9_escape_result(workers=1) == _criterion9_escape_result(workers=2)
    _verdict(11, death_ok and cdf_ok and escape_ok, started,
             "criteria 5 and 9 outputs byte-identical across worker counts")
