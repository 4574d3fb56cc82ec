"""Command-line orchestration: simulations, sweeps, bounds, and verification.

Configuration comes from a single JSON document (--config) with snake_case
keys; kebab-case flags override individual fields.  The WINFREE_SEED
environment variable overrides the configured seed.  Exit codes: 0 success,
2 configuration error, 3 numeric/integration failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import equilibria, integrate, model, montecarlo, thresholds
from .errors import (
    ConfigurationError,
    CriterionInapplicableError,
    DomainError,
    IntegrationFailure,
    PreconditionError,
    SizeLimitError,
)
from .integrate import SolverOptions
from .model import InteractionSpec, SystemConfig
from .montecarlo import McConfig
from .thresholds import BoundParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CONFIG_ERRORS = (
    ConfigurationError,
    DomainError,
    PreconditionError,
    SizeLimitError,
    CriterionInapplicableError,
    KeyError,
    ValueError,
)


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip() != ""]


def _load_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigurationError("config JSON must be an object")
    for key, value in vars(args).items():
        if key in ("config", "command", "func") or value is None:
            continue
        cfg[key] = value
    env_seed = os.environ.get("WINFREE_SEED")
    if env_seed is not None:
        cfg["seed"] = int(env_seed)
    cfg.setdefault("seed", 0)
    return cfg


def _quantile_frequencies(n: int, gamma: float) -> np.ndarray:
    """Deterministic equal-mass quantile sample of uniform[1-gamma, 1+gamma]."""
    return 1.0 - gamma + 2.0 * gamma * (np.arange(1, n + 1) - 0.5) / n


def _system_config(cfg: dict) -> SystemConfig:
    if "omega" in cfg:
        omega = np.asarray(_parse_floats(cfg["omega"]) if isinstance(cfg["omega"], str) else cfg["omega"], dtype=float)
        n = int(cfg.get("n", len(omega)))
    else:
        n = int(cfg.get("n", 100))
        omega = _quantile_frequencies(n, float(cfg.get("gamma", 1.0)))
    return SystemConfig(n=n, omega=omega, kappa=float(cfg.get("kappa", 1.0)))


def _interaction_spec(cfg: dict) -> InteractionSpec:
    family = cfg.get("family", "sinusoidal")
    if family == "sinusoidal":
        return model.sinusoidal()
    if family == "power_cosine":
        return model.power_cosine(int(cfg.get("power", 1)))
    if family == "rectified_poisson":
        return model.rectified_poisson(float(cfg.get("r_pk", 0.0)))
    if family == "custom":
        i_table = model.load_custom_table(cfg["influence_table"])
        s_table = model.load_custom_table(cfg["sensitivity_table"])
        return model.custom_interaction(i_table, s_table)
    raise ConfigurationError(f"unknown interaction family: {family}")


def _solver_options(cfg: dict) -> SolverOptions:
    horizon = float(cfg.get("horizon", 500.0))
    stride = float(cfg.get("sample_stride", 1.0))
    method = cfg.get("method", "dormand_prince45")
    if method == "rk4_fixed":
        return integrate.rk4_options(float(cfg.get("dt", 0.01)), horizon, stride)
    return integrate.dp45_options(
        horizon,
        stride,
        abs_tol=float(cfg.get("abs_tol", 1e-9)),
        rel_tol=float(cfg.get("rel_tol", 1e-9)),
        max_dt=float(cfg.get("max_dt", 0.1)),
    )


def _mc_config(cfg: dict) -> McConfig:
    return McConfig(
        samples=int(cfg.get("samples", 1000)),
        seed=int(cfg.get("seed", 0)),
        workers=int(cfg.get("workers", 1)),
    )


def _initial_state(cfg: dict, n: int) -> np.ndarray:
    if "initial" in cfg:
        init = cfg["initial"]
        theta = np.asarray(_parse_floats(init) if isinstance(init, str) else init, dtype=float)
        if theta.shape != (n,):
            raise ConfigurationError("initial state length must equal n")
        return theta
    return np.random.default_rng((int(cfg.get("seed", 0)), 0)).uniform(-np.pi, np.pi, n)


def _write_json(cfg: dict, payload: dict, default_path: str) -> None:
    path = cfg.get("output", default_path)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
        print(text)


def cmd_simulate(cfg: dict) -> int:
    config = _system_config(cfg)
    spec = _interaction_spec(cfg)
    opts = _solver_options(cfg)
    initial = _initial_state(cfg, config.n)
    traj_path = cfg.get("trajectory_output", "trajectory.csv")
    try:
        traj = integrate.simulate(config, spec, initial, opts)
    except IntegrationFailure as exc:
        if exc.partial_trajectory is not None:
            exc.partial_trajectory.to_csv(traj_path)
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    traj.to_csv(traj_path)
    report = integrate.regime_report(traj, config)
    summary = {
        "final_R": float(traj.r_series[-1]),
        "rotation_numbers": report.rho.tolist(),
        "death_flags": report.death_flags.tolist(),
        "regime": report.regime,
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
    }
    _write_json(cfg, summary, "summary.json")
    return EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    n = 800 if cfg.get("full") else int(cfg.get("n", 100))
    kappa_grid = cfg.get("kappa_grid")
    gamma_grid = cfg.get("gamma_grid")
    if isinstance(kappa_grid, str):
        kappa_grid = _parse_floats(kappa_grid)
    if isinstance(gamma_grid, str):
        gamma_grid = _parse_floats(gamma_grid)
    if not kappa_grid or not gamma_grid:
        raise ConfigurationError("sweep requires non-empty kappa_grid and gamma_grid")
    opts = _solver_options(cfg)
    spec = _interaction_spec(cfg)
    seed = int(cfg.get("seed", 0))
    rows = ["kappa,gamma,regime,death_fraction,mean_R_final"]
    cell = 0
    for gamma in gamma_grid:
        for kappa in kappa_grid:
            omega = _quantile_frequencies(n, float(gamma))
            config = SystemConfig(n=n, omega=omega, kappa=float(kappa))
            initial = np.random.default_rng((seed, cell)).uniform(-np.pi, np.pi, n)
            traj = integrate.simulate(config, spec, initial, opts)
            report = integrate.regime_report(traj, config)
            tail = traj.r_series[traj.times >= 0.9 * opts.horizon]
            rows.append(
                f"{kappa:.17g},{gamma:.17g},{report.regime},"
                f"{float(np.mean(report.death_flags)):.17g},{float(np.mean(tail)):.17g}"
            )
            cell += 1
    path = cfg.get("output", "sweep.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {path} ({cell} cells)")
    return EXIT_OK


def cmd_equilibria(cfg: dict) -> int:
    config = _system_config(cfg)
    records = equilibria.enumerate_equilibria(config)
    payload = {"count": len(records), "equilibria": [r.to_json_dict() for r in records]}
    _write_json(cfg, payload, "-")
    return EXIT_OK


def cmd_critical_coupling(cfg: dict) -> int:
    config = _system_config(cfg)
    kc = equilibria.critical_coupling(config.omega)
    degenerate = bool(np.all(config.omega == 0.0))
    print(f"{kc:.10g}")
    _write_json(cfg, {"kappa_c": kc, "degenerate": degenerate}, "-") if cfg.get("output") else None
    return EXIT_OK


def cmd_bounds(cfg: dict) -> int:
    kind = cfg.get("kind")
    if not kind:
        raise ConfigurationError("bounds requires --kind")
    n = int(cfg.get("n", 100))
    params = BoundParams(
        epsilon=cfg.get("epsilon"),
        delta=cfg.get("delta"),
        T=cfg.get("t_horizon"),
        C_mu=cfg.get("c_mu"),
        beta=cfg.get("beta"),
        R_star=cfg.get("r_star"),
        I_star=cfg.get("i_star"),
        t_level=cfg.get("t_level"),
        kappa=cfg.get("kappa"),
        omega_max=cfg.get("omega_max"),
        sup_I=cfg.get("sup_i"),
    )
    spec = _interaction_spec(cfg)
    payload: dict = {"kind": kind, "n": n}
    if kind == "SincosTime":
        t0 = thresholds.sincos_death_time(n, float(cfg["kappa"]), float(cfg["epsilon"]))
        payload["T0"] = t0
        if params.T is None:
            params = BoundParams(epsilon=params.epsilon, kappa=params.kappa, T=t0 + 1.0)
    value = thresholds.probability_bound(kind, n, params, spec=spec)
    payload["value"] = value
    _write_json(cfg, payload, "-")
    return EXIT_OK


def cmd_montecarlo(cfg: dict) -> int:
    kind = cfg.get("kind", "order-param-cdf")
    mc = _mc_config(cfg)
    spec = _interaction_spec(cfg)
    if kind == "order-param-cdf":
        n = int(cfg.get("n", 10))
        t_level = float(cfg.get("t_level", 0.5))
        est = montecarlo.empirical_order_param_cdf(n, t_level, mc)
        bound = thresholds.probability_bound("OrderParamCDF", n, BoundParams(t_level=t_level))
        payload = montecarlo.result_json_dict(kind, {"n": n, "t_level": t_level}, est, bound)
    elif kind == "death":
        config = _system_config(cfg)
        opts = _solver_options(cfg)
        est = montecarlo.empirical_death_probability(config, spec, opts, mc)
        eps = config.kappa / config.omega_max - 2.0 if config.omega_max > 0 else 1.0
        bound = None
        if 0.0 < eps:
            params = BoundParams(epsilon=min(eps, 1.0))
            bound = thresholds.probability_bound("SincosMain", config.n, params)
        payload = montecarlo.result_json_dict(
            kind, {"n": config.n, "kappa": config.kappa}, est, bound
        )
        payload["dominates"] = None if bound is None else bool(est.estimate >= bound - 3 * est.std_error)
    elif kind == "escape":
        config = _system_config(cfg)
        opts = _solver_options(cfg)
        delta = float(cfg.get("delta", 0.5))
        t_horizon = float(cfg.get("t_horizon", 10.0))
        est = montecarlo.estimate_escape_measure(config, spec, delta, t_horizon, opts, mc)
        bound = thresholds.probability_bound(
            "EscapeMeasure",
            config.n,
            BoundParams(delta=delta, T=t_horizon, kappa=config.kappa),
        )
        payload = montecarlo.result_json_dict(
            kind, {"n": config.n, "kappa": config.kappa, "delta": delta, "T": t_horizon}, est, bound
        )
    else:
        raise ConfigurationError(f"unknown montecarlo kind: {kind}")
    _write_json(cfg, payload, "-")
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    config = _system_config(cfg)
    spec = _interaction_spec(cfg)
    opts = _solver_options(cfg)
    initial = _initial_state(cfg, config.n)
    mu = float(cfg.get("mu", 0.5))
    traj = integrate.simulate(config, spec, initial, opts)
    report = integrate.verify_theorem_conclusions(traj, config, mu)
    payload = {
        "r_floor_ok": report.r_floor_ok,
        "trapping_ok": report.trapping_ok,
        "entrance_ok": report.entrance_ok,
        "ordering_ok": report.ordering_ok,
        "all_ok": report.all_ok,
        "details": report.details,
    }
    _write_json(cfg, payload, "-")
    return EXIT_OK


def estimate_pathwise_critical_coupling(
    config: SystemConfig, spec: InteractionSpec, initial, opts: SolverOptions
) -> float:
    """Bisection estimate of the smallest coupling whose trajectory dies.

    Horizon-dependent by construction; bracketed above by the elementary
    threshold, 30 bisection iterations.
    """
    upper, _ = thresholds.toy_thresholds(spec, config, list(range(config.n)))
    if upper == 0.0:
        return 0.0

    def dies(kappa: float) -> bool:
        cfg = SystemConfig(n=config.n, omega=config.omega, kappa=kappa)
        try:
            traj = integrate.simulate(cfg, spec, initial, opts)
        except IntegrationFailure:
            return False
        return bool(np.all(integrate.detect_death(traj, 0.0)))

    if dies(0.0):
        return 0.0
    lo, hi = 0.0, upper
    if not dies(hi):
        return hi
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if dies(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def cmd_kappa_pc(cfg: dict) -> int:
    config = _system_config(cfg)
    spec = _interaction_spec(cfg)
    opts = _solver_options(cfg)
    initial = _initial_state(cfg, config.n)
    value = estimate_pathwise_critical_coupling(config, spec, initial, opts)
    _write_json(cfg, {"kappa_pc": value, "horizon_dependent": True}, "-")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--n", type=int)
    parser.add_argument("--omega", help="comma-separated frequencies")
    parser.add_argument("--kappa", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--family")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--sample-stride", dest="sample_stride", type=float)
    parser.add_argument("--method")
    parser.add_argument("--dt", type=float)
    parser.add_argument("--abs-tol", dest="abs_tol", type=float)
    parser.add_argument("--rel-tol", dest="rel_tol", type=float)
    parser.add_argument("--max-dt", dest="max_dt", type=float)
    parser.add_argument("--initial", help="comma-separated initial phases")
    parser.add_argument("--output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="winfree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "simulate": cmd_simulate,
        "sweep": cmd_sweep,
        "equilibria": cmd_equilibria,
        "critical-coupling": cmd_critical_coupling,
        "bounds": cmd_bounds,
        "montecarlo": cmd_montecarlo,
        "verify": cmd_verify,
        "kappa-pc": cmd_kappa_pc,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
        if name == "simulate":
            p.add_argument("--trajectory-output", dest="trajectory_output")
        if name == "sweep":
            p.add_argument("--kappa-grid", dest="kappa_grid")
            p.add_argument("--gamma-grid", dest="gamma_grid")
            p.add_argument("--full", action="store_true", default=None)
        if name in ("bounds", "montecarlo"):
            p.add_argument("--kind")
            p.add_argument("--epsilon", type=float)
            p.add_argument("--delta", type=float)
            p.add_argument("--t-level", dest="t_level", type=float)
            p.add_argument("--t-horizon", dest="t_horizon", type=float)
            p.add_argument("--omega-max", dest="omega_max", type=float)
            p.add_argument("--c-mu", dest="c_mu", type=float)
            p.add_argument("--beta", type=float)
            p.add_argument("--r-star", dest="r_star", type=float)
            p.add_argument("--i-star", dest="i_star", type=float)
            p.add_argument("--sup-i", dest="sup_i", type=float)
        if name == "verify":
            p.add_argument("--mu", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(cfg)
    except IntegrationFailure as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"configuration error: malformed JSON ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
