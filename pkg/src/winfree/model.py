"""Interaction functions, the Winfree vector field, and its derived quantities.

The model is the mean-field system

    dtheta_i/dt = omega_i + (kappa/N) * sum_j I(theta_j) * S(theta_i)

with influence I and sensitivity S.  The prototypical (sinusoidal) choice is
S(theta) = -sin(theta), I(theta) = 1 + cos(theta), for which the average
influence R = (1/N) sum_j I(theta_j) lies in [0, 2].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedOperationError

TABLE_SIZE = 4096
FD_STEP = 1e-6

_TWO_PI = 2.0 * np.pi


def wrap_to_pi(theta):
    """Reduce angles to [-pi, pi) (evaluation only; states stay unwrapped)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, _TWO_PI) - np.pi


@dataclass(frozen=True)
class InteractionSpec:
    """Influence/sensitivity pair plus the structural constants.

    The constants c1..c5, p, q, r_exp, alpha0, I_star describe the shape
    conditions used by the coupling thresholds:
      (c1) S(theta) <= -c1*(pi-theta)^p on [alpha0, pi] (and the odd mirror),
      (c2) 0 <= I(theta) <= c2*(pi-|theta|)^q,
      (c3) min_{|phi| <= max(|theta|, alpha0)} I(phi) >= c3*I(theta),
      (c4) S'(theta) >= c4*(I_star - I(theta)),
      (c5) I'(theta)*S(theta) >= 0,
      (c7) I(theta) >= c5*(pi-|theta|)^r_exp.
    """

    family: str  # "sinusoidal" | "power_cosine" | "rectified_poisson" | "custom"
    n: int = 1
    r_pk: float = 0.0
    i_table: Optional[np.ndarray] = field(default=None, repr=False)
    s_table: Optional[np.ndarray] = field(default=None, repr=False)
    c1: float = 2.0 / np.pi
    c2: float = 0.5
    c3: float = 0.5
    c4: float = 1.0
    c5: float = 1.0 / np.pi**2
    p: float = 1.0
    q: float = 2.0
    r_exp: float = 2.0
    alpha0: float = np.pi / 2.0
    I_star: float = 1.0
    sup_I: float = 2.0

    def __post_init__(self):
        if self.family not in ("sinusoidal", "power_cosine", "rectified_poisson", "custom"):
            raise ConfigurationError(f"unknown interaction family: {self.family}")
        if self.family == "power_cosine" and self.n < 1:
            raise ConfigurationError("power_cosine exponent n must be >= 1")
        if self.family == "rectified_poisson" and not -1.0 < self.r_pk < 1.0:
            raise ConfigurationError("rectified_poisson parameter must lie in (-1, 1)")
        if self.family == "custom":
            if self.i_table is None or self.s_table is None or len(self.i_table) == 0:
                raise ConfigurationError("custom interaction requires non-empty I and S tables")


def sinusoidal() -> InteractionSpec:
    """S = -sin, I = 1 + cos, with validated default structural constants."""
    return InteractionSpec(family="sinusoidal")


def power_cosine(n: int) -> InteractionSpec:
    """S = -sin, I = (1 + cos)^n."""
    return InteractionSpec(
        family="power_cosine",
        n=n,
        c1=2.0 / np.pi,
        c2=1.0,
        c3=2.0 ** (-n),
        c4=1.0 / n,
        c5=(2.0 / np.pi**2) ** n,
        p=1.0,
        q=2.0 * n,
        r_exp=2.0 * n,
        alpha0=np.pi / 2.0,
        I_star=1.0,
        sup_I=2.0**n,
    )


def rectified_poisson(r_pk: float) -> InteractionSpec:
    """S = -sin, I = (1-r)(1+cos) / (1 - 2r cos + r^2)."""
    if not -1.0 < r_pk < 1.0:
        raise DomainError("rectified_poisson requires |r_pk| < 1")
    one_minus = 1.0 - r_pk
    denom_min = (1.0 - abs(r_pk)) ** 2
    denom_max = (1.0 + abs(r_pk)) ** 2
    i_star = one_minus / (1.0 + r_pk**2)  # I at alpha0 = pi/2
    spec = InteractionSpec(
        family="rectified_poisson",
        r_pk=r_pk,
        c1=2.0 / np.pi,
        c2=one_minus / (2.0 * denom_min),
        c3=one_minus**2 / (2.0 * (1.0 + r_pk**2)),
        c4=1.0,  # placeholder, refined below
        c5=2.0 * one_minus / (np.pi**2 * denom_max),
        p=1.0,
        q=2.0,
        r_exp=2.0,
        alpha0=np.pi / 2.0,
        I_star=i_star,
        sup_I=2.0 / one_minus,
    )
    # c4 has no simple closed form here; take the grid infimum of
    # S'(theta) / (I_star - I(theta)) away from the sign-change point.
    th = np.linspace(-np.pi, np.pi, TABLE_SIZE)
    gap = i_star - influence(spec, th)
    sp = sensitivity_deriv(spec, th)
    mask = np.abs(gap) > 1e-6
    ratios = sp[mask] / gap[mask]
    c4 = max(float(np.min(ratios)), 0.0) * (1.0 - 1e-6)
    return replace(spec, c4=c4)


def custom_interaction(i_table, s_table, **constants) -> InteractionSpec:
    """Tabulated I and S on a uniform grid over [-pi, pi], linear interpolation.

    Tables are resampled to TABLE_SIZE points.  Structural constants default to
    the sinusoidal values and should be overridden (and then validated with
    verify_interaction_conditions) for anything else.
    """
    i_table = _resample(np.asarray(i_table, dtype=float))
    s_table = _resample(np.asarray(s_table, dtype=float))
    return InteractionSpec(family="custom", i_table=i_table, s_table=s_table, **constants)


def load_custom_table(path) -> np.ndarray:
    """Load a (theta, value) two-column CSV with a header row.

    Returns the values resampled onto the uniform TABLE_SIZE grid over [-pi, pi].
    """
    thetas, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigurationError(f"empty CSV table: {path}")
        for row in reader:
            if not row:
                continue
            thetas.append(float(row[0]))
            values.append(float(row[1]))
    if not thetas:
        raise ConfigurationError(f"CSV table has no data rows: {path}")
    order = np.argsort(thetas)
    th = np.asarray(thetas, dtype=float)[order]
    val = np.asarray(values, dtype=float)[order]
    grid = np.linspace(-np.pi, np.pi, TABLE_SIZE)
    return np.interp(grid, th, val)


def _resample(values: np.ndarray) -> np.ndarray:
    if values.ndim != 1 or len(values) < 2:
        raise ConfigurationError("interaction table must be a 1-D array with >= 2 points")
    if len(values) == TABLE_SIZE:
        return values
    src = np.linspace(-np.pi, np.pi, len(values))
    grid = np.linspace(-np.pi, np.pi, TABLE_SIZE)
    return np.interp(grid, src, values)


@dataclass(frozen=True)
class SystemConfig:
    """Oscillator count, intrinsic frequencies, and coupling strength."""

    n: int
    omega: np.ndarray
    kappa: float

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        object.__setattr__(self, "omega", omega)
        if self.n < 1:
            raise ConfigurationError("n must be >= 1")
        if omega.shape != (self.n,):
            raise ConfigurationError(f"omega must have length n={self.n}, got shape {omega.shape}")
        if not (np.all(np.isfinite(omega)) and np.isfinite(self.kappa)):
            raise ConfigurationError("omega and kappa must be finite")

    @property
    def omega_max(self) -> float:
        """Sup norm of the frequency vector."""
        return float(np.max(np.abs(self.omega)))


@dataclass(frozen=True)
class PhaseState:
    """Unwrapped phase vector (real line, not reduced mod 2*pi)."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1:
            raise ConfigurationError("theta must be a 1-D vector")
        if not np.all(np.isfinite(theta)):
            raise ConfigurationError("theta entries must be finite")


def _phases(state) -> np.ndarray:
    if isinstance(state, PhaseState):
        return state.theta
    return np.asarray(state, dtype=float)


def influence(spec: InteractionSpec, theta):
    """Evaluate I(theta); 2*pi periodic, vectorized."""
    th = wrap_to_pi(theta)
    if spec.family == "sinusoidal":
        return 1.0 + np.cos(th)
    if spec.family == "power_cosine":
        return (1.0 + np.cos(th)) ** spec.n
    if spec.family == "rectified_poisson":
        r = spec.r_pk
        return (1.0 - r) * (1.0 + np.cos(th)) / (1.0 - 2.0 * r * np.cos(th) + r * r)
    grid = np.linspace(-np.pi, np.pi, TABLE_SIZE)
    return np.interp(th, grid, spec.i_table)


def sensitivity(spec: InteractionSpec, theta):
    """Evaluate S(theta); 2*pi periodic, vectorized."""
    th = wrap_to_pi(theta)
    if spec.family in ("sinusoidal", "power_cosine", "rectified_poisson"):
        return -np.sin(th)
    grid = np.linspace(-np.pi, np.pi, TABLE_SIZE)
    return np.interp(th, grid, spec.s_table)


def influence_deriv(spec: InteractionSpec, theta):
    """dI/dtheta (closed form for built-ins, centered differences for custom)."""
    th = wrap_to_pi(theta)
    if spec.family == "sinusoidal":
        return -np.sin(th)
    if spec.family == "power_cosine":
        return -spec.n * np.sin(th) * (1.0 + np.cos(th)) ** (spec.n - 1)
    if spec.family == "rectified_poisson":
        r = spec.r_pk
        denom = 1.0 - 2.0 * r * np.cos(th) + r * r
        return -np.sin(th) * (1.0 - r) * (1.0 + r) ** 2 / denom**2
    return (influence(spec, th + FD_STEP) - influence(spec, th - FD_STEP)) / (2.0 * FD_STEP)


def sensitivity_deriv(spec: InteractionSpec, theta):
    """dS/dtheta (closed form for built-ins, centered differences for custom)."""
    th = wrap_to_pi(theta)
    if spec.family in ("sinusoidal", "power_cosine", "rectified_poisson"):
        return -np.cos(th)
    return (sensitivity(spec, th + FD_STEP) - sensitivity(spec, th - FD_STEP)) / (2.0 * FD_STEP)


def order_parameter(spec: InteractionSpec, state) -> float:
    """Average influence R = (1/N) sum_j I(theta_j)."""
    return float(np.mean(influence(spec, _phases(state))))


def vector_field(config: SystemConfig, spec: InteractionSpec, state) -> np.ndarray:
    """Right-hand side omega_i + kappa * R * S(theta_i)."""
    theta = _phases(state)
    r = np.mean(influence(spec, theta))
    return config.omega + config.kappa * r * sensitivity(spec, theta)


def divergence(config: SystemConfig, spec: InteractionSpec, state) -> float:
    """Divergence of the vector field at the given state.

    For the sinusoidal family this is exactly
    kappa * (N*R*(1-R) + (1/N) sum_i sin^2 theta_i).
    """
    theta = _phases(state)
    n = config.n
    if spec.family == "sinusoidal":
        r = np.mean(1.0 + np.cos(theta))
        return float(config.kappa * (n * r * (1.0 - r) + np.mean(np.sin(theta) ** 2)))
    sum_i = np.sum(influence(spec, theta))
    sum_sp = np.sum(sensitivity_deriv(spec, theta))
    sum_is = np.sum(influence_deriv(spec, theta) * sensitivity(spec, theta))
    return float(config.kappa / n * (sum_i * sum_sp + sum_is))


def divergence_lower_bound(config: SystemConfig, spec: InteractionSpec, state) -> float:
    """Shape-condition lower bound c4 * kappa * N * R * (I_star - R)."""
    r = order_parameter(spec, state)
    return float(spec.c4 * config.kappa * config.n * r * (spec.I_star - r))


def jacobian(config: SystemConfig, state) -> np.ndarray:
    """Jacobian of the sinusoidal vector field; trace equals the divergence.

    Raises for non-sinusoidal specs (callers pass the spec implicitly by
    contract; an explicit spec argument guards misuse).
    """
    theta = _phases(state)
    n = config.n
    kappa = config.kappa
    s = np.sin(theta)
    r = np.mean(1.0 + np.cos(theta))
    jac = (kappa / n) * np.outer(s, s)
    jac[np.diag_indices(n)] = -kappa * r * np.cos(theta) + (kappa / n) * s * s
    return jac


def jacobian_for_spec(config: SystemConfig, spec: InteractionSpec, state) -> np.ndarray:
    """Jacobian with the family guard required by the public contract."""
    if spec.family != "sinusoidal":
        raise UnsupportedOperationError("jacobian is only defined for the sinusoidal family")
    return jacobian(config, state)


def is_gradient_spec(spec: InteractionSpec, tol: float = 1e-8) -> bool:
    """True when S = I' holds (numerically on a grid), i.e. gradient flow."""
    if spec.family == "sinusoidal":
        return True
    th = np.linspace(-np.pi, np.pi, 2048)
    return bool(np.max(np.abs(sensitivity(spec, th) - influence_deriv(spec, th))) < tol)


def potential(config: SystemConfig, spec: InteractionSpec, state) -> float:
    """Gradient-flow potential V; defined only when S = I'.

    V(Theta) = -sum_i omega_i*theta_i - (kappa / 2N) * (sum_i I(theta_i))^2,
    whose negative gradient is the vector field.
    """
    if not is_gradient_spec(spec):
        raise UnsupportedOperationError("potential requires S = I' (gradient-flow interaction)")
    theta = _phases(state)
    total_influence = np.sum(influence(spec, theta))
    return float(-np.dot(config.omega, theta) - config.kappa / (2.0 * config.n) * total_influence**2)
