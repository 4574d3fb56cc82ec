"""Equilibria of the sinusoidal Winfree model.

Equilibrium phases satisfy sin(theta_i) = omega_i / (kappa * R) with a branch
sign sigma_i per oscillator, and the order parameter R solves the scalar
fixed-point equation R = 1 + (1/N) sum_j sigma_j sqrt(1 - omega_j^2/(kappa R)^2).
Multiplying the branch functions over all 2^N signatures and clearing
denominators yields a polynomial W(r) of degree 2^(N+1) whose positive roots
bound the possible equilibrium order parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import model
from .errors import (
    DegenerateFrequenciesError,
    DomainError,
    SizeLimitError,
    UnsupportedOperationError,
)
from .model import SystemConfig

SCAN_POINTS = 4096
ROOT_TOL = 1e-12
TANGENT_TOL = 1e-10
DEDUP_TOL = 1e-8
R_UPPER = 2.0 + 1e-9


@dataclass(frozen=True)
class Signature:
    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=int)
        object.__setattr__(self, "sigma", sigma)
        if not np.all(np.isin(sigma, (-1, 1))):
            raise DomainError("signature entries must be -1 or +1")


@dataclass(frozen=True)
class EquilibriumRecord:
    R: float
    theta: np.ndarray  # canonical representatives in (-pi, pi]
    signature: Signature
    divergence: float
    stability: str  # "Stable" | "Unstable" | "Indeterminate"
    max_eig_real: float

    def to_json_dict(self) -> dict:
        return {
            "R": self.R,
            "theta": self.theta.tolist(),
            "signature": self.signature.sigma.tolist(),
            "divergence": self.divergence,
            "stability": self.stability,
            "max_eig_real": self.max_eig_real,
        }


@dataclass(frozen=True)
class WPolynomial:
    coeffs: np.ndarray  # ascending degree, length 2^(N+1) + 1
    degree: int
    # squared frequency-to-coupling ratios (omega_j/kappa)^2; carried so the
    # polynomial can be evaluated through its well-conditioned product form
    branch_w: Optional[np.ndarray] = None

    def roots_in(self, lo: float, hi: float) -> np.ndarray:
        """Real roots in [lo, hi].

        Expanded coefficients of the high-degree polynomial are hopeless for
        root finding (the companion matrix and Horner evaluation both lose all
        accuracy to cancellation), so roots are located factor by factor: each
        signature contributes one branch function whose zeros are found by
        sign-change bisection, as in the fixed-point solve.
        """
        if self.branch_w is None:
            raise UnsupportedOperationError("roots_in requires the branch data")
        w = np.asarray(self.branch_w, dtype=float)
        n = len(w)
        branch_point = float(np.sqrt(np.max(w)))
        roots: list[float] = []
        a = max(lo, branch_point)
        if hi > a:
            for bits in range(2**n):
                sigma = 1.0 - 2.0 * ((bits >> np.arange(n)) & 1)

                def h(r, sigma=sigma):
                    r = np.asarray(r, dtype=float)
                    p = np.sqrt(np.clip(np.square(r)[..., None] - w, 0.0, None))
                    return r - r * r + np.sum(sigma * p, axis=-1) / n

                roots.extend(_scan_roots(h, a, hi))
        roots = sorted(roots)
        keep: list[float] = []
        for r in roots:
            if not keep or r - keep[-1] > DEDUP_TOL:
                keep.append(r)
        return np.asarray(keep)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"degree": self.degree, "coeffs": self.coeffs.tolist()}, fh, sort_keys=True)


def _r_equation(config: SystemConfig, sigma: np.ndarray):
    omega2 = config.omega**2
    kappa2 = config.kappa**2

    def f(r):
        r = np.asarray(r, dtype=float)
        radicand = np.clip(1.0 - omega2 / (kappa2 * np.square(r)[..., None]), 0.0, None)
        return 1.0 + np.mean(sigma * np.sqrt(radicand), axis=-1) - r

    return f


def _scan_roots(f, lo: float, hi: float) -> list[float]:
    """Roots of f on [lo, hi]: grid sign scan, bisection, tangency detection."""
    grid = np.linspace(lo, hi, SCAN_POINTS + 1)
    vals = np.asarray(f(grid), dtype=float)
    roots = []
    if abs(vals[0]) < ROOT_TOL:
        roots.append(float(grid[0]))
    signs = np.sign(vals)
    for k in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        a, b = grid[k], grid[k + 1]
        fa = vals[k]
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = float(f(mid))
            if abs(fm) < ROOT_TOL or b - a < 1e-16:
                break
            if fa * fm < 0:
                b = mid
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    # tangential (double) roots: local minima of |f| that nearly touch zero
    absvals = np.abs(vals)
    for k in range(1, SCAN_POINTS):
        if absvals[k] <= absvals[k - 1] and absvals[k] <= absvals[k + 1] and absvals[k] < 1e-6:
            if signs[k - 1] * signs[k + 1] > 0:  # not already caught by bisection
                from .thresholds import _golden_min

                x, v = _golden_min(lambda r: abs(float(f(r))), grid[k - 1], grid[k + 1])
                if v < TANGENT_TOL:
                    roots.append(x)
    return roots


def solve_R_equation(config: SystemConfig, signature: Signature) -> list[float]:
    """All roots of the order-parameter fixed-point equation for one signature.

    Scans [max|omega|/|kappa|, 2 + 1e-9] on 4096 subintervals, bisects sign
    changes to |f| < 1e-12, and accepts tangential roots when a local minimum
    of |f| dips below 1e-10.
    """
    if config.kappa == 0.0:
        raise DomainError("kappa must be nonzero")
    if np.all(config.omega == 0.0):
        raise DegenerateFrequenciesError("all frequencies vanish; use the bipolar enumeration")
    sigma = signature.sigma
    if sigma.shape != (config.n,):
        raise DomainError("signature length must equal N")
    r_lo = config.omega_max / abs(config.kappa)
    if r_lo > R_UPPER:
        return []
    f = _r_equation(config, sigma)
    roots = sorted(_scan_roots(f, r_lo, R_UPPER))
    dedup = []
    for r in roots:
        if not dedup or r - dedup[-1] > 1e-10:
            dedup.append(r)
    return dedup


def _canonical(theta: np.ndarray) -> np.ndarray:
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(-theta + np.pi, 2.0 * np.pi)
    return np.pi - wrapped


def _equilibrium_theta(config: SystemConfig, sigma: np.ndarray, r: float) -> np.ndarray:
    ratio = np.clip(config.omega / (config.kappa * r), -1.0, 1.0)
    base = np.arcsin(ratio)
    theta = np.where(sigma > 0, base, np.pi - base)
    return _canonical(theta)


def _record(config: SystemConfig, sigma: np.ndarray, r: float, theta: np.ndarray) -> EquilibriumRecord:
    div = model.divergence(config, model.sinusoidal(), theta)
    boundary = abs(abs(config.kappa) * r - config.omega_max) < 1e-12
    if boundary:
        stability, max_eig = "Indeterminate", float("nan")
    else:
        jac = model.jacobian(config, theta)
        max_eig = float(np.max(np.linalg.eigvals(jac).real))
        if max_eig > 1e-8:
            stability = "Unstable"
        elif max_eig < -1e-8:
            stability = "Stable"
        else:
            stability = "Indeterminate"
    return EquilibriumRecord(
        R=float(r),
        theta=theta,
        signature=Signature(sigma),
        divergence=div,
        stability=stability,
        max_eig_real=max_eig,
    )


def enumerate_equilibria(config: SystemConfig) -> list[EquilibriumRecord]:
    """All equilibria (mod 2*pi), via signature enumeration; at most 2^(N+1)."""
    if config.kappa == 0.0:
        raise DomainError("kappa must be nonzero")
    if config.n > 20:
        raise SizeLimitError("signature enumeration limited to N <= 20")
    records = []
    if np.all(config.omega == 0.0):
        for bits in range(2**config.n):
            mask = (bits >> np.arange(config.n)) & 1
            theta = np.where(mask == 1, np.pi, 0.0)
            sigma = np.where(mask == 1, -1, 1)
            r = float(np.mean(1.0 + np.cos(theta)))
            records.append(_record(config, sigma, r, theta))
        return records
    seen = []
    for bits in range(2**config.n):
        sigma = np.where((bits >> np.arange(config.n)) & 1 == 1, -1, 1)
        for r in solve_R_equation(config, Signature(sigma)):
            if r <= 0:
                continue
            theta = _equilibrium_theta(config, sigma, r)
            duplicate = False
            for prev in seen:
                diff = np.abs(model.wrap_to_pi(theta - prev))
                if np.max(diff) < DEDUP_TOL:
                    duplicate = True
                    break
            if duplicate:
                continue
            seen.append(theta)
            records.append(_record(config, sigma, r, theta))
    return records


def critical_coupling(omega) -> float:
    """Smallest coupling strength admitting an equilibrium.

    Solves the scalar balance equation for the auxiliary level u in
    [max|omega|, (2/sqrt(3))*max|omega|] by bisection; returns 0 for omega = 0
    (degenerate: every positive coupling admits equilibria).
    """
    omega = np.asarray(omega, dtype=float)
    omega_inf = float(np.max(np.abs(omega)))
    if omega_inf == 0.0:
        return 0.0
    n = omega.size
    omega2 = omega**2

    def h(u):
        s = np.sqrt(np.clip(1.0 - omega2 / u**2, 1e-300, None))
        return -1.0 - 2.0 / n * np.sum(s) + 1.0 / n * np.sum(1.0 / s)

    a = omega_inf * (1.0 + 1e-12)
    b = 2.0 / math.sqrt(3.0) * omega_inf
    if h(b) >= 0.0:
        u_star = b
    else:
        for _ in range(200):
            mid = 0.5 * (a + b)
            if h(mid) > 0.0:
                a = mid
            else:
                b = mid
            if (b - a) <= 1e-12 * b:
                break
        u_star = 0.5 * (a + b)
    s = np.sqrt(np.clip(1.0 - omega2 / u_star**2, 0.0, None))
    return float(n * u_star / (n + np.sum(s)))


def construct_prescribed_equilibrium(
    rho: float, config: SystemConfig
) -> tuple[EquilibriumRecord, int]:
    """Equilibrium whose order parameter is within [rho/4, 3*rho/2].

    Uses m leading oscillators on the principal branch and N-m on the mirrored
    branch, with 2m/N <= rho < (2m+2)/N, then solves the fixed-point equation
    on [rho0/2, 3*rho0/2].
    """
    if not 0.0 < rho <= 2.0:
        raise DomainError("rho must lie in (0, 2]")
    if config.n < 2.0 / rho:
        raise DomainError(f"requires N >= 2/rho: N={config.n}, 2/rho={2.0 / rho}")
    if config.kappa == 0.0:
        raise DomainError("kappa must be nonzero")
    ratio = config.omega_max / abs(config.kappa)
    if ratio >= rho**1.5 / 16.0:
        raise DomainError(
            f"requires max|omega|/|kappa| < rho^1.5/16: {ratio} >= {rho**1.5 / 16.0}"
        )
    m = min(int(math.floor(config.n * rho / 2.0 + 1e-12)), config.n)
    m = max(m, 1)
    rho0 = 2.0 * m / config.n
    sigma = np.where(np.arange(config.n) < m, 1, -1)
    if np.all(config.omega == 0.0):
        theta = np.where(sigma > 0, 0.0, np.pi)
        record = _record(config, sigma, rho0, theta)
        return record, m
    f = _r_equation(config, sigma)
    lo = max(0.5 * rho0, config.omega_max / abs(config.kappa))
    hi = 1.5 * rho0
    grid = np.linspace(lo, hi, SCAN_POINTS + 1)
    vals = f(grid)
    signs = np.sign(vals)
    change = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
    if change.size == 0:
        raise DomainError("no fixed-point root in the prescribed interval")
    k = int(change[np.argmin(np.abs(grid[change] - rho0))])
    a, b = grid[k], grid[k + 1]
    fa = vals[k]
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = float(f(mid))
        if abs(fm) < ROOT_TOL or b - a < 1e-16:
            break
        if fa * fm < 0:
            b = mid
        else:
            a, fa = mid, fm
    r = 0.5 * (a + b)
    theta = _equilibrium_theta(config, sigma, r)
    record = _record(config, sigma, r, theta)
    # per-oscillator bracket bounds around the branch centers
    center = np.where(sigma > 0, 0.0, np.pi)
    dist = np.abs(model.wrap_to_pi(theta - center))
    lo_bound = 2.0 * np.abs(config.omega) / (3.0 * rho * abs(config.kappa))
    hi_bound = 2.0 * np.pi * np.abs(config.omega) / (rho * abs(config.kappa))
    if np.any(dist < lo_bound - 1e-9) or np.any(dist > hi_bound + 1e-9):
        raise DomainError("constructed equilibrium violates the phase bracket bounds")
    return record, m


def _group_multiply(e1: dict, e2: dict, weights, conv, poly_w):
    """Multiply two elements of the radical group algebra.

    Elements map bitmasks of active radicals p_j to coefficient polynomials in
    r (ascending).  p_j^2 collapses to the polynomial r^2 - w_j.
    """
    out: dict = {}
    for m1, c1 in e1.items():
        for m2, c2 in e2.items():
            mask = m1 ^ m2
            poly = conv(c1, c2)
            both = m1 & m2
            j = 0
            while both:
                if both & 1:
                    poly = conv(poly, poly_w[j])
                both >>= 1
                j += 1
            if mask in out:
                out[mask] = _poly_add(out[mask], poly)
            else:
                out[mask] = poly
    return out


def _poly_add(a, b):
    if isinstance(a, np.ndarray):
        if len(a) < len(b):
            a, b = b, a
        out = a.copy()
        out[: len(b)] += b
        return out
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return out


def _conv_float(a, b):
    return np.convolve(a, b)


def _conv_exact(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def build_W_polynomial(config: SystemConfig, exact: bool = False) -> WPolynomial:
    """Degree-2^(N+1) polynomial whose roots bound equilibrium order parameters.

    Starts from r*(branch function) = r - r^2 + (1/N) sum_j sigma_j p_j with
    p_j = sqrt(r^2 - (omega_j/kappa)^2), then folds the product over all
    signatures by repeated norms (A + p_j B)(A - p_j B) = A^2 - (r^2 - w_j) B^2,
    which eliminates each radical in turn and leaves exact polynomial
    coefficients.  The exact path uses rational arithmetic (N <= 4).
    """
    if config.kappa == 0.0:
        raise DomainError("kappa must be nonzero")
    if np.all(config.omega == 0.0):
        raise DegenerateFrequenciesError("all frequencies vanish")
    n = config.n
    if n > 8:
        raise SizeLimitError("W polynomial limited to N <= 8")
    if exact:
        if n > 4:
            raise SizeLimitError("exact-rational W path limited to N <= 4")
        w = [Fraction(om).limit_denominator(10**12) ** 2 / Fraction(config.kappa).limit_denominator(10**12) ** 2
             for om in config.omega.tolist()]
        conv = _conv_exact
        poly_w = [[-wj, Fraction(0), Fraction(1)] for wj in w]
        base = {0: [Fraction(0), Fraction(1), Fraction(-1)]}  # r - r^2
        inv_n = Fraction(1, n)
        for j in range(n):
            base = _poly_add_term(base, 1 << j, [inv_n])
    else:
        w = (config.omega / config.kappa) ** 2
        conv = _conv_float
        poly_w = [np.array([-wj, 0.0, 1.0]) for wj in w]
        base = {0: np.array([0.0, 1.0, -1.0])}
        for j in range(n):
            base = _poly_add_term(base, 1 << j, np.array([1.0 / n]))
    element = base
    for j in range(n):
        bit = 1 << j
        a_part = {m: c for m, c in element.items() if not m & bit}
        b_part = {m ^ bit: c for m, c in element.items() if m & bit}
        a_sq = _group_multiply(a_part, a_part, w, conv, poly_w)
        b_sq = _group_multiply(b_part, b_part, w, conv, poly_w)
        # subtract (r^2 - w_j) * B^2
        for m, c in b_sq.items():
            scaled = conv(c, poly_w[j])
            neg = (
                -scaled if isinstance(scaled, np.ndarray) else [-x for x in scaled]
            )
            if m in a_sq:
                a_sq[m] = _poly_add(a_sq[m], neg)
            else:
                a_sq[m] = neg
        element = a_sq
    (mask, coeffs), = element.items()
    assert mask == 0
    if exact:
        coeffs = np.array([float(c) for c in coeffs])
    else:
        coeffs = np.asarray(coeffs, dtype=float)
    degree = 2 ** (n + 1)
    out = np.zeros(degree + 1)
    out[: min(len(coeffs), degree + 1)] = coeffs[: degree + 1]
    branch = (config.omega / config.kappa) ** 2
    return WPolynomial(coeffs=out, degree=degree, branch_w=branch)


def _poly_add_term(element: dict, mask: int, poly):
    out = dict(element)
    if mask in out:
        out[mask] = _poly_add(out[mask], poly)
    else:
        out[mask] = poly
    return out


def classify_stability(config: SystemConfig, eq: EquilibriumRecord) -> str:
    """Linear stability from Jacobian eigenvalues (thresholds +-1e-8)."""
    if abs(abs(config.kappa) * eq.R - config.omega_max) < 1e-12:
        return "Indeterminate"
    jac = model.jacobian(config, eq.theta)
    max_eig = float(np.max(np.linalg.eigvals(jac).real))
    if max_eig > 1e-8:
        return "Unstable"
    if max_eig < -1e-8:
        return "Stable"
    return "Indeterminate"


def equilibria_to_json(records: list[EquilibriumRecord], path) -> None:
    with open(path, "w") as fh:
        json.dump([r.to_json_dict() for r in records], fh, sort_keys=True)
