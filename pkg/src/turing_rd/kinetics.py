"""Dimensionless ratio-dependent predator-prey kinetics.

    dN/dt = N(1 - N) - alpha N P / (P + N)
    dP/dt = epsilon P [ -(gamma + delta beta P) / (1 + beta P) + N / (P + N) ]

Both right-hand sides are defined as 0 at the origin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, MultipleEquilibria, NoInteriorEquilibrium, NullclineSingularity


@dataclass(frozen=True)
class KineticParams:
    alpha: float = 1.1
    gamma: float = 0.05
    delta: float = 0.5
    epsilon: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "delta", "epsilon", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if self.gamma > self.delta:
            raise DomainError(f"need gamma <= delta, got gamma={self.gamma}, delta={self.delta}")


@dataclass(frozen=True)
class DimensionalParams:
    r: float
    K: float
    a: float
    b: float
    m: float
    gamma_dim: float
    delta_dim: float
    D1: float
    D2: float
    l_dim: float = 1.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        if self.gamma_dim > self.delta_dim:
            raise DomainError("need gamma_dim <= delta_dim")


@dataclass(frozen=True)
class Equilibrium:
    n_bar: float
    p_bar: float
    theta1: float
    theta2: float
    theta3: float
    theta4: float
    trace_a: float
    det_a: float
    # every interior equilibrium located by the scan, ascending in n
    roots: tuple = field(default=(), compare=False)

    @property
    def multiplicity(self) -> int:
        return max(1, len(self.roots))

    @property
    def thetas(self):
        return self.theta1, self.theta2, self.theta3, self.theta4

    @classmethod
    def at(cls, n_bar, p_bar, params: KineticParams, roots=()):
        t1, t2, t3, t4, tr, det = jacobian_thetas((n_bar, p_bar), params)
        return cls(n_bar, p_bar, t1, t2, t3, t4, tr, det, tuple(roots))


def _check_nonnegative(n, p):
    if np.any(np.asarray(n) < 0) or np.any(np.asarray(p) < 0):
        raise DomainError("densities must be nonnegative")


def mortality(p, params: KineticParams):
    """Predator mortality (gamma + delta beta p) / (1 + beta p), between gamma and delta."""
    if np.any(np.asarray(p) < 0):
        raise DomainError("predator density must be nonnegative")
    bp = params.beta * p
    return (params.gamma + params.delta * bp) / (1.0 + bp)


def reaction_terms(n, p, params: KineticParams):
    """Return (F1, F2) at (n, p); scalars or broadcastable arrays."""
    _check_nonnegative(n, p)
    if np.ndim(n) == 0 and np.ndim(p) == 0:
        n, p = float(n), float(p)
        total = n + p
        if total == 0.0:
            return 0.0, 0.0
        f1 = n * (1.0 - n) - params.alpha * n * p / total
        f2 = params.epsilon * p * (-mortality(p, params) + n / total)
        return f1, f2
    n, p = np.broadcast_arrays(np.asarray(n, dtype=float), np.asarray(p, dtype=float))
    total = n + p
    inv = np.divide(1.0, total, out=np.zeros_like(total), where=total > 0)
    f1 = n * (1.0 - n) - params.alpha * n * p * inv
    f2 = params.epsilon * p * (-mortality(p, params) + n * inv)
    return f1, f2


def prey_nullcline(n, params: KineticParams):
    """H1(n) = (1 - n) n / (alpha - (1 - n))."""
    denom = params.alpha - (1.0 - n)
    if denom == 0.0:
        raise NullclineSingularity(f"prey null-cline has a vertical asymptote at n={n}")
    return (1.0 - n) * n / denom


def predator_nullcline(n, params: KineticParams):
    """Nonnegative root P of  delta beta P^2 + (gamma - beta (1-delta) n) P - (1-gamma) n = 0."""
    if params.gamma >= 1.0:
        raise DomainError("gamma >= 1: no positive predator null-cline branch")
    if n < 0:
        raise DomainError("prey density must be nonnegative")
    if n == 0:
        return 0.0
    a = params.delta * params.beta
    b = params.gamma - params.beta * (1.0 - params.delta) * n
    c = -(1.0 - params.gamma) * n
    disc = math.sqrt(b * b - 4.0 * a * c)
    # c < 0 so the roots have opposite signs; pick the cancellation-free form
    if b <= 0:
        return (-b + disc) / (2.0 * a)
    return 2.0 * c / (-b - disc)


def jacobian_thetas(eq, params: KineticParams):
    """Closed-form Jacobian entries at an interior point.

    The kinetic Jacobian is [[t1, -t2], [t3, -t4]]; returns
    (t1, t2, t3, t4, trace, det).
    """
    n, p = eq
    if not (n > 0 and p > 0):
        raise DomainError("Jacobian entries need n > 0 and p > 0")
    al, ga, de, ep, be = params.alpha, params.gamma, params.delta, params.epsilon, params.beta
    s2 = (n + p) ** 2
    t1 = -n + al * n * p / s2
    t2 = al * n * n / s2
    t3 = ep * p * p / s2
    t4 = ep * be * p * (de - ga) / (1.0 + be * p) ** 2 + ep * n * p / s2
    return t1, t2, t3, t4, t1 - t4, t2 * t3 - t1 * t4


def kinetic_stability(eq: Equilibrium) -> str:
    return "stable" if (eq.trace_a < 0 and eq.det_a > 0) else "unstable"


def _scan_grid(lo, hi, count=2001):
    pts = np.concatenate([np.linspace(lo, hi, count), np.geomspace(lo, hi, count)])
    return np.unique(pts)


def _nullcline_gap(n, params: KineticParams):
    """H1(n) - H2(n) on an array; same closed forms as the scalar functions."""
    h1 = (1.0 - n) * n / (params.alpha - (1.0 - n))
    a = params.delta * params.beta
    b = params.gamma - params.beta * (1.0 - params.delta) * n
    c = -(1.0 - params.gamma) * n
    disc = np.sqrt(b * b - 4.0 * a * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        h2 = np.where(b <= 0, (-b + disc) / (2.0 * a), 2.0 * c / (-b - disc))
    return h1 - h2


def _bisect(g, lo, hi, xtol, ftol, max_iter):
    glo = g(lo)
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0 or (hi - lo <= xtol and abs(gm) <= ftol):
            break
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return mid


def find_equilibrium(params: KineticParams, xtol=1e-12, ftol=1e-12, max_iter=200) -> Equilibrium:
    """Locate the interior equilibrium as a crossing of the two null-clines.

    Scans H1 - H2 for sign changes on (max(0, 1 - alpha), 1) and bisects each
    one. With several crossings a MultipleEquilibria warning is issued and
    the first one in ascending n that is not a saddle (det A > 0) is
    returned. The sign of det A does not depend on epsilon, so neither
    does the choice.
    """
    if params.gamma >= 1.0:
        raise DomainError(f"gamma must be < 1 for an interior equilibrium, got {params.gamma}")
    lo = max(1e-9, 1.0 - params.alpha) + 1e-9
    hi = 1.0 - 1e-9

    def g(n):
        return prey_nullcline(n, params) - predator_nullcline(n, params)

    grid = _scan_grid(lo, hi)
    values = _nullcline_gap(grid, params)
    roots = []
    for i in np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0):
        a, b = grid[i], grid[i + 1]
        if values[i] == 0.0:
            n = a
        elif values[i + 1] == 0.0:
            continue  # picked up as the left end of the next interval
        else:
            n = _bisect(g, a, b, xtol, ftol, max_iter)
        roots.append((float(n), float(prey_nullcline(n, params))))
    roots = [r for r in roots if r[1] > 0]
    if not roots:
        raise NoInteriorEquilibrium(
            f"no crossing of the null-clines on ({lo:.3g}, {hi:.3g}) for {params}"
        )
    candidates = [Equilibrium.at(n, p, params, roots) for n, p in roots]
    if len(candidates) > 1:
        warnings.warn(
            f"{len(candidates)} interior equilibria found at n = "
            + ", ".join(f"{c.n_bar:.6g}" for c in candidates),
            MultipleEquilibria,
            stacklevel=2,
        )
    for cand in candidates:
        if cand.det_a > 0:
            return cand
    return candidates[0]


def nondimensionalize(dp: DimensionalParams):
    """Map dimensional constants onto (KineticParams, d1, d2, l)."""
    params = KineticParams(
        alpha=dp.a / (dp.m * dp.r),
        gamma=dp.gamma_dim / dp.b,
        delta=dp.delta_dim / dp.b,
        epsilon=dp.b / dp.r,
        beta=dp.K / dp.m,
    )
    return params, dp.D1 / dp.r, dp.D2 / dp.r, dp.l_dim
