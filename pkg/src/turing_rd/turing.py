"""Linear stability of the homogeneous equilibrium under Neumann diffusion.

A perturbation of shape cos(j pi x / l) evolves with the mode matrix
B_j = A - zeta_j diag(d1, d2), zeta_j = (j pi / l)^2.  Since

    det B_j = det A + zeta_j (d1 t4 - d2 t1) + zeta_j^2 d1 d2

is a convex quadratic in zeta, the destabilised modes are exactly the
integers whose zeta_j falls strictly between its two real roots.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AmplitudeClipped, DomainError, EmptyWindow, NotSingular, NumericalFailure, WindowViolation
from .kinetics import Equilibrium, kinetic_stability

NONPARALLEL_HYPOTHESIS = "transversality: (0, eta2) not parallel to the stable mode-1 eigenvector"


@dataclass(frozen=True)
class DiffusionParams:
    d1: float = 0.005
    d2: float = 0.2
    l: float = 1.0

    def __post_init__(self):
        for name in ("d1", "d2", "l"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class LinearMode:
    j: int
    zeta: float
    trace_b: float
    det_b: float
    eigenvalues: tuple

    @property
    def growth_rate(self) -> float:
        return max(ev.real for ev in self.eigenvalues)


class Verdict(str, enum.Enum):
    KINETIC_UNSTABLE = "KineticUnstable"
    ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
    TURING_UNSTABLE = "TuringUnstable"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class StabilityVerdict:
    kind: Verdict
    unstable_modes: tuple = ()
    margin: float = math.nan
    # the continuous-zeta sufficient condition, reported alongside the exact scan
    sufficient_condition: bool = False
    unverified: tuple = field(default=())


@dataclass(frozen=True)
class PatternSpec:
    s: float
    eta1: float
    eta2: float
    d2_crit: float

    def __post_init__(self):
        if self.eta1 == 0 and self.eta2 == 0:
            raise ValueError("pattern direction must be nonzero")


def mode_eigenvalue(j: int, l: float) -> float:
    if j < 0 or l <= 0:
        raise DomainError("need j >= 0 and l > 0")
    return (j * math.pi / l) ** 2


def _det_b(eq: Equilibrium, d1, d2, zeta):
    return eq.det_a + zeta * (d1 * eq.theta4 - d2 * eq.theta1) + zeta * zeta * d1 * d2


def mode_matrix(eq: Equilibrium, dp: DiffusionParams, j: int) -> LinearMode:
    zeta = mode_eigenvalue(j, dp.l)
    tr = eq.trace_a - zeta * (dp.d1 + dp.d2)
    det = _det_b(eq, dp.d1, dp.d2, zeta)
    root = cmath.sqrt(tr * tr - 4.0 * det)
    return LinearMode(j, zeta, tr, det, (0.5 * (tr + root), 0.5 * (tr - root)))


def mode_matrix_array(eq: Equilibrium, dp: DiffusionParams, j: int) -> np.ndarray:
    zeta = mode_eigenvalue(j, dp.l)
    return np.array(
        [[eq.theta1 - zeta * dp.d1, -eq.theta2], [eq.theta3, -eq.theta4 - zeta * dp.d2]]
    )


def _zeta_roots(eq: Equilibrium, d1, d2):
    """Real roots of det B(zeta) = 0, or None when det B > 0 for all real zeta."""
    a = d1 * d2
    b = d1 * eq.theta4 - d2 * eq.theta1
    c = eq.det_a
    disc = b * b - 4.0 * a * c
    if disc <= 0:
        return None
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    r1, r2 = q / a, (c / q if q != 0 else -q / a)
    return min(r1, r2), max(r1, r2)


def _unstable_modes(eq: Equilibrium, dp: DiffusionParams):
    roots = _zeta_roots(eq, dp.d1, dp.d2)
    if roots is None or roots[1] <= 0:
        return ()
    lo, hi = max(roots[0], 0.0), roots[1]
    j_lo = max(1, math.floor(dp.l * math.sqrt(lo) / math.pi) - 1)
    j_hi = math.ceil(dp.l * math.sqrt(hi) / math.pi) + 1
    # the root interval only narrows the search; membership is decided on det B_j itself
    return tuple(
        j for j in range(j_lo, j_hi + 1) if _det_b(eq, dp.d1, dp.d2, mode_eigenvalue(j, dp.l)) < 0
    )


def default_j_max(eq: Equilibrium, dp: DiffusionParams) -> int:
    """Scan bound past which zeta_j d1 > t1, so that det B_j > 0 for every larger j."""
    reach = dp.l * math.sqrt(max(eq.theta1, 0.0) / dp.d1) / math.pi
    return max(1000, math.ceil(reach) + 2)


def unstable_modes_bruteforce(eq: Equilibrium, dp: DiffusionParams, j_max=None):
    if j_max is None:
        j_max = default_j_max(eq, dp)
    j = np.arange(1, j_max + 1)
    zeta = (j * np.pi / dp.l) ** 2
    det = eq.det_a + zeta * (dp.d1 * eq.theta4 - dp.d2 * eq.theta1) + zeta**2 * dp.d1 * dp.d2
    return tuple(int(k) for k in j[det < 0])


def _margin(eq: Equilibrium, dp: DiffusionParams) -> float:
    """Minimum of det B_j over j >= 0, taken at the integers around the parabola vertex."""
    vertex = -(dp.d1 * eq.theta4 - dp.d2 * eq.theta1) / (2.0 * dp.d1 * dp.d2)
    candidates = {0, 1}
    if vertex > 0:
        jv = dp.l * math.sqrt(vertex) / math.pi
        candidates.update({math.floor(jv), math.ceil(jv)})
    return min(_det_b(eq, dp.d1, dp.d2, mode_eigenvalue(j, dp.l)) for j in candidates)


def sufficient_instability(eq: Equilibrium, dp: DiffusionParams) -> bool:
    """Continuous-zeta instability test; ignores that only zeta_j are admissible."""
    b = dp.d1 * eq.theta4 - dp.d2 * eq.theta1
    return b < 0 and b * b - 4.0 * dp.d1 * dp.d2 * eq.det_a > 0


def classify(eq: Equilibrium, dp: DiffusionParams, j_max=None) -> StabilityVerdict:
    """Classify the equilibrium for diffusivities (d1, d2).

    The mode set is found from the roots of det B(zeta). Passing ``j_max``
    switches to a brute-force scan of j = 1..j_max instead.
    """
    margin = _margin(eq, dp)
    if kinetic_stability(eq) != "stable":
        return StabilityVerdict(Verdict.KINETIC_UNSTABLE, (), margin)
    if j_max is None:
        modes = _unstable_modes(eq, dp)
    else:
        modes = unstable_modes_bruteforce(eq, dp, j_max)
    suff = sufficient_instability(eq, dp)
    if modes:
        return StabilityVerdict(Verdict.TURING_UNSTABLE, modes, margin, suff, (NONPARALLEL_HYPOTHESIS,))
    return StabilityVerdict(Verdict.ASYMPTOTICALLY_STABLE, (), margin, suff)


def d1_window(eq: Equilibrium, l: float = 1.0):
    """Range [t1/zeta_2, t1/zeta_1) of d1 for which mode 1 bifurcates first as d2 grows."""
    if eq.theta1 <= 0:
        raise EmptyWindow(
            f"theta1 = {eq.theta1:.6g} <= 0: the equilibrium is stable for every d2 > 0"
        )
    return eq.theta1 / mode_eigenvalue(2, l), eq.theta1 / mode_eigenvalue(1, l)


def d2_critical(eq: Equilibrium, d1: float, l: float = 1.0, rtol=1e-8) -> float:
    """Predator diffusivity at which det B_1 vanishes."""
    lower, upper = d1_window(eq, l)
    if not (lower <= d1 < upper):
        raise WindowViolation(f"d1 = {d1:.6g} outside the bifurcation window [{lower:.6g}, {upper:.6g})")
    z1 = mode_eigenvalue(1, l)
    t1, _, _, t4 = eq.thetas
    d2 = (eq.det_a + z1 * d1 * t4) / (z1 * (t1 - z1 * d1))
    residual = _det_b(eq, d1, d2, z1)
    scale = abs(eq.det_a) + z1 * d1 * t4 + z1 * d2 * abs(t1) + z1 * z1 * d1 * d2
    if abs(residual) > rtol * scale:
        raise NumericalFailure(f"det B_1 = {residual:.3e} at the computed critical d2 = {d2:.12g}")
    return d2


def critical_eigenvector(eq: Equilibrium, d1: float, d2: float, l: float = 1.0, tol=1e-6):
    """Unit kernel vector (eta1, eta2) of B_1, oriented so that eta2 > 0."""
    b1 = mode_matrix_array(eq, DiffusionParams(d1, d2, l), 1)
    norm = np.abs(b1).sum(axis=1).max()
    if abs(np.linalg.det(b1)) > tol * norm * norm:
        raise NotSingular(f"B_1 is not singular at d2 = {d2:.12g} (det = {np.linalg.det(b1):.3e})")
    _, _, vt = np.linalg.svd(b1)
    eta = vt[-1]
    if eta[1] < 0 or (eta[1] == 0 and eta[0] < 0):
        eta = -eta
    eta = eta / np.linalg.norm(eta)
    return float(eta[0]), float(eta[1])


def pattern_spec(eq: Equilibrium, d1: float, s: float, l: float = 1.0) -> PatternSpec:
    d2c = d2_critical(eq, d1, l)
    eta1, eta2 = critical_eigenvector(eq, d1, d2c, l)
    return PatternSpec(s, eta1, eta2, d2c)


def small_amplitude_pattern(eq: Equilibrium, ps: PatternSpec, x, l: float = 1.0):
    """First-order stationary profile  u_bar + s (eta1, eta2) cos(pi x / l)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > l * (1 + 1e-12)):
        raise DomainError("pattern positions must lie in [0, l]")
    c = np.cos(np.pi * x / l)
    n = eq.n_bar + ps.s * ps.eta1 * c
    p = eq.p_bar + ps.s * ps.eta2 * c
    if np.any(n < 0) or np.any(n > 1) or np.any(p < 0):
        warnings.warn(
            f"pattern with s={ps.s} leaves 0 <= N <= 1, P >= 0 "
            f"(N in [{n.min():.4g}, {n.max():.4g}], P min {p.min():.4g})",
            AmplitudeClipped,
            stacklevel=2,
        )
    return n, p
