"""Explicit finite-difference integrator for the reaction-diffusion system.

Forward Euler in time, centred second differences in space on the nodes
x_j = j h, j = 0..N_h.  Only interior nodes are time-stepped; the two end
values are recovered after every step from the one-sided second-order
Neumann closure  u_2 - 4 u_1 + 3 u_0 = 0  (and its mirror image).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numba
import numpy as np

from .errors import ConfigError, GridMismatch, GridTooSmall, NonFiniteState, StepRejected
from .kinetics import KineticParams, find_equilibrium
from .turing import DiffusionParams, pattern_spec, small_amplitude_pattern

DEFAULT_DT_SAFETY = 0.95


@dataclass(frozen=True)
class GridState:
    h: float
    n_values: np.ndarray
    p_values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.n_values, dtype=float)
        p = np.asarray(self.p_values, dtype=float)
        if n.shape != p.shape or n.ndim != 1:
            raise GridMismatch("prey and predator profiles must be 1-D and of equal length")
        object.__setattr__(self, "n_values", n)
        object.__setattr__(self, "p_values", p)

    @property
    def n_intervals(self) -> int:
        return self.n_values.size - 1

    @property
    def length(self) -> float:
        return self.h * self.n_intervals

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(self.n_values.size)

    @classmethod
    def uniform(cls, n, p, l=1.0, h=0.01, t=0.0):
        m = grid_intervals(l, h)
        return cls(h, np.full(m + 1, float(n)), np.full(m + 1, float(p)), t)


@dataclass(frozen=True)
class SolverConfig:
    h: float = 0.005
    t_end: float = 1000.0
    dt: float | None = None
    dt_safety: float = DEFAULT_DT_SAFETY
    snapshot_stride: int | None = None
    n_snapshots: int = 200
    probe_x: float = 0.25
    steady_tol: float = 1e-6
    # "equilibrium", "pattern" (uses pattern_s) or "none"
    reference: str = "equilibrium"
    pattern_s: float = 0.1
    reaction: bool = True

    def __post_init__(self):
        if not (self.h > 0 and self.t_end > 0):
            raise ConfigError("h and t_end must be positive")
        if not (0 < self.dt_safety <= 1):
            raise ConfigError("dt_safety must lie in (0, 1]")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.snapshot_stride is not None and self.snapshot_stride < 1:
            raise ConfigError("snapshot_stride must be >= 1")
        if self.n_snapshots < 1:
            raise ConfigError("n_snapshots must be >= 1")
        if self.reference not in ("equilibrium", "pattern", "none"):
            raise ConfigError(f"unknown reference {self.reference!r}")


class Extremes(NamedTuple):
    """Smallest N, largest N and smallest P seen, over all nodes and over interior nodes."""

    n_min: float
    n_max: float
    p_min: float
    interior_n_min: float
    interior_n_max: float
    interior_p_min: float

    @classmethod
    def from_array(cls, ext):
        return cls(*(float(e) for e in ext))

    @staticmethod
    def start(state: GridState | None = None):
        if state is None:
            return np.array([np.inf, -np.inf, np.inf] * 2)
        n, p = state.n_values, state.p_values
        return np.array([n.min(), n.max(), p.min(), n[1:-1].min(), n[1:-1].max(), p[1:-1].min()])

    @property
    def bounds_respected(self) -> bool:
        return self.n_min >= 0 and self.n_max <= 1 and self.p_min >= 0

    @property
    def interior_bounds_respected(self) -> bool:
        return self.interior_n_min >= 0 and self.interior_n_max <= 1 and self.interior_p_min >= 0


@dataclass
class RunReport:
    converged: bool
    t_final: float
    steps: int
    dt: float
    times: np.ndarray
    l2_series: np.ndarray
    linf_series: np.ndarray
    probe_series: np.ndarray  # shape (snapshots, 2): N and P at probe_x
    final_state: GridState
    snapshots: list = field(default_factory=list)
    extremes: Extremes = Extremes(*[math.nan] * 6)

    @property
    def bounds_respected(self) -> bool:
        return self.extremes.bounds_respected


def grid_intervals(l: float, h: float) -> int:
    m = round(l / h)
    if m < 1 or abs(m * h - l) > 1e-12 * max(1.0, l):
        raise ConfigError(f"mesh size h={h} does not divide the length l={l}")
    return int(m)


def max_timestep(params: KineticParams, dp: DiffusionParams, h: float) -> float:
    """Largest step for which the scheme keeps 0 <= N <= 1 and P >= 0."""
    h2 = h * h
    return min(
        h2 / (params.alpha * h2 + 2.0 * dp.d1),
        h2 / (h2 + 2.0 * dp.d1),
        h2 / (params.epsilon * params.delta * h2 + 2.0 * dp.d2),
    )


def apply_boundary(state: GridState) -> GridState:
    if state.n_intervals < 3:
        raise GridTooSmall(f"need at least 3 intervals, got {state.n_intervals}")
    out = []
    for v in (state.n_values, state.p_values):
        v = v.copy()
        v[0] = (4.0 * v[1] - v[2]) / 3.0
        v[-1] = (4.0 * v[-2] - v[-3]) / 3.0
        out.append(v)
    return replace(state, n_values=out[0], p_values=out[1])


@numba.njit(cache=True)
def _advance(n, p, nsteps, dt, h, d1, d2, al, ga, de, ep, be, reaction, ext):
    """Take nsteps in place; returns the failing step index or -1."""
    m = n.size
    nn = np.empty(m)
    pn = np.empty(m)
    c1 = dt * d1 / (h * h)
    c2 = dt * d2 / (h * h)
    for k in range(nsteps):
        for j in range(1, m - 1):
            nj = n[j]
            pj = p[j]
            f1 = 0.0
            f2 = 0.0
            if reaction:
                tot = nj + pj
                inv = 1.0 / tot if tot > 0.0 else 0.0
                f1 = nj * (1.0 - nj - al * pj * inv)
                f2 = ep * pj * (-(ga + de * be * pj) / (1.0 + be * pj) + nj * inv)
            nn[j] = nj + dt * f1 + c1 * (n[j - 1] - 2.0 * nj + n[j + 1])
            pn[j] = pj + dt * f2 + c2 * (p[j - 1] - 2.0 * pj + p[j + 1])
        for j in range(1, m - 1):
            n[j] = nn[j]
            p[j] = pn[j]
        n[0] = (4.0 * n[1] - n[2]) / 3.0
        p[0] = (4.0 * p[1] - p[2]) / 3.0
        n[m - 1] = (4.0 * n[m - 2] - n[m - 3]) / 3.0
        p[m - 1] = (4.0 * p[m - 2] - p[m - 3]) / 3.0
        for j in range(m):
            if not (math.isfinite(n[j]) and math.isfinite(p[j])):
                return k
            # slots 0-2 cover every node, 3-5 the interior only
            off = 3 if 0 < j < m - 1 else 0
            for o in range(0, off + 1, 3):
                if n[j] < ext[o]:
                    ext[o] = n[j]
                if n[j] > ext[o + 1]:
                    ext[o + 1] = n[j]
                if p[j] < ext[o + 2]:
                    ext[o + 2] = p[j]
    return -1


def advance(state: GridState, params: KineticParams, dp: DiffusionParams, dt: float, nsteps: int = 1,
            reaction: bool = True):
    """Take ``nsteps`` steps of size ``dt``; returns (new state, extremes seen)."""
    if state.n_intervals < 3:
        raise GridTooSmall(f"need at least 3 intervals, got {state.n_intervals}")
    bound = max_timestep(params, dp, state.h)
    if dt > bound * (1 + 1e-12):
        raise StepRejected(f"dt={dt:.6g} exceeds the positivity bound {bound:.6g}")
    n = state.n_values.copy()
    p = state.p_values.copy()
    ext = Extremes.start()
    failed = _advance(n, p, nsteps, dt, state.h, dp.d1, dp.d2, params.alpha, params.gamma,
                      params.delta, params.epsilon, params.beta, reaction, ext)
    if failed >= 0:
        raise NonFiniteState(f"non-finite value after step {failed + 1} at t={state.t + (failed + 1) * dt:.6g}")
    return GridState(state.h, n, p, state.t + nsteps * dt), Extremes.from_array(ext)


def step(state: GridState, params: KineticParams, dp: DiffusionParams, dt: float, reaction: bool = True):
    return advance(state, params, dp, dt, 1, reaction)[0]


def norms(state: GridState, reference):
    """(L2, Linf) distance between a state and reference profiles on the same grid."""
    n_ref, p_ref = (np.asarray(r, dtype=float) for r in reference)
    if n_ref.shape != state.n_values.shape or p_ref.shape != state.p_values.shape:
        raise GridMismatch("reference profiles do not match the state grid")
    dn = state.n_values - n_ref
    dp_ = state.p_values - p_ref
    linf = float(max(np.abs(dn).max(), np.abs(dp_).max()))
    l2 = float(math.sqrt(np.trapezoid(dn * dn + dp_ * dp_, dx=state.h)))
    return l2, linf


def reference_profiles(kind: str, params: KineticParams, dp: DiffusionParams, x, s=0.1, eq=None):
    if kind == "none":
        return None
    if eq is None:
        eq = find_equilibrium(params)
    if kind == "equilibrium":
        return np.full(len(x), eq.n_bar), np.full(len(x), eq.p_bar)
    ps = pattern_spec(eq, dp.d1, s, dp.l)
    return small_amplitude_pattern(eq, ps, x, dp.l)


def resolve_steps(params, dp, config: SolverConfig):
    """Uniform (dt, nsteps) landing exactly on t_end, with dt at most the requested step."""
    bound = max_timestep(params, dp, config.h)
    target = config.dt if config.dt is not None else config.dt_safety * bound
    if target > bound * (1 + 1e-12):
        raise StepRejected(f"dt={target:.6g} exceeds the positivity bound {bound:.6g}")
    nsteps = max(1, math.ceil(config.t_end / target - 1e-9))
    return config.t_end / nsteps, nsteps


def run(initial: GridState, params: KineticParams, dp: DiffusionParams, config: SolverConfig,
        reference=None) -> RunReport:
    """Integrate to ``config.t_end`` or until the state settles.

    Norms are taken against the configured reference at every snapshot
    (against the previous snapshot when the reference is "none"). The run
    stops early once two consecutive snapshots have Linf <= steady_tol.
    ``reference`` may be given explicitly as a pair of profiles.
    """
    if abs(initial.h - config.h) > 1e-15 or abs(initial.length - dp.l) > 1e-12 * max(1.0, dp.l):
        raise GridMismatch("initial state grid does not match the solver configuration")
    if initial.n_intervals < 3:
        raise GridTooSmall(f"need at least 3 intervals, got {initial.n_intervals}")
    x = initial.x
    if reference is None:
        reference = reference_profiles(config.reference, params, dp, x, config.pattern_s)
    if reference is not None:
        reference = tuple(np.asarray(r, dtype=float) for r in reference)
    dt, nsteps = resolve_steps(params, dp, config)
    stride = config.snapshot_stride or max(1, math.ceil(nsteps / config.n_snapshots))
    probe = min(max(config.probe_x, 0.0), dp.l)

    state = initial
    ext = Extremes.start(state)
    times, l2s, linfs, probes, snaps = [], [], [], [], []
    previous = None

    def record(s):
        ref = reference if reference is not None else previous
        l2, linf = norms(s, ref) if ref is not None else (math.nan, math.nan)
        times.append(s.t)
        l2s.append(l2)
        linfs.append(linf)
        probes.append((np.interp(probe, x, s.n_values), np.interp(probe, x, s.p_values)))
        snaps.append(s)
        return linf

    first = record(state)
    previous = (state.n_values, state.p_values)
    k = 0
    # the initial profile counts towards the two consecutive in-tolerance snapshots
    hits = 1 if first <= config.steady_tol else 0
    converged = False
    while k < nsteps:
        m = min(stride, nsteps - k)
        n = state.n_values.copy()
        p = state.p_values.copy()
        failed = _advance(n, p, m, dt, state.h, dp.d1, dp.d2, params.alpha, params.gamma, params.delta,
                          params.epsilon, params.beta, config.reaction, ext)
        if failed >= 0:
            raise NonFiniteState(f"non-finite value at t={(k + failed + 1) * dt:.6g}")
        k += m
        state = GridState(state.h, n, p, initial.t + k * dt)
        linf = record(state)
        previous = (n, p)
        hits = hits + 1 if linf <= config.steady_tol else 0
        if hits >= 2:
            converged = True
            break

    return RunReport(
        converged=converged,
        t_final=state.t,
        steps=k,
        dt=dt,
        times=np.array(times),
        l2_series=np.array(l2s),
        linf_series=np.array(linfs),
        probe_series=np.array(probes),
        final_state=state,
        snapshots=snaps,
        extremes=Extremes.from_array(ext),
    )


def write_profile(path, state: GridState):
    data = np.column_stack([state.x, state.n_values, state.p_values])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="x,N,P", comments="")


def read_profile(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ConfigError(f"{path}: expected columns x,N,P")
    return data[:, 0], data[:, 1], data[:, 2]


def write_run(report: RunReport, out_dir) -> Path:
    """Persist snapshots, their manifest and the norm series under ``out_dir``."""
    out = Path(out_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    lines = ["index,file,t"]
    for i, snap in enumerate(report.snapshots):
        name = f"snapshots/snap_{i:05d}.csv"
        write_profile(out / name, snap)
        lines.append(f"{i},{name},{snap.t:.17g}")
    (out / "manifest.csv").write_text("\n".join(lines) + "\n")
    table = np.column_stack([report.times, report.l2_series, report.linf_series, report.probe_series])
    np.savetxt(out / "norms.csv", table, fmt="%.17g", delimiter=",", header="t,l2,linf,N_probe,P_probe",
               comments="")
    return out
