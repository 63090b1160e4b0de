"""Experiment configuration: a line-oriented ``key = value`` document.

``#`` starts a comment. Either the dimensionless kinetic block (alpha,
gamma, delta, epsilon, beta with d1, d2, l) or the dimensional block (r, K,
a, b, m, gamma_dim, delta_dim, D1, D2, l_dim) may be given, not both.
Every key is optional in the kinetic block; missing ones take the defaults
in KEYS. The dimensional block must be complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError, ConfigTypeError, MissingKey, UnknownKey
from .kinetics import DimensionalParams, KineticParams, nondimensionalize
from .solver import SolverConfig
from .turing import DiffusionParams


def _auto_float(text):
    return None if text.strip().lower() in ("auto", "none", "") else float(text)


def _opt_int(text):
    return None if text.strip().lower() in ("auto", "none", "") else int(text)


def _opt_str(text):
    return None if text.strip().lower() in ("", "none") else text


# key: (parser, default, help)
KEYS = {
    "alpha": (float, 1.1, "dimensionless predation rate"),
    "gamma": (float, 0.05, "minimal predator mortality"),
    "delta": (float, 0.5, "limiting predator mortality"),
    "epsilon": (float, 1.0, "predator time-scale ratio"),
    "beta": (float, 1.0, "interference ratio K/m"),
    "d1": (float, 0.005, "prey diffusivity"),
    "d2": (float, 0.2, "predator diffusivity"),
    "l": (float, 1.0, "habitat length"),
    "r": (float, None, "dimensional: prey growth rate"),
    "K": (float, None, "dimensional: carrying capacity"),
    "a": (float, None, "dimensional: predation constant"),
    "b": (float, None, "dimensional: conversion constant"),
    "m": (float, None, "dimensional: interference constant"),
    "gamma_dim": (float, None, "dimensional: minimal mortality"),
    "delta_dim": (float, None, "dimensional: limiting mortality"),
    "D1": (float, None, "dimensional: prey diffusivity"),
    "D2": (float, None, "dimensional: predator diffusivity"),
    "l_dim": (float, None, "dimensional: habitat length"),
    "h": (float, 0.005, "mesh size"),
    "dt": (_auto_float, None, "time step, or auto for dt_safety x bound"),
    "dt_safety": (float, 0.95, "fraction of the positivity bound used by auto dt"),
    "t_end": (float, 1000.0, "final time"),
    "snapshot_stride": (_opt_int, None, "steps between snapshots, or auto"),
    "n_snapshots": (int, 200, "snapshots per run when the stride is auto"),
    "steady_tol": (float, 1e-6, "Linf tolerance for steady state"),
    "probe_x": (float, 0.25, "monitoring position"),
    "s": (float, 0.1, "pattern amplitude"),
    "reference": (str, "equilibrium", "equilibrium | pattern | none"),
    "initial": (str, "pattern", "equilibrium | pattern | path to an x,N,P file"),
    "out": (_opt_str, None, "output directory"),
    "d1_min": (float, 0.001, "sweep: smallest d1"),
    "d1_max": (float, 0.008, "sweep: largest d1"),
    "d1_count": (int, 50, "sweep: number of d1 values"),
    "d2_min": (float, 0.05, "sweep: smallest d2"),
    "d2_max": (float, 0.5, "sweep: largest d2"),
    "d2_count": (int, 50, "sweep: number of d2 values"),
    "workers": (int, 1, "sweep: worker processes"),
}

KINETIC_KEYS = ("alpha", "gamma", "delta", "epsilon", "beta", "d1", "d2", "l")
DIMENSIONAL_KEYS = ("r", "K", "a", "b", "m", "gamma_dim", "delta_dim", "D1", "D2", "l_dim")


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: float = 1.1
    gamma: float = 0.05
    delta: float = 0.5
    epsilon: float = 1.0
    beta: float = 1.0
    d1: float = 0.005
    d2: float = 0.2
    l: float = 1.0
    r: float | None = None
    K: float | None = None
    a: float | None = None
    b: float | None = None
    m: float | None = None
    gamma_dim: float | None = None
    delta_dim: float | None = None
    D1: float | None = None
    D2: float | None = None
    l_dim: float | None = None
    h: float = 0.005
    dt: float | None = None
    dt_safety: float = 0.95
    t_end: float = 1000.0
    snapshot_stride: int | None = None
    n_snapshots: int = 200
    steady_tol: float = 1e-6
    probe_x: float = 0.25
    s: float = 0.1
    reference: str = "equilibrium"
    initial: str = "pattern"
    out: str | None = None
    d1_min: float = 0.001
    d1_max: float = 0.008
    d1_count: int = 50
    d2_min: float = 0.05
    d2_max: float = 0.5
    d2_count: int = 50
    workers: int = 1

    @property
    def dimensional(self) -> bool:
        return self.r is not None

    def kinetic_params(self) -> KineticParams:
        if self.dimensional:
            return nondimensionalize(self.dimensional_params())[0]
        return KineticParams(self.alpha, self.gamma, self.delta, self.epsilon, self.beta)

    def dimensional_params(self) -> DimensionalParams:
        return DimensionalParams(*(getattr(self, k) for k in DIMENSIONAL_KEYS))

    def diffusion(self) -> DiffusionParams:
        return DiffusionParams(self.d1, self.d2, self.l)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            h=self.h,
            t_end=self.t_end,
            dt=self.dt,
            dt_safety=self.dt_safety,
            snapshot_stride=self.snapshot_stride,
            n_snapshots=self.n_snapshots,
            probe_x=self.probe_x,
            steady_tol=self.steady_tol,
            reference=self.reference,
            pattern_s=self.s,
        )


def _validate(cfg: ExperimentConfig) -> ExperimentConfig:
    for name in ("h", "t_end", "steady_tol", "l", "d1", "d2"):
        value = getattr(cfg, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be positive, got {value!r}")
    if cfg.reference not in ("equilibrium", "pattern", "none"):
        raise ConfigError(f"reference must be equilibrium, pattern or none, got {cfg.reference!r}")
    if cfg.d1_count < 2 or cfg.d2_count < 2:
        raise ConfigError("sweep counts must be >= 2")
    if not (0 < cfg.d1_min <= cfg.d1_max and 0 < cfg.d2_min <= cfg.d2_max):
        raise ConfigError("sweep ranges must be positive and ordered")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def from_values(values: dict, lines: dict | None = None) -> ExperimentConfig:
    """Build a config from already-typed values, enforcing the block rules."""
    lines = lines or {}
    dim_given = [k for k in DIMENSIONAL_KEYS if k in values]
    if dim_given:
        missing = [k for k in DIMENSIONAL_KEYS if k not in values]
        if missing:
            raise MissingKey(f"dimensional block incomplete, missing: {', '.join(missing)}")
        clash = [k for k in KINETIC_KEYS if k in values]
        if clash:
            raise ConfigError(
                f"give either the kinetic or the dimensional block, not both ({', '.join(clash)})",
                lines.get(clash[0]),
            )
        dp = DimensionalParams(*(values[k] for k in DIMENSIONAL_KEYS))
        kp, d1, d2, l = nondimensionalize(dp)
        values = dict(values, alpha=kp.alpha, gamma=kp.gamma, delta=kp.delta, epsilon=kp.epsilon,
                      beta=kp.beta, d1=d1, d2=d2, l=l)
    return _validate(ExperimentConfig(**values))


def parse_config(text: str) -> ExperimentConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise UnknownKey(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        parser = KEYS[key][0]
        try:
            values[key] = parser(value)
        except ValueError:
            raise ConfigTypeError(f"{key}: cannot parse {value!r}", lineno) from None
        lines[key] = lineno
    return from_values(values, lines)


def override(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return _validate(replace(cfg, **changes)) if changes else cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    skip = KINETIC_KEYS if cfg.dimensional else DIMENSIONAL_KEYS
    out = []
    for f in fields(cfg):
        if f.name in skip:
            continue
        value = getattr(cfg, f.name)
        if value is None:
            if f.name in DIMENSIONAL_KEYS:
                continue
            value = "auto" if f.name in ("dt", "snapshot_stride") else "none"
        elif isinstance(value, float):
            value = repr(value)
        out.append(f"{f.name} = {value}")
    return "\n".join(out) + "\n"


def describe_keys() -> str:
    width = max(map(len, KEYS))
    rows = []
    for key, (_, default, text) in KEYS.items():
        shown = "auto" if default is None and key in ("dt", "snapshot_stride") else default
        rows.append(f"  {key:<{width}}  {text} (default: {shown})")
    return "\n".join(rows)
