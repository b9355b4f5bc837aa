"""
Run configuration module.

A run is described by one JSON document: either a drift matrix or a named
scenario, an initial state, a tagged noise object and the sweep grids.
CLI flags override individual fields.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from components.errors import ConfigError, CutoffLabError
from components.noise import Brownian, NoiseSpec, parse_noise_spec
from components.scenarios import ScenarioSpec, build_scenario

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
THREADS_ENV = "CUTOFFLAB_THREADS"

DEFAULT_P = 2.0
DEFAULT_EPS_GRID = (1e-2, 1e-3)
DEFAULT_R_GRID = (-1.0, 0.0, 1.0, 2.0)
DEFAULT_DELTA_GRID = (0.5, 2.0)
DEFAULT_WINDOW = 1.0
DEFAULT_SAMPLES = 2000
DEFAULT_SEED = 0
DEFAULT_ETA = 0.1
DEFAULT_OUT_DIR = "out"
MIN_SAMPLES = 100


@dataclass(frozen=True)
class RunConfig:
    scenario: Optional[str] = None
    scenario_params: dict = field(default_factory=dict)
    drift: Optional[Tuple[Tuple[float, ...], ...]] = None
    initial_state: Optional[Tuple[float, ...]] = None
    noise: Optional[dict] = None
    p: float = DEFAULT_P
    moment_order: Optional[float] = None
    eps_grid: Tuple[float, ...] = DEFAULT_EPS_GRID
    r_grid: Tuple[float, ...] = DEFAULT_R_GRID
    delta_grid: Tuple[float, ...] = DEFAULT_DELTA_GRID
    window: float = DEFAULT_WINDOW
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    out_dir: str = DEFAULT_OUT_DIR
    horizon: Optional[float] = None
    eta: float = DEFAULT_ETA
    dt: Optional[float] = None

    @property
    def observable_order(self) -> float:
        return self.p if self.moment_order is None else self.moment_order


def _floats(values, name: str) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name} must be a list of numbers") from e


def validate_config(cfg: RunConfig) -> RunConfig:
    if (cfg.scenario is None) == (cfg.drift is None):
        raise ConfigError("give exactly one of 'scenario' and 'drift'")
    if any(not 0.0 < e < 1.0 for e in cfg.eps_grid):
        raise ConfigError("epsilon values must lie in (0, 1)")
    if cfg.samples < MIN_SAMPLES:
        raise ConfigError(f"samples must be at least {MIN_SAMPLES}")
    if not cfg.p > 0 or not cfg.observable_order > 0:
        raise ConfigError("orders p and p' must be positive")
    if not cfg.window > 0 or not cfg.eta > 0:
        raise ConfigError("window and eta must be positive")
    if cfg.horizon is not None and not cfg.horizon > 0:
        raise ConfigError("horizon must be positive")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")
    return cfg


def config_from_dict(obj: dict) -> RunConfig:
    """Build a RunConfig from the parsed JSON document; raises ConfigError."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    known = {f for f in RunConfig.__dataclass_fields__}
    aliases = {"epsilon_grid": "eps_grid", "wasserstein_order": "p"}
    kwargs = {}
    for key, value in obj.items():
        key = aliases.get(key, key)
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[key] = value
    scenario = kwargs.get("scenario")
    if isinstance(scenario, dict):
        kwargs["scenario"] = scenario.get("name")
        kwargs["scenario_params"] = dict(scenario.get("params", {}))
    if kwargs.get("drift") is not None:
        kwargs["drift"] = tuple(_floats(row, "drift") for row in kwargs["drift"])
    if kwargs.get("initial_state") is not None:
        kwargs["initial_state"] = _floats(kwargs["initial_state"], "initial_state")
    for grid in ("eps_grid", "r_grid", "delta_grid"):
        if grid in kwargs:
            kwargs[grid] = _floats(kwargs[grid], grid)
    try:
        cfg = RunConfig(**kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    return validate_config(cfg)


def load_run_config(path: str):
    """
    Read a run configuration from disk.

    Returns:
        tuple: (success: bool, message: str, config: RunConfig | None)
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except FileNotFoundError:
        return False, f"Config file not found: {path}", None
    except json.JSONDecodeError as e:
        return False, f"Config is not valid JSON: {e}", None
    try:
        return True, "Config loaded", config_from_dict(obj)
    except ConfigError as e:
        return False, f"Invalid config: {e}", None


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply non-None CLI overrides and re-validate."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "scenario" in changes:
        changes.setdefault("drift", None)
    return validate_config(replace(cfg, **changes))


def noise_from_config(cfg: RunConfig, dim: int) -> Optional[NoiseSpec]:
    if cfg.noise is None:
        return None
    try:
        spec = parse_noise_spec(cfg.noise)
    except (KeyError, TypeError, ValueError, CutoffLabError) as e:
        raise ConfigError(f"bad noise specification: {e}") from e
    if spec.dim != dim:
        raise ConfigError(f"noise has dimension {spec.dim}, system has {dim}")
    return spec


def build_system(cfg: RunConfig) -> ScenarioSpec:
    """Resolve the scenario or explicit drift into a ScenarioSpec."""
    if cfg.scenario is not None:
        params = dict(cfg.scenario_params)
        if cfg.initial_state is not None:
            key = "z" if cfg.scenario == "oscillator" else "x"
            params[key] = list(cfg.initial_state)
        system = build_scenario(cfg.scenario, params)
        noise = noise_from_config(cfg, system.drift.shape[0])
        return replace(system, noise=noise) if noise is not None else system

    Q = np.asarray(cfg.drift, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ConfigError("drift must be a square matrix")
    d = Q.shape[0]
    if cfg.initial_state is None or len(cfg.initial_state) != d:
        raise ConfigError(f"initial_state must have {d} entries")
    noise = noise_from_config(cfg, d) or Brownian(np.eye(d))
    return ScenarioSpec(name="custom", drift=Q, initial=np.asarray(cfg.initial_state), noise=noise)


def threads_from_env() -> Optional[int]:
    value = os.environ.get(THREADS_ENV)
    if not value:
        return None
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, value)
        return None
