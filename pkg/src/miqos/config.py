"""JSON experiment configuration.

Keys carry their unit as a suffix (``frequency_hz``, ``avg_power_w``, ...).
Keys starting with ``_`` are comments and ignored; any other unknown key
is an error so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

from .channel import VACUUM_PERMEABILITY, CircuitParams, CoilGeometry, derive_link_budget
from .errors import InvalidParameterError
from .misalignment import build_distribution
from .numerics import QuadratureSpec, RootSpec
from .policy import PolicyConstraints

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "default_config", "DEFAULT_CONFIG"]

DEFAULT_CONFIG = "paper_section4.json"

_GEOMETRY_KEYS = {
    "turns_tx": "turns_tx",
    "turns_rx": "turns_rx",
    "radius_tx_m": "radius_tx",
    "radius_rx_m": "radius_rx",
    "distance_m": "distance",
    "permeability_h_per_m": "permeability",
}
_CIRCUIT_KEYS = {
    "frequency_hz": "frequency",
    "r_tx_ohm": "r_tx",
    "r_rx_ohm": "r_rx",
    "r_load_ohm": "r_load",
    "noise_power_w": "noise_power",
}
_CONSTRAINT_KEYS = {"r_max_bps_hz": "r_max", "avg_power_w": "avg_power"}
_OTHER_KEYS = {"theta_grid", "m_grid_points", "cdf_grid_size", "rng_seed", "quadrature", "root"}


class ConfigError(InvalidParameterError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: CoilGeometry
    circuit: CircuitParams
    constraints: PolicyConstraints
    theta_grid: tuple[float, ...] = ()
    m_grid_points: int = 1001
    cdf_grid_size: int = 4096
    rng_seed: int = 0
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    root: RootSpec = field(default_factory=RootSpec)

    def __post_init__(self):
        grid = self.theta_grid
        if any(not (math.isfinite(t) and t > 0) for t in grid):
            raise ConfigError("theta_grid entries must be finite and positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("theta_grid must be strictly increasing")
        if self.m_grid_points < 2:
            raise ConfigError("m_grid_points must be at least 2")
        if self.cdf_grid_size < 4:
            raise ConfigError("cdf_grid_size must be at least 4")

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ExperimentConfig":
        known = set(_GEOMETRY_KEYS) | set(_CIRCUIT_KEYS) | set(_CONSTRAINT_KEYS) | _OTHER_KEYS
        unknown = sorted(k for k in raw if k not in known and not k.startswith("_"))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        def pick(mapping, required=True):
            out = {}
            for key, name in mapping.items():
                if key in raw:
                    out[name] = raw[key]
                elif required and name != "permeability":
                    raise ConfigError(f"missing config key {key!r}")
            return out

        try:
            geom = pick(_GEOMETRY_KEYS)
            geom.setdefault("permeability", VACUUM_PERMEABILITY)
            return cls(
                geometry=CoilGeometry(**geom),
                circuit=CircuitParams(**pick(_CIRCUIT_KEYS)),
                constraints=PolicyConstraints(**pick(_CONSTRAINT_KEYS)),
                theta_grid=tuple(float(t) for t in raw.get("theta_grid", ())),
                m_grid_points=int(raw.get("m_grid_points", 1001)),
                cdf_grid_size=int(raw.get("cdf_grid_size", 4096)),
                rng_seed=int(raw.get("rng_seed", 0)),
                quadrature=QuadratureSpec(**raw.get("quadrature", {})),
                root=RootSpec(**raw.get("root", {})),
            )
        except ConfigError:
            raise
        except (InvalidParameterError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for mapping, obj in ((_GEOMETRY_KEYS, self.geometry), (_CIRCUIT_KEYS, self.circuit),
                             (_CONSTRAINT_KEYS, self.constraints)):
            for key, name in mapping.items():
                out[key] = getattr(obj, name)
        out["theta_grid"] = list(self.theta_grid)
        out["m_grid_points"] = self.m_grid_points
        out["cdf_grid_size"] = self.cdf_grid_size
        out["rng_seed"] = self.rng_seed
        out["quadrature"] = {k: getattr(self.quadrature, k) for k in
                             ("method", "abs_tol", "rel_tol", "max_subdivisions", "gauss_nodes")}
        out["root"] = {k: getattr(self.root, k) for k in
                       ("abs_tol", "max_iters", "bracket_expansion")}
        return out

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Copy with flat, unit-suffixed keys replaced (e.g. ``avg_power_w=20``)."""
        raw = self.to_dict()
        raw.update(changes)
        return ExperimentConfig.from_dict(raw)

    def link(self):
        """``(budget, dist)`` for this configuration."""
        budget = derive_link_budget(self.geometry, self.circuit)
        dist = build_distribution(budget.m_max, self.cdf_grid_size, self.quadrature)
        return budget, dist


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return ExperimentConfig.from_dict(raw)


def default_config() -> ExperimentConfig:
    text = resources.files("miqos.data").joinpath(DEFAULT_CONFIG).read_text()
    return ExperimentConfig.from_dict(json.loads(text))


def with_seed(cfg: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    return cfg if seed is None else replace(cfg, rng_seed=seed)
