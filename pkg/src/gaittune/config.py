"""Scenario configuration files: JSON schema, validation, loading.

Top-level keys (all optional except ``scenario``):

    scenario            nominal | push | slip | push_and_slip | custom
    mode                two_weight | six_weight
    budget, seed        integers
    mu_surface          float, overrides the preset
    pushes              list of [t_start, t_end, fx, fy, fz]
    push_scale          float, proxy push calibration factor
    mass_scale          float
    com_height_offset   float [m]
    n_steps             integer
    step_duration       float [s]
    plan_dt             float [s]
    bounds              {"beta": [lo, hi], "gamma": [lo, hi], "alpha": [lo, hi]}
    objective           {"v_des", "fall_weight", "h_des", "threshold"}
    weights             {"alpha", "beta", "gamma"} or the six-key split
                        (used by the plan/simulate subcommands)

Unknown keys are rejected by name.
"""

from __future__ import annotations

import json
from pathlib import Path

from gaittune.pipeline import ObjectiveConfig, ScenarioConfig, scenario_preset
from gaittune.qp import GaitWeights

__all__ = ["ConfigError", "load_config", "parse_config", "LoadedConfig"]


class ConfigError(ValueError):
    """Schema violation; the message names the offending key."""


_TOP_KEYS = {
    "scenario", "mode", "budget", "seed", "mu_surface", "pushes",
    "push_scale", "mass_scale", "com_height_offset", "n_steps",
    "step_duration", "plan_dt", "bounds", "objective", "weights",
}
_OBJECTIVE_KEYS = {"v_des", "fall_weight", "h_des", "threshold"}
_BOUNDS_KEYS = {"alpha", "beta", "gamma"}
_WEIGHT_KEYS = {"alpha", "beta", "gamma",
                "alpha_x", "alpha_y", "beta_x", "beta_y",
                "gamma_x", "gamma_y"}


class LoadedConfig:
    def __init__(self, scenario: ScenarioConfig, objective: ObjectiveConfig,
                 weights: GaitWeights | None, raw: dict):
        self.scenario = scenario
        self.objective = objective
        self.weights = weights
        self.raw = raw


def _expect(condition: bool, key: str, message: str):
    if not condition:
        raise ConfigError(f"config key '{key}': {message}")


def _number(raw, key):
    _expect(isinstance(raw, (int, float)) and not isinstance(raw, bool),
            key, f"expected a number, got {type(raw).__name__}")
    return float(raw)


def _integer(raw, key):
    _expect(isinstance(raw, int) and not isinstance(raw, bool),
            key, f"expected an integer, got {type(raw).__name__}")
    return int(raw)


def parse_config(raw: dict) -> LoadedConfig:
    _expect(isinstance(raw, dict), "<root>", "config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config key '{sorted(unknown)[0]}': unknown key")
    _expect("scenario" in raw, "scenario", "required key is missing")

    name = raw["scenario"]
    overrides = {}
    if "mode" in raw:
        overrides["mode"] = raw["mode"]
    for key in ("budget", "seed", "n_steps"):
        if key in raw:
            overrides[key] = _integer(raw[key], key)
    for key in ("mu_surface", "push_scale", "mass_scale",
                "com_height_offset", "step_duration", "plan_dt"):
        if key in raw:
            overrides[key] = _number(raw[key], key)
    if "pushes" in raw:
        pushes = raw["pushes"]
        _expect(isinstance(pushes, list), "pushes", "expected a list")
        parsed = []
        for i, p in enumerate(pushes):
            _expect(isinstance(p, list) and len(p) == 5, f"pushes[{i}]",
                    "expected [t_start, t_end, fx, fy, fz]")
            parsed.append(tuple(_number(v, f"pushes[{i}]") for v in p))
        overrides["pushes"] = tuple(parsed)
    if "bounds" in raw:
        bounds = raw["bounds"]
        _expect(isinstance(bounds, dict), "bounds", "expected an object")
        unknown = set(bounds) - _BOUNDS_KEYS
        if unknown:
            raise ConfigError(
                f"config key 'bounds.{sorted(unknown)[0]}': unknown key")
        for key, target in (("beta", "beta_bounds"), ("gamma", "gamma_bounds"),
                            ("alpha", "alpha_bounds")):
            if key in bounds:
                pair = bounds[key]
                _expect(isinstance(pair, list) and len(pair) == 2,
                        f"bounds.{key}", "expected [lo, hi]")
                overrides[target] = (_number(pair[0], f"bounds.{key}"),
                                     _number(pair[1], f"bounds.{key}"))
    try:
        scenario = scenario_preset(name, **overrides)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"config key 'scenario': {err}") from err

    obj_kwargs = {}
    if "objective" in raw:
        obj = raw["objective"]
        _expect(isinstance(obj, dict), "objective", "expected an object")
        unknown = set(obj) - _OBJECTIVE_KEYS
        if unknown:
            raise ConfigError(
                f"config key 'objective.{sorted(unknown)[0]}': unknown key")
        mapping = {"v_des": "desired_velocity", "fall_weight": "fall_weight",
                   "h_des": "desired_height", "threshold": "height_threshold"}
        for key, target in mapping.items():
            if key in obj:
                obj_kwargs[target] = _number(obj[key], f"objective.{key}")
    try:
        objective = ObjectiveConfig(**obj_kwargs)
    except ValueError as err:
        raise ConfigError(f"config key 'objective': {err}") from err

    weights = None
    if "weights" in raw:
        w = raw["weights"]
        _expect(isinstance(w, dict), "weights", "expected an object")
        unknown = set(w) - _WEIGHT_KEYS
        if unknown:
            raise ConfigError(
                f"config key 'weights.{sorted(unknown)[0]}': unknown key")
        vals = {k: _number(v, f"weights.{k}") for k, v in w.items()}
        try:
            if {"alpha", "beta", "gamma"} & set(vals):
                weights = GaitWeights.uniform(vals.get("alpha", 1.0),
                                              vals.get("beta", 0.0),
                                              vals.get("gamma", 0.0))
            else:
                weights = GaitWeights(**vals)
        except ValueError as err:
            raise ConfigError(f"config key 'weights': {err}") from err

    return LoadedConfig(scenario, objective, weights, raw)


def load_config(path) -> LoadedConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    return parse_config(raw)
