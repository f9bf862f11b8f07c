"""Experiment configuration: schema, presets and conversion to library objects."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from .builders import FixedBandwidth, PowerBandwidth, ToeplitzSymbol
from .linalg import DEFAULT_TOLERANCES, Tolerances
from .perturbations import Kind, PerturbationSpec

__all__ = [
    "EXPERIMENTS",
    "SCHEMA",
    "PRESETS",
    "ConfigError",
    "load_config",
    "resolve",
    "validate",
    "config_hash",
    "symbol_from_config",
    "perturbation_from_config",
    "tolerances_from_config",
    "complex_from_config",
]

EXPERIMENTS = ["spectrum", "figure-zoo", "figure-growing", "figure-star", "rate",
               "bounds-audit", "jordan-audit", "sign-audit", "mc-replace"]

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "nonnormal experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "experiment": {"enum": EXPERIMENTS},
        "preset": {"type": "string"},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "n": {"type": "integer", "minimum": 1},
        "paper_n": {"type": "integer", "minimum": 1},
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "paper_n_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "panels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "symbol": {
            "type": "object",
            "additionalProperties": False,
            "required": ["coeffs"],
            "properties": {
                "coeffs": {"type": "object", "patternProperties": {"^-?[0-9]+$": _complex},
                           "additionalProperties": False},
                "bandwidth": {
                    "oneOf": [
                        {"type": "object", "additionalProperties": False, "required": ["fixed"],
                         "properties": {"fixed": {"type": "integer", "minimum": 0}}},
                        {"type": "object", "additionalProperties": False, "required": ["theta"],
                         "properties": {"theta": {"type": "number", "exclusiveMinimum": 0},
                                        "offset": {"type": "integer", "minimum": 0}}},
                    ]
                },
                "name": {"type": "string"},
            },
        },
        "perturbation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": [k.value for k in Kind]},
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "alpha": {"type": "number", "minimum": 0},
                "epsilon": {"type": "number", "minimum": 0},
            },
        },
        "probes": {"type": "array", "items": _complex},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "kappa": {"type": "number", "exclusiveMinimum": 0},
        "phi": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"center": _complex, "radius": {"type": "number", "exclusiveMinimum": 0},
                           "amplitude": {"type": "number"}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number", "exclusiveMinimum": 0}
                           for k in ("rank_rtol", "slack_atol", "unit_modulus", "weyl_atol")},
        },
    },
}


def _coeffs(mapping: dict[int, float]) -> dict[str, float]:
    return {str(k): v for k, v in mapping.items()}


_GROWING_COEFFS = {**{-j: 1.0 / (j + 1) ** 2.1 for j in range(0, 65)},
                   **{j: 0.999**j for j in range(6, 65)}}

PRESETS: dict[str, dict[str, Any]] = {
    "zoo-a": {
        "experiment": "spectrum",
        "description": "M1 with complex Gaussian noise scaled by n^-3",
        "symbol": {"coeffs": _coeffs({-5: 1, -3: 1, -1: 1, 2: 1, 4: -1, 6: 1}), "name": "M1"},
        "perturbation": {"kind": "ginibre-complex", "gamma": 3, "alpha": 0},
        "n": 300, "paper_n": 1500, "seed": 1,
    },
    "zoo-b": {
        "experiment": "spectrum",
        "description": "M2 with heavy-tailed U^-1/2 noise scaled by n^-3",
        "symbol": {"coeffs": _coeffs({-1: 2, 6: 1}), "name": "M2"},
        "perturbation": {"kind": "heavy-tailed", "gamma": 3, "alpha": 0},
        "n": 300, "paper_n": 1500, "seed": 1,
    },
    "zoo-c": {
        "experiment": "spectrum",
        "description": "M3 (I + n^-(gamma+1/2) G) with real Gaussian G",
        "symbol": {"coeffs": _coeffs({-2: 1, -1: 1, 1: 1, 2: -1.5}), "name": "M3"},
        "perturbation": {"kind": "multiplicative", "gamma": 3},
        "n": 300, "paper_n": 1500, "seed": 1,
    },
    "zoo-d": {
        "experiment": "spectrum",
        "description": "M4 with Haar unitary noise scaled by n^-3",
        "symbol": {"coeffs": _coeffs({-11: 10, -7: 1, -5: 1, -3: 9, -1: 1, 1: 5, 3: 9, 5: 5}),
                   "name": "M4"},
        "perturbation": {"kind": "haar-unitary", "gamma": 3, "alpha": 0},
        "n": 300, "paper_n": 1500, "seed": 1,
    },
    "growing": {
        "experiment": "figure-growing",
        "description": "growing bandwidth k_n = floor(n^(1/3)) - 1 with Haar unitary noise",
        "symbol": {"coeffs": _coeffs(_GROWING_COEFFS), "bandwidth": {"theta": 1 / 3, "offset": 1},
                   "name": "growing"},
        "perturbation": {"kind": "haar-unitary", "gamma": 3, "alpha": 0},
        "n": 512, "paper_n": 2000, "seed": 1, "probes": [[0.3, 0.3]], "eps": 0.25,
    },
    "star": {
        "experiment": "figure-star",
        "description": "symbol {a_-2 = 2, a_3 = -1} with real Gaussian noise scaled by n^-2",
        "symbol": {"coeffs": _coeffs({-2: 2, 3: -1}), "name": "star"},
        "perturbation": {"kind": "ginibre-real", "gamma": 2, "alpha": 0},
        "n": 500, "paper_n": 2000, "seed": 1,
    },
    "exam-iid": {
        "experiment": "rate",
        "description": "shift T plus n^-(1/2+gamma) real Gaussian noise, gamma = 1",
        "symbol": {"coeffs": _coeffs({-1: 1}), "name": "shift"},
        "perturbation": {"kind": "ginibre-real", "gamma": 1, "alpha": 0.5},
        "n_list": [64, 128, 256, 512], "paper_n_list": [64, 128, 256, 512, 1024],
        "seed": 1, "probes": [[0.5, 0.0], [0.0, 0.9]],
    },
    "p-smalln": {
        "experiment": "sign-audit",
        "description": "T plus a random sign matrix with entries +-n^-gamma, gamma = 5",
        "n": 25, "paper_n": 100, "seed": 1, "trials": 100,
        "perturbation": {"kind": "sign", "gamma": 5},
    },
}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "spectrum": {"n": 64, "perturbation": {"kind": "zero"}},
    "figure-zoo": {"panels": ["zoo-a", "zoo-b", "zoo-c", "zoo-d"]},
    "figure-growing": PRESETS["growing"],
    "figure-star": PRESETS["star"],
    "rate": PRESETS["exam-iid"],
    "bounds-audit": {"n": 32, "trials": 100, "eps": 0.2},
    "jordan-audit": {"trials": 1000},
    "sign-audit": PRESETS["p-smalln"],
    "mc-replace": {"n": 16, "m": 2000, "trials": 1, "eps": 0.05,
                   "phi": {"center": 0, "radius": 1.0, "amplitude": 1.0},
                   "perturbation": {"kind": "ginibre-complex", "gamma": 1, "alpha": 0}},
}


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


def load_config(path: str | Path) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        data = yaml.safe_load(text) if p.suffix.lower() in (".yaml", ".yml") else json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def validate(cfg: dict[str, Any]) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("config failed schema validation:\n  " + "\n  ".join(lines))


def resolve(experiment: str, user: dict[str, Any] | None = None, *, seed: int | None = None,
            paper_scale: bool = False) -> dict[str, Any]:
    """Merge experiment defaults, an optional preset and user values, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    user = dict(user or {})
    validate(user)
    if user.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {user['experiment']!r}, not {experiment!r}")
    cfg = copy.deepcopy(_DEFAULTS[experiment])
    if "preset" in user:
        name = user["preset"]
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        cfg.update(copy.deepcopy(PRESETS[name]))
    cfg.update(user)
    cfg["experiment"] = experiment
    cfg.setdefault("seed", 0)
    if seed is not None:
        cfg["seed"] = seed
    if paper_scale:
        if "paper_n" in cfg:
            cfg["n"] = cfg["paper_n"]
        if "paper_n_list" in cfg:
            cfg["n_list"] = cfg["paper_n_list"]
    validate(cfg)
    return cfg


def config_hash(cfg: dict[str, Any]) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def complex_from_config(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def symbol_from_config(sym: dict[str, Any]) -> ToeplitzSymbol:
    coeffs = {int(k): complex_from_config(v) for k, v in sym["coeffs"].items()}
    bw = sym.get("bandwidth")
    rule = None
    if bw is not None:
        rule = FixedBandwidth(bw["fixed"]) if "fixed" in bw else PowerBandwidth(bw["theta"], bw.get("offset", 0))
    return ToeplitzSymbol(coeffs, rule, sym.get("name", ""))


def perturbation_from_config(p: dict[str, Any]) -> PerturbationSpec:
    return PerturbationSpec(Kind(p["kind"]), gamma=p.get("gamma", 1.0), alpha=p.get("alpha", 0.0),
                            epsilon=p.get("epsilon", 1.0))


def tolerances_from_config(cfg: dict[str, Any], scale: float = 1.0) -> Tolerances:
    tol = Tolerances(**{**DEFAULT_TOLERANCES.__dict__, **cfg.get("tolerances", {})})
    return tol.scaled(scale) if scale != 1.0 else tol
