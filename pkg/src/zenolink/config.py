# config.py
#
# Flat INI-style run configuration with three sections, [protocol] [model]
# [run].  Unknown sections or keys are rejected rather than ignored so a
# typo cannot silently fall back to a default.  CLI flags override file
# values; file values override package defaults.

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional, Union

from .montecarlo import ImperfectionModel


class ConfigError(ValueError):
    pass


def _to_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


# section -> key -> coercion
SCHEMA = {
    "protocol": {
        "m": int,
        "n": int,
        "invert_bits": _to_bool,
    },
    "model": {
        "loss_bit0_db": float,
        "loss_bit1_db": float,
        "visibility": float,
        "source_rate": float,
        "coupling_eff": float,
        "detector_eff": float,
        "dark_rate": float,
    },
    "run": {
        "seed": int,
        "duration_s": float,
        "slices": int,
        "threshold": int,
        "out_dir": str,
        "figures": _to_bool,
    },
}


@dataclass
class RunConfig:
    m: int = 3
    n: int = 6
    invert_bits: bool = False
    model: ImperfectionModel = field(default_factory=ImperfectionModel)
    seed: int = 20260816
    duration_s: float = 1.0
    slices: int = 16
    threshold: int = 128
    out_dir: str = "."
    figures: bool = True

    def echo(self) -> Dict:
        """Flat JSON-friendly view, used in run manifests."""
        m = self.model
        return {
            "protocol": {"m": self.m, "n": self.n, "invert_bits": self.invert_bits},
            "model": {
                "loss_bit0_db": m.loss_bit0_db,
                "loss_bit1_db": m.loss_bit1_db,
                "visibility": m.visibility,
                "source_rate": m.source_rate,
                "coupling_eff": m.coupling_eff,
                "detector_eff": m.detector_eff,
                "dark_rate": m.dark_rate,
            },
            "run": {
                "seed": self.seed,
                "duration_s": self.duration_s,
                "slices": self.slices,
                "threshold": self.threshold,
                "out_dir": self.out_dir,
                "figures": self.figures,
            },
        }


def load_config(path: Union[str, Path]) -> Dict[str, Dict]:
    """Parse and validate a config file into {section: {key: value}}."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    out: Dict[str, Dict] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        keys = SCHEMA[section]
        out[section] = {}
        for key, raw in parser.items(section):
            if key not in keys:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            try:
                out[section][key] = keys[key](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{key}: {exc}") from exc
    return out


def build_run_config(file_path: Optional[Union[str, Path]] = None,
                     overrides: Optional[Dict[str, Dict]] = None) -> RunConfig:
    """defaults <- config file <- overrides (e.g. CLI flags); later wins."""
    cfg = RunConfig()
    layers = []
    if file_path is not None:
        layers.append(load_config(file_path))
    if overrides:
        for section, kv in overrides.items():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key in kv:
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
        layers.append(overrides)

    model_kwargs: Dict[str, float] = {}
    for layer in layers:
        for key, val in layer.get("protocol", {}).items():
            setattr(cfg, key, val)
        model_kwargs.update(layer.get("model", {}))
        for key, val in layer.get("run", {}).items():
            setattr(cfg, key, val)
    if model_kwargs:
        try:
            cfg.model = replace(cfg.model, **model_kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg
