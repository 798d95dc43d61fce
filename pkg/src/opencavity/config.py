"""Run configuration: INI files, ``CAVITY_`` environment overrides, CLI flags.

Precedence, lowest first: built-in defaults, the config file, environment
variables ``CAVITY_<SECTION>_<KEY>``, explicit command-line flags.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import DomainError


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


ENV_PREFIX = "CAVITY_"

# section -> key -> (type tag, default)
SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "geometry": {
        "n1": ("float", 1.25),
        "n2": ("float", 1.0),
        "N": ("int", 10),
        "ell_c": ("float", 0.5),
        "lambda0": ("float", 1.0),
        "area": ("float", 1.0),
    },
    "atom": {
        "omega_A": ("float_or_peak", None),
        "x_A": ("float_or_antinode", None),
        "d": ("complex", 1.0),
        "linewidth": ("float", None),
    },
    "scan": {
        "omega_min": ("float", 0.5),
        "omega_max": ("float", 1.5),
        "resolution": ("float", 1e-4),
        "ell_c_values": ("floats", None),
        "ell_c_min": ("float", None),
        "ell_c_max": ("float", None),
        "ell_c_steps": ("int", None),
        "N_values": ("ints", None),
    },
    "fit": {
        "select": ("choice:highest,nearest,all", "highest"),
        "omega_target": ("float", None),
        "ell_c_values": ("floats", None),
        "on_overlap": ("choice:skip,raise", "skip"),
    },
    "modes": {
        "omega": ("float", 1.0),
        "samples": ("int", 2001),
        "outside": ("float", 1.0),
    },
    "dynamics": {
        "model": ("choice:continuum,effective,both", "both"),
        "duration": ("float", None),
        "rabi_periods": ("float", 5.0),
        "dt": ("float", None),
        "K": ("float", 50.0),
        "samples_per_fwhm": ("int", 200),
        "n_samples": ("int", 401),
        "counter_rotating": ("bool", False),
        "n_max": ("int", 4),
    },
}


def _parse_list(text: str, conv) -> list:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty list")
    return [conv(p) for p in parts]


def _parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "")
    if "," in t:
        re_, im_ = t.split(",", 1)
        return complex(float(re_), float(im_))
    return complex(t.replace("i", "j"))


def _convert(tag: str, raw: str) -> Any:
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    if tag == "float":
        return float(raw)
    if tag == "int":
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{raw!r} is not an integer")
        return int(v)
    if tag == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{raw!r} is not a boolean")
    if tag == "complex":
        return _parse_complex(raw)
    if tag == "floats":
        return _parse_list(raw, float)
    if tag == "ints":
        return _parse_list(raw, int)
    if tag == "float_or_peak":
        return "peak" if raw.lower() == "peak" else float(raw)
    if tag == "float_or_antinode":
        return "antinode" if raw.lower() == "antinode" else float(raw)
    if tag.startswith("choice:"):
        opts = tag.split(":", 1)[1].split(",")
        if raw not in opts:
            raise ValueError(f"{raw!r} not one of {opts}")
        return raw
    raise AssertionError(tag)


def _format(value: Any) -> str:
    """Canonical text for the header echo."""
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, complex):
        return f"{value.real!r},{value.imag!r}"
    if isinstance(value, (list, tuple)):
        return " ".join(_format(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


@dataclass
class RunConfig:
    """Fully resolved settings, grouped by section."""

    values: dict[str, dict[str, Any]] = field(default_factory=dict)
    sources: list[str] = field(default_factory=list)

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.values[section]

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def set(self, section: str, key: str, value: Any) -> None:
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown option {section}.{key}")
        self.values[section][key] = value

    def set_text(self, section: str, key: str, raw: str, origin: str) -> None:
        if section not in SCHEMA:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigError(f"{origin}: unknown option {key!r} in [{section}]")
        try:
            self.values[section][key] = _convert(SCHEMA[section][key][0], raw)
        except ValueError as exc:
            raise ConfigError(f"{origin}: bad value for {section}.{key}: {exc}") from None

    def echo(self) -> list[tuple[str, str]]:
        """``(section.key, text)`` pairs in schema order."""
        return [(f"{s}.{k}", _format(self.values[s][k])) for s in SCHEMA for k in SCHEMA[s]]

    def as_dict(self) -> dict[str, dict[str, str]]:
        return {s: {k: _format(self.values[s][k]) for k in SCHEMA[s]} for s in SCHEMA}

    # convenience views

    def ell_c_scan_values(self) -> list[float]:
        sc = self.values["scan"]
        if sc["ell_c_values"]:
            return [float(v) for v in sc["ell_c_values"]]
        if sc["ell_c_min"] is not None or sc["ell_c_max"] is not None:
            if sc["ell_c_min"] is None or sc["ell_c_max"] is None or not sc["ell_c_steps"]:
                raise ConfigError("ell_c_min, ell_c_max and ell_c_steps must be given together")
            return [float(v) for v in np.linspace(sc["ell_c_min"], sc["ell_c_max"], sc["ell_c_steps"])]
        return [float(self.values["geometry"]["ell_c"])]

    def N_scan_values(self) -> list[int]:
        vals = self.values["scan"]["N_values"]
        return [int(v) for v in vals] if vals else [int(self.values["geometry"]["N"])]

    def fit_ell_c_values(self) -> list[float]:
        vals = self.values["fit"]["ell_c_values"]
        return [float(v) for v in vals] if vals else [float(self.values["geometry"]["ell_c"])]


def defaults() -> RunConfig:
    return RunConfig({s: {k: v[1] for k, v in keys.items()} for s, keys in SCHEMA.items()})


def _reader() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (N vs n1)
    return cp


def load(path: str | None = None, env: Mapping[str, str] | None = None,
         text: str | None = None) -> RunConfig:
    """Resolve defaults, an optional INI file or string, then the environment."""
    cfg = defaults()
    if path is not None or text is not None:
        cp = _reader()
        origin = path or "<string>"
        try:
            if path is not None:
                with open(path, encoding="utf-8") as fh:
                    cp.read_file(fh, source=path)
            else:
                cp.read_string(text, source=origin)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {origin}: {exc}") from None
        for section in cp.sections():
            for key, raw in cp.items(section):
                cfg.set_text(section, key, raw, origin)
        cfg.sources.append(origin)
    apply_env(cfg, os.environ if env is None else env)
    return cfg


def apply_env(cfg: RunConfig, env: Mapping[str, str]) -> None:
    """``CAVITY_GEOMETRY_n1=1.5`` style overrides; unknown names are ignored."""
    lookup = {}
    for s, keys in SCHEMA.items():
        for k in keys:
            lookup[f"{ENV_PREFIX}{s.upper()}_{k.upper()}"] = (s, k)
    hits = []
    for name in sorted(env):
        key = name.upper()
        if key in lookup:
            s, k = lookup[key]
            cfg.set_text(s, k, env[name], f"env {name}")
            hits.append(name)
    if hits:
        cfg.sources.append("env:" + ",".join(hits))


def geometry_from(cfg: RunConfig, ell_c: float | None = None, N: int | None = None):
    from .geometry import CavityGeometry

    g = cfg["geometry"]
    try:
        return CavityGeometry.build(g["n1"], g["N"] if N is None else N,
                                    g["ell_c"] if ell_c is None else ell_c,
                                    g["n2"], g["lambda0"], g["area"])
    except DomainError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from None
