"""Run configuration, result envelope and CSV/JSON serialization.

Configs are TOML: a [model] table plus one table per command. Values load
in three layers (built-in defaults, then the config file, then command-line
overrides) and any key outside the schema is rejected.

Floats are written with 17 significant digits everywhere; non-finite
values become the strings "nan", "inf", "-inf".
"""

import copy
import csv
import io as _io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .lattice import LatticeError, ModelParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "RunConfig",
    "ResultEnvelope",
    "Table",
    "DEFAULTS",
    "PRESETS",
    "load_config",
    "preset_path",
    "fmt_float",
    "dumps_json",
    "loads_json",
    "write_csv",
    "table_to_csv",
]

TOOL = "nhphase"

DEFAULTS = {
    "model": {"t0": 1.0, "t1R": 3.5, "t1L": 2.5, "t2": 1.3, "eps0": 0.0, "N": 100},
    "spectrum": {"frame": "raw", "states": True},
    "winding": {"sweep": "t2", "lo": 0.0, "hi": 0.8, "steps": 161, "tol": 1e-6},
    "skin": {
        "method": "exact",
        "n_theta": 512,
        "zero_mode_tol": 1e-6,
        "state_modes": [],
        "crosscheck": True,
    },
    "greens": {
        "t2_lo": 0.0,
        "t2_hi": 0.8,
        "steps": 161,
        "eta": 1e-3,
        "tol": 1e-12,
        "max_iter": 100,
        "frame": "nonbloch",
        "E_lo": -3.0,
        "E_hi": 3.0,
        "E_steps": 0,
    },
    "phase_diagram": {
        "axis1": ["t1L", 0.5, 3.5, 31],
        "axis2": ["t2", 0.2, 1.8, 17],
        "constraint": "t1R = t1L + 0.5",
        "alpha_tol": 1e-9,
    },
    "finite_size": {
        "N_list": [6, 40, 400],
        "t2_lo": 0.0,
        "t2_hi": 0.8,
        "t2_step": 0.005,
        "gap_tol": 1e-3,
    },
    "validate": {"seed": 20240611},
    "output": {"out": "out", "format": "both", "svg": False, "jobs": 1, "quick": False},
}

PRESETS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5")

COMMAND_SECTION = {
    "spectrum": "spectrum",
    "winding": "winding",
    "skin": "skin",
    "greens": "greens",
    "phase-diagram": "phase_diagram",
    "finite-size": "finite_size",
    "validate": "validate",
}


class ConfigError(ValueError):
    """Invalid or unknown configuration key/value."""


def preset_path(name):
    return resources.files("nhphase").joinpath("presets", f"{name}.toml")


def _read_toml(path):
    p = str(path)
    if not os.path.exists(p) and p in PRESETS:
        with preset_path(p).open("rb") as f:
            return tomllib.load(f)
    try:
        with open(p, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {p}: {exc}") from exc


def _coerce(section, key, value, default):
    where = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list, got {value!r}")
        return list(value)
    return value


def _merge(base, layer, origin):
    for sec, vals in layer.items():
        if sec not in DEFAULTS:
            raise ConfigError(f"unknown config section [{sec}] in {origin}")
        if not isinstance(vals, dict):
            raise ConfigError(f"[{sec}] must be a table in {origin}")
        for k, v in vals.items():
            if k not in DEFAULTS[sec]:
                raise ConfigError(f"unknown key {sec}.{k} in {origin}")
            base[sec][k] = _coerce(sec, k, v, DEFAULTS[sec][k])


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    path, raw = text.split("=", 1)
    if "." not in path:
        raise ConfigError(f"override key must be section.key, got {path!r}")
    sec, key = path.strip().split(".", 1)
    try:
        val = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        val = raw.strip()
    return sec.replace("-", "_"), key.strip(), val


_CHOICES = {
    ("spectrum", "frame"): ("raw", "nonbloch"),
    ("skin", "method"): ("exact", "ansatz"),
    ("greens", "frame"): ("nonbloch", "bloch"),
    ("winding", "sweep"): ("t0", "t1R", "t1L", "t2", "eps0"),
    ("output", "format"): ("csv", "json", "both"),
}


def _validate(cfg):
    for (sec, key), allowed in _CHOICES.items():
        if cfg[sec][key] not in allowed:
            raise ConfigError(f"{sec}.{key} must be one of {allowed}, got {cfg[sec][key]!r}")
    for sec, key in (("winding", "steps"), ("greens", "steps"), ("skin", "n_theta")):
        if cfg[sec][key] < 2:
            raise ConfigError(f"{sec}.{key} must be at least 2")
    if cfg["output"]["jobs"] < 1:
        raise ConfigError("output.jobs must be at least 1")
    for sec, key in (("greens", "eta"), ("greens", "tol"), ("finite_size", "gap_tol"), ("finite_size", "t2_step")):
        if not cfg[sec][key] > 0:
            raise ConfigError(f"{sec}.{key} must be positive")
    for ax in ("axis1", "axis2"):
        a = cfg["phase_diagram"][ax]
        if len(a) != 4 or not isinstance(a[0], str):
            raise ConfigError(f"phase_diagram.{ax} must be [name, lo, hi, steps]")
    for n in cfg["finite_size"]["N_list"]:
        if not isinstance(n, int) or n < 3:
            raise ConfigError("finite_size.N_list entries must be integers >= 3")


@dataclass
class RunConfig:
    model: ModelParams
    sections: dict
    command: str = ""
    source: str = ""

    @property
    def output(self):
        return self.sections["output"]

    @property
    def seed(self):
        return self.sections["validate"]["seed"]

    def section(self, name=None):
        return self.sections[COMMAND_SECTION.get(name or self.command, name or self.command)]

    def echo(self):
        """Knobs that can affect the run of this command."""
        d = {"model": self.model.to_dict()}
        sec = COMMAND_SECTION.get(self.command)
        if self.command == "validate":
            d.update({k: copy.deepcopy(v) for k, v in self.sections.items() if k not in ("model",)})
        elif sec:
            d[sec] = copy.deepcopy(self.sections[sec])
        d["output"] = copy.deepcopy(self.output)
        d["source"] = self.source
        return d


def load_config(path=None, overrides=(), command="", flags=None):
    """Resolve defaults <- file <- overrides <- flags into a RunConfig."""
    cfg = copy.deepcopy(DEFAULTS)
    source = "defaults"
    if path:
        data = _read_toml(path)
        data.pop("command", None)
        data.pop("description", None)
        _merge(cfg, data, str(path))
        source = str(path)
    for ov in overrides or ():
        sec, key, val = _parse_override(ov)
        _merge(cfg, {sec: {key: val}}, f"override {ov!r}")
    for (sec, key), val in (flags or {}).items():
        if val is not None:
            _merge(cfg, {sec: {key: val}}, f"flag {sec}.{key}")
    _validate(cfg)
    try:
        model = ModelParams(**cfg["model"])
    except (LatticeError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(model, cfg, command, source)


# ------------------------------------------------------------------ formatting

def fmt_float(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


@dataclass
class Table:
    """Column-ordered table; complex values must already be split into columns."""

    name: str
    columns: list
    rows: list = field(default_factory=list)

    def to_obj(self):
        return {"columns": list(self.columns), "rows": [list(r) for r in self.rows]}


def table_to_csv(table):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_csv(table, path):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(table_to_csv(table))


def _jnorm(v):
    # numpy scalars and non-finite floats to JSON-safe python values
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else fmt_float(f)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jnorm(v.real), _jnorm(v.imag)]
    if isinstance(v, dict):
        return {str(k): _jnorm(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jnorm(x) for x in v]
    return v


def _dump(v, ind, out):
    pad = " " * ind
    if isinstance(v, dict):
        if not v:
            out.append("{}")
            return
        out.append("{\n")
        items = list(v.items())
        for i, (k, x) in enumerate(items):
            out.append(pad + "  " + json.dumps(k) + ": ")
            _dump(x, ind + 2, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(v, list):
        if all(not isinstance(x, (dict, list)) for x in v):
            out.append("[" + ", ".join(_scalar(x) for x in v) + "]")
            return
        if not v:
            out.append("[]")
            return
        out.append("[\n")
        for i, x in enumerate(v):
            out.append(pad + "  ")
            _dump(x, ind + 2, out)
            out.append(",\n" if i < len(v) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(v))


def _scalar(x):
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        s = fmt_float(x)
        return s if math.isfinite(x) else json.dumps(s)
    return json.dumps(x, ensure_ascii=False)


def dumps_json(obj):
    """Deterministic JSON text; re-dumping parsed output reproduces the bytes."""
    out = []
    _dump(_jnorm(obj), 0, out)
    return "".join(out) + "\n"


def loads_json(text):
    return json.loads(text)


@dataclass
class ResultEnvelope:
    command: str
    config: dict
    payload: dict
    diagnostics: dict
    tool: str = TOOL
    version: str = ""

    def to_obj(self):
        from . import __version__

        return {
            "tool": self.tool,
            "version": self.version or __version__,
            "command": self.command,
            "config": self.config,
            "payload": self.payload,
            "diagnostics": self.diagnostics,
        }

    def dumps(self):
        return dumps_json(self.to_obj())

    @classmethod
    def loads(cls, text):
        d = loads_json(text)
        return cls(d["command"], d["config"], d["payload"], d["diagnostics"], d["tool"], d["version"])
