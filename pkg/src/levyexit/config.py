"""Run configuration: JSON config files, flag overrides, derived defaults.

A config file is a single JSON object with sections model / noise / domain /
mc / output.  Every leaf can be overridden by the command-line flag of the
same meaning; unknown sections or keys are rejected rather than ignored.

Derived defaults: c falls back to the extinction state (0), d to the tumor
state x3 of the configured model, h to (d - c) / 500.  The zero-drift mode
has no natural interval, so it requires explicit c and d.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

from .mc import SimConfig
from .model import ModelParams, steady_states, zero_drift
from .levy import NoiseParams

__all__ = ["ConfigError", "RunConfig", "load_config_file", "resolve_run", "FLAG_DESTS"]

_SECTIONS: dict[str, tuple[str, ...]] = {
    "model": ("drift", "theta", "beta"),
    "noise": ("a", "epsilon", "alpha"),
    "domain": ("c", "d", "h"),
    "mc": ("dt", "n_paths", "max_time", "base_seed"),
    "output": ("path", "format"),
}

# argparse dest -> (section, leaf)
FLAG_DESTS: dict[str, tuple[str, str]] = {
    "drift": ("model", "drift"),
    "theta": ("model", "theta"),
    "beta": ("model", "beta"),
    "a": ("noise", "a"),
    "eps": ("noise", "epsilon"),
    "alpha": ("noise", "alpha"),
    "c": ("domain", "c"),
    "d": ("domain", "d"),
    "h": ("domain", "h"),
    "dt": ("mc", "dt"),
    "paths": ("mc", "n_paths"),
    "max_time": ("mc", "max_time"),
    "seed": ("mc", "base_seed"),
    "out": ("output", "path"),
}

_DEFAULTS: dict[tuple[str, str], Any] = {
    ("model", "drift"): "tumor",
    ("model", "theta"): 0.1,
    ("model", "beta"): 3.0,
    ("noise", "a"): 0.0,
    ("noise", "epsilon"): 0.5,
    ("noise", "alpha"): 1.0,
    ("domain", "c"): None,
    ("domain", "d"): None,
    ("domain", "h"): None,
    ("mc", "dt"): 1e-3,
    ("mc", "n_paths"): 10_000,
    ("mc", "max_time"): None,
    ("mc", "base_seed"): 0,
    ("output", "path"): None,
    ("output", "format"): "csv",
}


class ConfigError(ValueError):
    """Invalid config file or flag combination (CLI exit code 2)."""


def load_config_file(path: str) -> dict[tuple[str, str], Any]:
    """Parse and structurally validate a JSON config file into flat (section, leaf) pairs."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object with named sections")
    flat: dict[tuple[str, str], Any] = {}
    for section, body in raw.items():
        if section not in _SECTIONS:
            raise ConfigError(
                f"unknown config section {section!r} (known: {', '.join(_SECTIONS)})"
            )
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        for leaf, value in body.items():
            if leaf not in _SECTIONS[section]:
                raise ConfigError(
                    f"unknown key {leaf!r} in section {section!r} "
                    f"(known: {', '.join(_SECTIONS[section])})"
                )
            flat[(section, leaf)] = value
    return flat


def _as_float(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved parameters for one command invocation."""

    drift_name: str
    model: ModelParams | None
    noise: NoiseParams
    c: float
    d: float
    h: float
    dt: float
    n_paths: int
    max_time: float | None
    base_seed: int
    out_path: str | None
    out_format: str
    scheme: str

    def drift_spec(self) -> ModelParams | Callable:
        return self.model if self.model is not None else zero_drift

    def sim(self, max_time: float | None = None) -> SimConfig:
        return SimConfig(
            dt=self.dt,
            n_paths=self.n_paths,
            base_seed=self.base_seed,
            max_time=self.max_time if max_time is None else max_time,
        )

    def echo(self) -> dict[str, Any]:
        """Parameter set embedded in output headers; sufficient to re-run."""
        out: dict[str, Any] = {"drift": self.drift_name}
        if self.model is not None:
            out["theta"] = self.model.theta
            out["beta"] = self.model.beta
        out.update(
            a=self.noise.a,
            epsilon=self.noise.epsilon,
            alpha=self.noise.alpha,
            c=self.c,
            d=self.d,
            h=self.h,
            scheme=self.scheme,
            dt=self.dt,
            n_paths=self.n_paths,
            max_time=self.max_time,
            base_seed=self.base_seed,
        )
        return out


def resolve_run(config_path: str | None, flags: dict[str, Any],
                scheme: str = "corrected") -> RunConfig:
    """Layer defaults < config file < explicit flags, then validate.

    flags maps argparse dests (see FLAG_DESTS) to values; None means the flag
    was not given.  Raises ConfigError (or a type's own ValueError) on any
    invalid combination.
    """
    values = dict(_DEFAULTS)
    if config_path is not None:
        values.update(load_config_file(config_path))
    for dest, value in flags.items():
        if dest not in FLAG_DESTS:
            raise ConfigError(f"internal: unmapped flag dest {dest!r}")
        if value is not None:
            values[FLAG_DESTS[dest]] = value

    drift_name = values[("model", "drift")]
    if drift_name not in ("tumor", "zero"):
        raise ConfigError(f"model.drift must be 'tumor' or 'zero', got {drift_name!r}")
    model: ModelParams | None = None
    if drift_name == "tumor":
        model = ModelParams(
            theta=_as_float(values[("model", "theta")], "model.theta"),
            beta=_as_float(values[("model", "beta")], "model.beta"),
        )

    noise = NoiseParams(
        a=_as_float(values[("noise", "a")], "noise.a"),
        epsilon=_as_float(values[("noise", "epsilon")], "noise.epsilon"),
        alpha=_as_float(values[("noise", "alpha")], "noise.alpha"),
    )

    c = values[("domain", "c")]
    d = values[("domain", "d")]
    if c is None or d is None:
        if model is None:
            raise ConfigError("zero drift has no natural interval: set domain.c and domain.d")
        states = steady_states(model)  # needs a bistable model; RegimeError propagates
        if c is None:
            c = states.extinction
        if d is None:
            d = states.tumor
    c = _as_float(c, "domain.c")
    d = _as_float(d, "domain.d")
    if not c < d:
        raise ConfigError(f"domain.c must be below domain.d, got c={c}, d={d}")
    h = values[("domain", "h")]
    h = (d - c) / 500.0 if h is None else _as_float(h, "domain.h")

    dt = _as_float(values[("mc", "dt")], "mc.dt")
    n_paths = _as_int(values[("mc", "n_paths")], "mc.n_paths")
    max_time = values[("mc", "max_time")]
    if max_time is not None:
        max_time = _as_float(max_time, "mc.max_time")
    base_seed = _as_int(values[("mc", "base_seed")], "mc.base_seed")
    # delegate range checks to SimConfig, rewording as config errors
    try:
        SimConfig(dt=dt, n_paths=n_paths, base_seed=base_seed, max_time=max_time)
    except ValueError as exc:
        raise ConfigError(f"mc section invalid: {exc}") from exc

    out_path = values[("output", "path")]
    if out_path is not None and not isinstance(out_path, str):
        raise ConfigError(f"output.path must be a string, got {out_path!r}")
    out_format = values[("output", "format")]
    if out_format not in ("csv", "csv+svg"):
        raise ConfigError(f"output.format must be 'csv' or 'csv+svg', got {out_format!r}")
    if scheme not in ("corrected", "uncorrected"):
        raise ConfigError(f"scheme must be 'corrected' or 'uncorrected', got {scheme!r}")

    return RunConfig(
        drift_name=drift_name,
        model=model,
        noise=noise,
        c=c,
        d=d,
        h=h,
        dt=dt,
        n_paths=n_paths,
        max_time=max_time,
        base_seed=base_seed,
        out_path=out_path,
        out_format=out_format,
        scheme=scheme,
    )
