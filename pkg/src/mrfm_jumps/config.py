"""Flat key-value configuration: file values, flag overrides and defaults.

Precedence is flag > file > default. A dimensionless value set explicitly
alongside an explicitly set laboratory quantity it depends on must agree
with the conversion, otherwise the configuration is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .noise import TelegraphConfig
from .sweep import SweepGrid
from .units import PHYSICAL_KEYS, ModelParams, PhysicalParams, physical_from_mapping, to_dimensionless


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]


def _sign(text):
    value = str(text).strip().lower()
    if value == "random":
        return None
    if value in ("1", "+1", "+"):
        return 1
    if value in ("-1", "-"):
        return -1
    raise ValueError(f"expected +1, -1 or random, got {text!r}")


def _branch(text):
    value = _sign(text)
    if value is None:
        raise ValueError("initial branch must be +1 or -1")
    return value


def _int(text):
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


# key -> (parser, help text with units)
KEYS = {
    "f_c_hz": (float, "cantilever frequency omega_c/2pi [Hz]"),
    "k_c_n_per_m": (float, "cantilever spring constant [N/m]"),
    "b1_tesla": (float, "rf field amplitude B_1 [T]"),
    "grad_t_per_m": (float, "field gradient |dB_z/dx| [T/m]"),
    "x_m_meters": (float, "cantilever tip amplitude [m]"),
    "noise_amp_meters": (float, "random tip vibration amplitude [m]"),
    "noise_field_tesla": (float, "random field amplitude, overrides noise_amp_meters [T]"),
    "gamma_rad_per_s_t": (float, "spin gyromagnetic ratio [rad/(s T)]"),
    "hbar_j_s": (float, "reduced Planck constant [J s]"),
    "mu_b_j_per_t": (float, "Bohr magneton [J/T]"),
    "epsilon": (float, "dimensionless rf field epsilon"),
    "eta": (float, "dimensionless spin-cantilever coupling eta"),
    "delta": (float, "telegraph field amplitude Delta (dimensionless)"),
    "tau0": (float, "mean kick spacing (dimensionless time), default Rabi period"),
    "dtau": (float, "kick spacing jitter half-width (dimensionless time)"),
    "dtau_fraction": (float, "dtau as a fraction of tau0 when dtau is unset (default 0.25)"),
    "x_m": (float, "cantilever amplitude in units of X0"),
    "domega": (float, "relative cantilever frequency shift"),
    "initial_sign": (_sign, "telegraph sign before the first kick: +1, -1 or random"),
    "initial_branch": (_branch, "initial spin branch: +1 (along the field) or -1"),
    "kicks": (_int, "stop after this many kicks"),
    "tau_max": (float, "stop at this dimensionless time"),
    "seed": (_int, "64-bit random seed"),
    "delta_values": (_float_list, "sweep: comma-separated Delta values"),
    "tau0_values": (_float_list, "sweep: comma-separated tau0 values"),
    "kicks_per_point": (_int, "sweep: kicks per grid point (default: sized by target_jumps)"),
    "runs_per_point": (_int, "sweep: independent runs per grid point"),
    "target_jumps": (_int, "sweep: jumps to aim for per point when kicks_per_point is unset"),
}

MODEL_KEYS = ("epsilon", "eta", "delta", "x_m", "domega")
# laboratory keys each dimensionless value is derived from
DEPENDS_ON = {
    "epsilon": {"b1_tesla", "f_c_hz", "gamma_rad_per_s_t"},
    "eta": {"gamma_rad_per_s_t", "hbar_j_s", "k_c_n_per_m", "f_c_hz", "grad_t_per_m"},
    "delta": {"gamma_rad_per_s_t", "grad_t_per_m", "noise_amp_meters", "noise_field_tesla", "f_c_hz"},
    "x_m": {"x_m_meters", "hbar_j_s", "f_c_hz", "k_c_n_per_m"},
    "domega": {"grad_t_per_m", "mu_b_j_per_t", "x_m_meters", "k_c_n_per_m"},
}
_MODEL_FIELD = {"delta": "delta_amp"}

DEFAULTS = {
    "initial_sign": None,
    "initial_branch": 1,
    "seed": 0,
    "dtau_fraction": 0.25,
    "runs_per_point": 1,
    "target_jumps": 1000,
}


@dataclass
class RunConfig:
    model: ModelParams
    telegraph: TelegraphConfig
    physical: PhysicalParams
    max_kicks: int | None
    max_time: float | None
    seed: int
    initial_branch: int
    values: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)

    def provenance(self) -> list[tuple[str, object]]:
        """(key, "value  [source]") pairs for output headers."""
        from .io import fmt

        def show(k, v):
            if v is None:
                return "random" if k == "initial_sign" else "unset"
            return fmt(v)

        return [(k, f"{show(k, v)}  [{self.sources[k]}]") for k, v in self.values.items()]

    def sweep_grid(self) -> SweepGrid:
        v = self.values
        kwargs = dict(x_m=self.model.x_m, domega=self.model.domega, master_seed=self.seed,
                      runs_per_point=v["runs_per_point"], target_jumps=v["target_jumps"])
        for key in ("delta_values", "tau0_values", "kicks_per_point"):
            if key in v:
                kwargs[key] = v[key]
        if self.sources["dtau"] == "derived":
            kwargs["dtau_rule"] = ("fraction", v["dtau_fraction"])
        else:
            kwargs["dtau_rule"] = ("fixed", v["dtau"])
        try:
            return SweepGrid(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        key, found, value = line.partition(sep)
        if not found:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip()] = value.strip()
    return values


def _parse(raw: dict, source: str) -> dict:
    parsed = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown configuration key {key!r} ({source})")
        try:
            parsed[key] = KEYS[key][0](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key} ({source}): {exc}") from exc
    return parsed


def parse_config(file_values: dict | None = None, flag_values: dict | None = None) -> RunConfig:
    """Resolve file values and flag overrides into a :class:`RunConfig`."""
    values, sources = {}, {}
    for key, value in DEFAULTS.items():
        values[key], sources[key] = value, "default"
    for src, raw in (("file", file_values or {}), ("flag", flag_values or {})):
        for key, value in _parse(raw, src).items():
            values[key], sources[key] = value, src

    phys_raw = {k: values[k] for k in PHYSICAL_KEYS if k in values}
    try:
        physical = physical_from_mapping(phys_raw)
        derived = to_dimensionless(physical)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for k in PHYSICAL_KEYS:
        if k not in values:
            values[k] = getattr(physical, PHYSICAL_KEYS[k])
            sources[k] = "default"

    explicit_phys = {k for k in phys_raw}
    model_values = {}
    for key in MODEL_KEYS:
        d = getattr(derived, _MODEL_FIELD.get(key, key))
        if key in sources and sources[key] != "default":
            clash = DEPENDS_ON[key] & explicit_phys
            if clash and not math.isclose(values[key], d, rel_tol=1e-9):
                raise ConfigError(
                    f"{key}={values[key]!r} conflicts with {sorted(clash)} (which give {key}={d!r})")
            model_values[key] = values[key]
        else:
            model_values[key] = values[key] = d
            sources[key] = "derived"

    if "tau0" not in values:
        values["tau0"], sources["tau0"] = 2.0 * math.pi / model_values["epsilon"], "derived"
    if "dtau" in values:
        if sources.get("dtau_fraction") in ("file", "flag"):
            raise ConfigError("set either dtau or dtau_fraction, not both")
    else:
        values["dtau"], sources["dtau"] = values["dtau_fraction"] * values["tau0"], "derived"

    if "kicks" in values and "tau_max" in values:
        raise ConfigError("set either kicks or tau_max, not both")
    if "kicks" in values and values["kicks"] <= 0:
        raise ConfigError("kicks must be positive")
    if "tau_max" in values and not values["tau_max"] > 0:
        raise ConfigError("tau_max must be positive")
    if values["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    for key in ("runs_per_point", "target_jumps", "kicks_per_point"):
        if key in values and values[key] < 1:
            raise ConfigError(f"{key} must be >= 1")

    try:
        model = ModelParams(
            epsilon=model_values["epsilon"], eta=model_values["eta"], delta_amp=model_values["delta"],
            tau0=values["tau0"], dtau=values["dtau"], x_m=model_values["x_m"],
            domega=model_values["domega"])
        telegraph = TelegraphConfig.from_model(model, values["initial_sign"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        model=model,
        telegraph=telegraph,
        physical=physical,
        max_kicks=values.get("kicks"),
        max_time=values.get("tau_max"),
        seed=values["seed"],
        initial_branch=values["initial_branch"],
        values=dict(sorted(values.items())),
        sources=sources,
    )
