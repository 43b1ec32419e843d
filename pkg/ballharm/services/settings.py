from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

from ..errors import ConfigError, ParameterError
from .functions import FUNCTION_REGISTRY
from .polyalg import as_rational
from .rates import RateSettings, default_n_range
from .verification import SUITES

COMMANDS = ("verify", "expand", "rates")
MODES = ("even", "odd")
QUADRATURE_MAX_D = 3
RATES_MARGIN = 12


def optional_int(raw: Any) -> int | None:
    return None if raw in (None, "") else int(raw)


@dataclass(frozen=True)
class SettingField:
    key: str
    label: str
    config_key: str
    cast: Callable[[Any], Any] = float
    default: Any = None


RATE_FIELDS: tuple[SettingField, ...] = (
    SettingField("oversample", "Extra quadrature exactness", "BALLHARM_QUAD_OVERSAMPLE", int, 20),
    SettingField("convergence_step", "Refinement step of the convergence check", "BALLHARM_CONVERGENCE_STEP", int, 10),
    SettingField("convergence_tol", "Coefficient movement logged as a warning", "BALLHARM_CONVERGENCE_TOL", float, 1e-9),
    SettingField("convergence_abort", "Coefficient movement that aborts", "BALLHARM_CONVERGENCE_ABORT", float, 1e-6),
    SettingField("tail_window", "Degrees in the tail window", "BALLHARM_TAIL_WINDOW", int, 5),
    SettingField("tail_fraction", "Tail share that flags truncation", "BALLHARM_TAIL_FRACTION", float, 0.01),
    SettingField("certify_degree", "Optional monomial degree cap of rule certification", "BALLHARM_CERTIFY_DEGREE", optional_int, None),
    SettingField("precision_floor", "Relative floor of resolvable errors", "BALLHARM_PRECISION_FLOOR", float, 1e-11),
    SettingField("rate_bound", "Allowed max/median ratio", "BALLHARM_RATE_BOUND", float, 3.0),
)


def rate_settings_from_config(config: Mapping[str, Any], quad_degree: int | None = None) -> RateSettings:
    values: dict[str, Any] = {}
    for field in RATE_FIELDS:
        raw = config.get(field.config_key, field.default)
        try:
            values[field.key] = field.cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{field.config_key} has an invalid value {raw!r}") from exc
    workers = config.get("BALLHARM_WORKERS")
    values["workers"] = int(workers) if workers else None
    values["quad_degree"] = quad_degree
    return RateSettings(**values)


@dataclass(frozen=True)
class RunConfig:
    command: str
    d: int = 2
    mu: Fraction = Fraction(0)
    N: int | None = None
    n_range: tuple[int, ...] = ()
    s: int = 1
    functions: tuple[str, ...] = ()
    out: Path | None = None
    quad_degree: int | None = None
    seed: int = 0
    mode: str | None = None
    suite: str | None = None

    @property
    def function(self) -> str | None:
        return self.functions[0] if self.functions else None


class RationalField(fields.Field):
    """mu as "1/2", "0.5" or "2", carried as a Fraction."""

    default_error_messages = {"invalid": "Not a rational number: {input!r}."}

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
            return Fraction(value)
        try:
            return as_rational(str(value).strip())
        except ParameterError as exc:
            raise self.make_error("invalid", input=value) from exc

    def _serialize(self, value, attr, obj, **kwargs):
        return None if value is None else str(value)


class RunConfigSchema(Schema):
    command = fields.String(required=True, validate=validate.OneOf(COMMANDS))
    d = fields.Integer(load_default=2, validate=validate.Range(min=2))
    mu = RationalField(load_default=Fraction(0))
    N = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=0))
    n_min = fields.Integer(load_default=4, validate=validate.Range(min=0))
    n_max = fields.Integer(load_default=40, validate=validate.Range(min=0))
    n_step = fields.Integer(load_default=2, validate=validate.Range(min=1))
    s = fields.Integer(load_default=1, validate=validate.Range(min=0))
    functions = fields.List(fields.String(), load_default=list)
    out = fields.String(load_default=None, allow_none=True)
    quad_degree = fields.Integer(load_default=None, allow_none=True, validate=validate.Range(min=0))
    seed = fields.Integer(load_default=0)
    mode = fields.String(load_default=None, allow_none=True, validate=validate.OneOf(MODES))
    suite = fields.String(load_default=None, allow_none=True, validate=validate.OneOf(tuple(SUITES) + ("all",)))

    @validates_schema
    def check_combination(self, data, **kwargs):
        command = data["command"]
        if data["mu"] <= -1:
            raise ValidationError("mu must exceed -1.", "mu")
        if command == "verify":
            if data.get("suite") is None:
                raise ValidationError("verify needs a suite.", "suite")
            return
        if data["d"] > QUADRATURE_MAX_D:
            raise ValidationError(f"{command} supports d <= {QUADRATURE_MAX_D}.", "d")
        names = data["functions"]
        if not names:
            raise ValidationError(f"{command} needs --f.", "functions")
        if command == "expand" and len(names) != 1:
            raise ValidationError("expand takes exactly one function.", "functions")
        for name in names:
            spec = FUNCTION_REGISTRY.get(name)
            if spec is None:
                known = ", ".join(sorted(FUNCTION_REGISTRY))
                raise ValidationError(f"unknown function {name!r}; choose one of {known}.", "functions")
            if data["d"] < spec.min_d:
                raise ValidationError(f"{name} needs d >= {spec.min_d}.", "d")
            if command == "rates":
                self._check_order(spec, data)
        N = data["N"]
        if command == "rates":
            if data["n_min"] > data["n_max"]:
                raise ValidationError("n-min must not exceed n-max.", "n_min")
            lowest = 2 * data["s"] if data["mode"] == "even" else 2 * data["s"] + 1
            if data["n_min"] < max(lowest, 1):
                raise ValidationError(f"n-min must be >= {max(lowest, 1)} for s={data['s']}.", "n_min")
            if N is not None and data["n_max"] > N:
                raise ValidationError(f"n-max {data['n_max']} exceeds N={N}.", "n_max")
        if data["quad_degree"] is not None:
            top = N if N is not None else (data["n_max"] + RATES_MARGIN if command == "rates" else 20)
            if data["quad_degree"] < 2 * top:
                raise ValidationError(f"quad-degree must be >= 2N = {2 * top}.", "quad_degree")

    @staticmethod
    def _check_order(spec, data):
        if data["mode"] is None:
            raise ValidationError("rates needs a mode (even or odd).", "mode")
        top = spec.max_even_s if data["mode"] == "even" else spec.max_odd_s
        low = 1 if data["mode"] == "even" else 0
        if not low <= data["s"] <= top:
            if top < low:
                raise ValidationError(f"{spec.name} has no {data['mode']} images.", "s")
            raise ValidationError(f"{spec.name} supports {low} <= s <= {top} in {data['mode']} mode.", "s")

    @post_load
    def make_config(self, data, **kwargs) -> RunConfig:
        command = data["command"]
        N = data["N"]
        n_range: tuple[int, ...] = ()
        if command == "rates":
            n_range = tuple(default_n_range(data["n_min"], data["n_max"], data["n_step"]))
            N = data["n_max"] + RATES_MARGIN if N is None else N
        elif command == "expand" and N is None:
            N = 20
        return RunConfig(
            command=command,
            d=data["d"],
            mu=data["mu"],
            N=N,
            n_range=n_range,
            s=data["s"],
            functions=tuple(data["functions"]),
            out=Path(data["out"]) if data["out"] else None,
            quad_degree=data["quad_degree"],
            seed=data["seed"],
            mode=data["mode"],
            suite=data["suite"],
        )


def load_run_config(data: Mapping[str, Any]) -> RunConfig:
    """Validate raw command options; every rejection becomes a ConfigError."""
    try:
        return RunConfigSchema().load(dict(data))
    except ValidationError as exc:
        messages = exc.messages if isinstance(exc.messages, dict) else {"_schema": exc.messages}
        parts = []
        for key, value in messages.items():
            text = "; ".join(value) if isinstance(value, list) else str(value)
            parts.append(text if key == "_schema" else f"{key}: {text}")
        raise ConfigError("invalid run configuration: " + " | ".join(parts), messages) from exc
