"""Named presets with documented, overridable parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any, Callable, Mapping, Optional

from ..errors import ConfigError, ParseError
from ..expr import Constant, RateSpec, parse_rate_expr
from ..model import RateSet, Topology, constant_rate_set
from ..stationary import TailCertificate, WeightTable
from .dam import DamParams, dam_certificates, dam_rate_set, dam_weights
from .retrial import RetrialParams, falin_closed_form, retrial_closed_form, retrial_rate_set
from .telegraph import (
    ControlSpec,
    TelegraphParams,
    stabilized_telegraph,
    telegraph_closed_form,
    telegraph_rate_set,
)

__all__ = ["Param", "Preset", "PresetModel", "list_presets", "get_preset", "build_preset"]

logger = logging.getLogger(__name__)

ClosedForm = Callable[[int, int], WeightTable]


@dataclass(frozen=True)
class Param:
    """One preset parameter: its default, its kind ("number", "int", "rate", "text") and help."""

    default: Any
    kind: str
    help: str


@dataclass(frozen=True)
class PresetModel:
    """
    A built preset.

    Attributes
    ----------
    rates
        The rate set.
    certificates
        Tail certificates the preset can vouch for (empty when it cannot).
    closed_form
        `closed_form(n_min, n_max)` gives the preset's own stationary weights, with the same
        reference state as `stationary.weights`. None if the preset has no closed form.
    params
        The parameter values used, defaults included.
    """

    name: str
    rates: RateSet
    certificates: tuple[TailCertificate, ...] = ()
    closed_form: Optional[ClosedForm] = field(default=None, compare=False)
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Preset:
    name: str
    summary: str
    params: dict[str, Param]
    build: Callable[[dict[str, Any]], PresetModel] = field(repr=False)


#### Parameter coercion ####


_KIND_TEXT = {"number": "a number", "int": "an integer", "rate": "a rate", "text": "text"}


def _coerce(preset: str, key: str, value: Any, kind: str) -> Any:
    try:
        if kind == "text":
            return str(value)
        if kind == "int":
            if isinstance(value, bool):
                raise ValueError(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "number":
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
        if kind == "rate":
            if isinstance(value, RateSpec):
                return value
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return Constant(float(value))
            text = str(value)
            try:
                return Constant(float(text))
            except ValueError:
                return parse_rate_expr(text)
    except ParseError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(
            f"preset {preset!r}: parameter {key!r} expects {_KIND_TEXT[kind]}, got {value!r}"
        ) from e
    raise AssertionError(f"unknown parameter kind {kind!r}")


def _resolve(preset: Preset, params: Mapping[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(params) - set(preset.params))
    if unknown:
        raise ConfigError(
            f"preset {preset.name!r} has no parameter {unknown[0]!r}; "
            f"expected one of {', '.join(preset.params)}"
        )
    out = {}
    for key, spec in preset.params.items():
        value = params.get(key, spec.default)
        out[key] = None if value is None else _coerce(preset.name, key, value, spec.kind)
    return out


def _one_sided_only(form: Callable[[int], WeightTable]) -> ClosedForm:
    def closed_form(n_min: int, n_max: int) -> WeightTable:
        if n_min != 0:
            raise ValueError(f"one-sided closed forms start at level 0, got n_min={n_min}")
        return form(n_max)

    return closed_form


#### Builders ####


def _retrial(v: dict[str, Any]) -> PresetModel:
    p = RetrialParams(
        v["arrival"],
        v["service"],
        arrival_idle=v["arrival_idle"],
        policy=v["policy"],
        alpha=v["alpha"],
        nu=v["nu"],
        retrial=v["retrial"],
    )
    return PresetModel(
        "retrial",
        retrial_rate_set(p),
        closed_form=_one_sided_only(lambda n_max: retrial_closed_form(p, n_max)),
        params=v,
    )


def _falin(v: dict[str, Any]) -> PresetModel:
    p = RetrialParams(v["arrival"], v["service"], policy="general", retrial=v["nu"])
    return PresetModel(
        "falin",
        retrial_rate_set(p),
        closed_form=_one_sided_only(
            lambda n_max: falin_closed_form(v["arrival"], v["service"], v["nu"], n_max)
        ),
        params=v,
    )


def _dam_model(name: str, p: DamParams, v: dict[str, Any]) -> PresetModel:
    return PresetModel(
        name,
        dam_rate_set(p),
        tuple(dam_certificates(p)),
        closed_form=_one_sided_only(lambda n_max: dam_weights(p, n_max)),
        params=v,
    )


def _dam(v: dict[str, Any]) -> PresetModel:
    return _dam_model("dam", DamParams(v["lambda"], v["theta"], v["beta"], v["delta"]), v)


def _fluid(v: dict[str, Any]) -> PresetModel:
    unit = v["unit_rate"]
    return _dam_model("fluid", DamParams(unit, 2 * unit, v["beta"], v["delta"]), v)


def _telegraph(v: dict[str, Any]) -> PresetModel:
    p = TelegraphParams(v["lambda"], v["mu"], v["beta"], v["delta"])
    return PresetModel(
        "telegraph",
        telegraph_rate_set(p),
        closed_form=lambda n_min, n_max: telegraph_closed_form(p, n_min, n_max),
        params=v,
    )


def _stabilized(v: dict[str, Any]) -> PresetModel:
    control = ControlSpec(r=v["r"], t=v["t"], beta=v["beta"], delta=v["delta"], fill=v["fill"])
    rates = stabilized_telegraph(v["eta"], control)
    p = TelegraphParams(rates.lambda_, rates.mu, rates.beta, rates.delta)
    return PresetModel(
        "telegraph-stabilized",
        rates,
        closed_form=lambda n_min, n_max: telegraph_closed_form(p, n_min, n_max),
        params=v,
    )


_TOPOLOGIES = ("one-sided", "two-sided", "finite")


def _ones(v: dict[str, Any]) -> PresetModel:
    kind = v["topology"]
    if kind == "one-sided":
        topology = Topology.one_sided()
    elif kind == "two-sided":
        topology = Topology.two_sided()
    elif kind == "finite":
        topology = Topology.finite(v["n"])
    else:
        raise ConfigError(f"unknown topology {kind!r}; expected one of {', '.join(_TOPOLOGIES)}")
    return PresetModel("ones", constant_rate_set(v["value"], topology), params=v)


_PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "retrial",
            "single-server retrial queue; the level is the orbit size",
            {
                "arrival": Param(1.0, "rate", "arrival rate while busy (lambda)"),
                "arrival_idle": Param(None, "rate", "arrival rate while idle (beta); defaults to arrival"),
                "service": Param(3.0, "rate", "service rate (delta)"),
                "policy": Param("constant", "text", "constant, classical, linear or general"),
                "alpha": Param(1.0, "number", "constant part of the retrial rate"),
                "nu": Param(1.0, "number", "per-customer retrial rate"),
                "retrial": Param(None, "rate", "retrial rate of the general policy"),
            },
            _retrial,
        ),
        Preset(
            "falin",
            "retrial queue with constant arrival and service rates",
            {
                "arrival": Param(1.0, "number", "arrival rate"),
                "service": Param(3.0, "number", "service rate"),
                "nu": Param(1.0, "rate", "retrial rate nu_n"),
            },
            _falin,
        ),
        Preset(
            "dam",
            "dam with a gate; geometric stationary law when stable",
            {
                "lambda": Param(1.0, "number", "inflow rate"),
                "theta": Param(3.0, "number", "outflow capacity, above the inflow"),
                "beta": Param(1.0, "number", "gate opening rate"),
                "delta": Param(1.0, "number", "gate closing rate"),
            },
            _dam,
        ),
        Preset(
            "fluid",
            "fluid buffer in units, filling and draining at the same rate",
            {
                "beta": Param(1.0, "number", "rate of switching to draining"),
                "delta": Param(2.0, "number", "rate of switching to filling"),
                "unit_rate": Param(1.0, "number", "fill and drain rate in units per time"),
            },
            _fluid,
        ),
        Preset(
            "telegraph",
            "telegraph process on the integers",
            {
                "lambda": Param(1.0, "rate", "speed moving right"),
                "mu": Param(1.0, "rate", "speed moving left"),
                "beta": Param(1.0, "rate", "rate of turning right"),
                "delta": Param(1.0, "rate", "rate of turning left"),
            },
            _telegraph,
        ),
        Preset(
            "telegraph-stabilized",
            "constant-speed telegraph process with turning rates that force returns",
            {
                "eta": Param(1.0, "number", "speed in both directions"),
                "r": Param(2.0, "rate", "control intensity on the positive side, above 1"),
                "t": Param(2.0, "rate", "control intensity on the negative side, above 1"),
                "beta": Param(1.0, "rate", "base rate of turning right"),
                "delta": Param(1.0, "rate", "base rate of turning left"),
                "fill": Param(1.0, "number", "turning rate next to the origin"),
            },
            _stabilized,
        ),
        Preset(
            "ones",
            "every rate equal to one value",
            {
                "value": Param(1.0, "number", "the common rate"),
                "topology": Param("one-sided", "text", "one-sided, two-sided or finite"),
                "n": Param(10, "int", "top level of the finite topology"),
            },
            _ones,
        ),
    ]
}


def list_presets() -> list[tuple[str, str]]:
    """`(name, summary)` of every preset, in registry order."""
    return [(p.name, p.summary) for p in _PRESETS.values()]


def get_preset(name: str) -> Preset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; expected one of {', '.join(_PRESETS)}"
        ) from None


def build_preset(name: str, params: Optional[Mapping[str, Any]] = None) -> PresetModel:
    """
    Build a preset, overriding any of its parameter defaults.

    Parameter values may be strings (as they come from the command line); "rate"
    parameters also accept rate expressions such as `"1 + 0.5*n"`.

    Examples
    --------
    ```{python}
    from altbd.presets import build_preset

    model = build_preset("dam", {})
    model.certificates
    ```
    """
    preset = get_preset(name)
    values = _resolve(preset, params or {})
    logger.debug("building preset %s with %s", name, values)
    return preset.build(values)
