from .dam import (
    DamParams,
    dam_certificates,
    dam_closed_form,
    dam_pi0,
    dam_rate_set,
    dam_weights,
    fluid_queue_rate_set,
)
from .registry import Preset, PresetModel, build_preset, get_preset, list_presets
from .retrial import RetrialParams, falin_closed_form, retrial_closed_form, retrial_rate_set
from .telegraph import (
    LEFT,
    RIGHT,
    ControlSpec,
    TelegraphParams,
    stabilized_telegraph,
    telegraph_closed_form,
    telegraph_ell,
    telegraph_m,
    telegraph_rate_set,
)

__all__ = (
    "RetrialParams",
    "retrial_rate_set",
    "retrial_closed_form",
    "falin_closed_form",
    "DamParams",
    "dam_rate_set",
    "dam_certificates",
    "dam_pi0",
    "dam_closed_form",
    "dam_weights",
    "fluid_queue_rate_set",
    "TelegraphParams",
    "ControlSpec",
    "RIGHT",
    "LEFT",
    "telegraph_rate_set",
    "telegraph_ell",
    "telegraph_m",
    "telegraph_closed_form",
    "stabilized_telegraph",
    "Preset",
    "PresetModel",
    "list_presets",
    "get_preset",
    "build_preset",
)
