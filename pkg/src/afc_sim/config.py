"""Scenario configuration: JSON documents describing one run of the toolkit.

A config names a scenario kind, usually starts from a device preset, and may
override individual physical fields.  Configs round-trip losslessly through
JSON; every quantity carries its SI unit in the field name.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from .presets import PRESET_NAMES, MemoryPreset, get_preset

SCENARIO_KINDS = ("storage", "stark_readout", "qubit", "sweep", "holeburn", "analytics", "fit")

CAVITY_FIELDS = (
    "r1", "r2", "d_loss", "geometric_length_m", "refractive_index",
    "air_gap_m", "length_detuning_m", "wavelength_m",
)
COMB_FIELDS = ("spacing_hz", "finesse", "bandwidth_hz", "peak_depth", "tooth_shape", "floor_depth")
TOP_FIELDS = ("eta_m", "base_depth", "pit_width_hz", "pulse_fwhm_s", "mean_photon_number")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    preset: str = "wgc"
    out_dir: str = "out"
    modes: int = 1
    mode_spacing_s: float | None = None
    afc_lifetime_s: float | None = None
    stark_order: int = 2
    stark_phase_turns: float = 0.5  # relative phase per electric pulse, in turns
    grid_points: int = 2**15
    grid_span_hz: float = 200e6
    input_time_s: float = 3e-6
    sweep_bandwidths_hz: tuple = (2e6, 3e6, 4e6, 5e6, 6e6, 7e6)
    sweep_schemes: tuple = ("enhanced", "natural_same_crystal", "natural_high_absorption")
    fit_r_measured: float | None = None
    fit_eta_m: float | None = None
    overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["sweep_bandwidths_hz"] = list(self.sweep_bandwidths_hz)
        d["sweep_schemes"] = list(self.sweep_schemes)
        return d

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        data = dict(data)
        for key in ("sweep_bandwidths_hz", "sweep_schemes"):
            if key in data and isinstance(data[key], list):
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def build_preset(self) -> MemoryPreset:
        """Preset with overrides applied."""
        preset = get_preset(self.preset)
        ov = dict(self.overrides)
        cav_kwargs = {k: ov.pop(k) for k in list(ov) if k in CAVITY_FIELDS}
        comb_kwargs = {k: ov.pop(k) for k in list(ov) if k in COMB_FIELDS}
        top_kwargs = {k: ov.pop(k) for k in list(ov) if k in TOP_FIELDS}
        if ov:
            raise ValueError(f"unknown override fields: {sorted(ov)}")
        if cav_kwargs:
            preset = replace(preset, cavity=replace(preset.cavity, **cav_kwargs))
        if comb_kwargs:
            preset = replace(preset, comb=replace(preset.comb, **comb_kwargs))
        if top_kwargs:
            preset = replace(preset, **top_kwargs)
        return preset


def validate(config: ScenarioConfig) -> list[str]:
    """Cross-field checks; returns a list of human-readable violations."""
    errors: list[str] = []

    def err(path: str, problem: str, hint: str) -> None:
        errors.append(f"{path}: {problem} ({hint})")

    if config.scenario not in SCENARIO_KINDS:
        err("scenario", f"unknown kind {config.scenario!r}", f"pick one of {SCENARIO_KINDS}")
        return errors
    if config.preset not in PRESET_NAMES:
        err("preset", f"unknown preset {config.preset!r}", f"pick one of {PRESET_NAMES}")
        return errors

    try:
        preset = config.build_preset()
    except (ValueError, TypeError) as exc:
        err("overrides", str(exc), "check field names and ranges")
        return errors

    if config.modes < 1:
        err("modes", f"must be >= 1, got {config.modes}", "use at least one temporal mode")

    resolution = config.grid_span_hz / config.grid_points
    if config.scenario in ("storage", "stark_readout", "qubit", "sweep") and resolution > 20e3:
        err(
            "grid_points",
            f"resolution {resolution:.0f} Hz exceeds 20 kHz",
            f"raise grid_points to >= {int(config.grid_span_hz / 20e3)} (next power of two)",
        )

    if preset.comb.bandwidth_hz > preset.pit_width_hz:
        err(
            "overrides.bandwidth_hz",
            f"comb bandwidth {preset.comb.bandwidth_hz:g} Hz exceeds the pit width "
            f"{preset.pit_width_hz:g} Hz",
            "widen pit_width_hz or narrow the comb",
        )

    if config.scenario in ("storage", "stark_readout", "qubit"):
        record = config.grid_points / config.grid_span_hz
        spacing = (
            config.mode_spacing_s
            if config.mode_spacing_s is not None
            else 2.5 * preset.pulse_fwhm_s
        )
        n_orders = config.stark_order if config.scenario == "stark_readout" else 1
        last_echo = (
            config.input_time_s
            + (config.modes - 1) * spacing
            + n_orders * preset.storage_time_s
            + preset.window_half_s
        )
        if last_echo > record:
            err(
                "grid_points",
                f"latest analyzed echo at {last_echo:.2e} s exceeds the record length {record:.2e} s",
                "raise grid_points or reduce modes/stark_order",
            )
        if config.modes > 1 and spacing < 2.0 * preset.pulse_fwhm_s:
            err(
                "mode_spacing_s",
                f"{spacing:g} s spacing overlaps {preset.pulse_fwhm_s:g} s pulses",
                "use spacing >= 2 pulse FWHMs",
            )

    if config.scenario == "stark_readout":
        if config.stark_order < 1:
            err("stark_order", "must be >= 1", "restore echo order n >= 1")

    if config.scenario == "sweep":
        for bw in config.sweep_bandwidths_hz:
            if bw > preset.pit_width_hz:
                err(
                    "sweep_bandwidths_hz",
                    f"bandwidth {bw:g} Hz exceeds the pit width {preset.pit_width_hz:g} Hz",
                    "keep the comb inside the hole-burning pit",
                )
        for scheme in config.sweep_schemes:
            if scheme not in ("enhanced", "natural_same_crystal", "natural_high_absorption"):
                err("sweep_schemes", f"unknown scheme {scheme!r}", "see optimize.SWEEP_SCHEMES")

    if config.scenario == "fit":
        r = config.fit_r_measured
        if r is not None and not 0.0 < r < 1.0:
            err("fit_r_measured", f"{r} outside (0, 1)", "pass the measured on-resonance reflectivity")

    if config.afc_lifetime_s is not None and config.afc_lifetime_s <= 0:
        err("afc_lifetime_s", "must be positive", "effective AFC lifetime in seconds")

    return errors
